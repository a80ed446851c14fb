#pragma once

#include "crcca/dataset.hpp"
#include "crcca/linear_cca.hpp"

namespace crcca {

// Nonparametric alternating conditional expectation with k-NN smoothing.
// Transforms are stored as fitted values at the training points and
// extended to new points by k-NN averaging.
struct AceModel {
    Matrix train_x;
    Matrix train_y;
    Matrix phi;  // n x d fitted transform values of X
    Matrix psi;  // n x d fitted transform values of Y
    Vector correlations;  // per component, on train
    int k = 10;
    int dim = 1;
};

// Sequential component extraction: each component alternates standardized
// k-NN conditional-expectation estimates between the views until its
// correlation stabilizes; later components are Gram-Schmidt residualized
// against earlier ones.
AceModel fit_ace(const PairedDataset& train, int d, int k, int max_iters = 50,
                 double tol = 1e-6);

// Transform value at a new point = mean of the fitted values of its k
// nearest training points (Euclidean metric, distance ties broken by
// training index).
Projection predict_ace(const AceModel& model, const Matrix& x_new, const Matrix& y_new);

// Exact k-NN: row i of the result lists the indices of the k nearest rows
// of `points` to row i of `queries`, nearest first. Parallelized over
// query rows when `threads` > 1.
Eigen::MatrixX<Eigen::Index> knn_indices(const Matrix& points, const Matrix& queries, int k,
                                         int threads = 1);

// Thread count resolution: explicit value, else CRCCA_THREADS, else 1.
int resolve_threads(int requested);

}  // namespace crcca
