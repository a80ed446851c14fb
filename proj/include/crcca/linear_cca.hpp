#pragma once

#include "crcca/dataset.hpp"

namespace crcca {

// Classical linear CCA via SVD of the whitened cross-covariance.
struct LinearCcaModel {
    Matrix projection_x;  // d x dx
    Matrix projection_y;  // d x dy
    Vector mean_x;
    Vector mean_y;
    Vector correlations;  // length d, sorted descending, each in [0, 1]
};

// Top-d canonical pairs. `ridge` is added to both covariance diagonals
// before the inverse square roots; pass 0 to fail hard on singular
// covariance. Requires d <= min(dx, dy) and n > max(dx, dy).
LinearCcaModel fit_linear_cca(const PairedDataset& data, int d, double ridge = 0.0);

struct Projection {
    Matrix u;
    Matrix v;
};

// U = (x_new - mean_x) * projection_x^T, same for V.
Projection project(const LinearCcaModel& model, const Matrix& x_new, const Matrix& y_new);

}  // namespace crcca
