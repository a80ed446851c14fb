#pragma once

#include <Eigen/Dense>

namespace crcca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Symmetric inverse square root of a positive-definite matrix via
// eigendecomposition. Eigenvalues are clamped below at `floor` when
// floor > 0; with floor == 0 a rank-deficient input throws, reporting the
// minimum eigenvalue.
Matrix inverse_sqrt_psd(const Matrix& s, double floor = 0.0);

// Sample Pearson correlation between two columns. Throws when either
// column has zero variance.
double sample_correlation(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

// (1/d) * sum_i samplecorr(U_i, V_i). Throws on shape mismatch or a
// zero-variance column (the error names the column).
double normalized_objective(const Matrix& u, const Matrix& v);

// Per-component sample correlations between paired columns of U and V.
Vector component_correlations(const Matrix& u, const Matrix& v);

// Mean squared row distance (1/n) * sum_i ||u_i - v_i||^2.
double mean_squared_distance(const Matrix& u, const Matrix& v);

}  // namespace crcca
