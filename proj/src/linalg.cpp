#include "crcca/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <string>

namespace crcca {

Matrix inverse_sqrt_psd(const Matrix& s, double floor) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
    if (eig.info() != Eigen::Success) {
        throw std::runtime_error("inverse_sqrt_psd: eigendecomposition failed");
    }
    Vector lambda = eig.eigenvalues();
    const double lambda_max = lambda.maxCoeff();
    const double singular_tol = 1e-12 * std::max(lambda_max, 1e-300);
    Vector inv_sqrt(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        double v = lambda(i);
        if (floor > 0.0) v = std::max(v, floor);
        if (v <= singular_tol) {
            throw std::runtime_error(
                "inverse_sqrt_psd: matrix numerically singular, minimum eigenvalue " +
                std::to_string(lambda.minCoeff()));
        }
        inv_sqrt(i) = 1.0 / std::sqrt(v);
    }
    return eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
}

double sample_correlation(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw std::invalid_argument("sample_correlation: need two equal-length columns, n >= 2");
    }
    const double n = static_cast<double>(a.size());
    const double ma = a.mean();
    const double mb = b.mean();
    const Vector ca = a.array() - ma;
    const Vector cb = b.array() - mb;
    const double va = ca.squaredNorm() / n;
    const double vb = cb.squaredNorm() / n;
    if (va <= 0.0 || vb <= 0.0) {
        throw std::runtime_error("sample_correlation: zero-variance column");
    }
    return (ca.dot(cb) / n) / std::sqrt(va * vb);
}

Vector component_correlations(const Matrix& u, const Matrix& v) {
    if (u.rows() != v.rows() || u.cols() != v.cols()) {
        throw std::invalid_argument("component_correlations: U and V must have the same shape");
    }
    Vector corr(u.cols());
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
        try {
            corr(j) = sample_correlation(u.col(j), v.col(j));
        } catch (const std::runtime_error&) {
            throw std::runtime_error("correlation undefined: zero-variance column " +
                                     std::to_string(j));
        }
    }
    return corr;
}

double normalized_objective(const Matrix& u, const Matrix& v) {
    const Vector corr = component_correlations(u, v);
    return corr.sum() / static_cast<double>(corr.size());
}

double mean_squared_distance(const Matrix& u, const Matrix& v) {
    if (u.rows() != v.rows() || u.cols() != v.cols()) {
        throw std::invalid_argument("mean_squared_distance: shape mismatch");
    }
    return (u - v).rowwise().squaredNorm().mean();
}

}  // namespace crcca
