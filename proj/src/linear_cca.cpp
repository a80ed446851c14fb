#include "crcca/linear_cca.hpp"

#include <Eigen/SVD>
#include <stdexcept>

#include "crcca/linalg.hpp"

namespace crcca {

LinearCcaModel fit_linear_cca(const PairedDataset& data, int d, double ridge) {
    data.validate();
    const Eigen::Index n = data.rows();
    const Eigen::Index dx = data.x.cols();
    const Eigen::Index dy = data.y.cols();
    if (d < 1 || d > std::min(dx, dy)) {
        throw std::invalid_argument("fit_linear_cca: d must be in [1, min(dx, dy)]");
    }
    if (n <= std::max(dx, dy)) {
        throw std::invalid_argument("fit_linear_cca: need n > max(dx, dy)");
    }
    if (ridge < 0.0) {
        throw std::invalid_argument("fit_linear_cca: ridge must be nonnegative");
    }

    const Moments mx = column_moments(data.x);
    const Moments my = column_moments(data.y);
    const Matrix xc = data.x.rowwise() - mx.mean.transpose();
    const Matrix yc = data.y.rowwise() - my.mean.transpose();
    const Matrix sxy = (xc.transpose() * yc) / static_cast<double>(n);

    Matrix sxx = mx.covariance;
    Matrix syy = my.covariance;
    sxx.diagonal().array() += ridge;
    syy.diagonal().array() += ridge;

    const Matrix wx = inverse_sqrt_psd(sxx, ridge);
    const Matrix wy = inverse_sqrt_psd(syy, ridge);

    Eigen::JacobiSVD<Matrix> svd(wx * sxy * wy, Eigen::ComputeThinU | Eigen::ComputeThinV);

    LinearCcaModel model;
    model.mean_x = mx.mean;
    model.mean_y = my.mean;
    model.correlations = svd.singularValues().head(d);
    Matrix wu = svd.matrixU().leftCols(d);  // dx x d
    Matrix wv = svd.matrixV().leftCols(d);
    // Singular values are nonnegative, so each pair already has rho_i >= 0;
    // the joint sign of (w_i, z_i) is still arbitrary. Fix it so the
    // largest-magnitude entry of each left vector is positive.
    for (Eigen::Index j = 0; j < d; ++j) {
        Eigen::Index imax = 0;
        wu.col(j).cwiseAbs().maxCoeff(&imax);
        if (wu(imax, j) < 0.0) {
            wu.col(j) = -wu.col(j);
            wv.col(j) = -wv.col(j);
        }
    }
    model.projection_x = wu.transpose() * wx;  // d x dx
    model.projection_y = wv.transpose() * wy;  // d x dy
    return model;
}

Projection project(const LinearCcaModel& model, const Matrix& x_new, const Matrix& y_new) {
    if (x_new.cols() != model.projection_x.cols() || y_new.cols() != model.projection_y.cols()) {
        throw std::invalid_argument("project: column count does not match training dims");
    }
    Projection p;
    p.u = (x_new.rowwise() - model.mean_x.transpose()) * model.projection_x.transpose();
    p.v = (y_new.rowwise() - model.mean_y.transpose()) * model.projection_y.transpose();
    return p;
}

}  // namespace crcca
