#include "crcca/crcca.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

#include "crcca/linalg.hpp"
#include "crcca/linear_cca.hpp"

namespace crcca {

void CrccaConfig::validate(Eigen::Index dx, Eigen::Index dy) const {
    if (levels < 2) throw std::invalid_argument("crcca config: levels must be >= 2");
    if (dim < 1 || dim > std::min(dx, dy)) {
        throw std::invalid_argument("crcca config: dim must be in [1, min(dx, dy)]");
    }
    if (max_iters < 1) throw std::invalid_argument("crcca config: max_iters must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("crcca config: tol must be > 0");
}

CrccaModel fit_crcca(const PairedDataset& train, const CrccaConfig& config) {
    train.validate();
    config.validate(train.x.cols(), train.y.cols());
    const int d = config.dim;

    // Fixed partitions for both views; only the fits change across iterations.
    const LatticeGrid grid_x = build_grid(train.x, config.levels);
    const LatticeGrid grid_y = build_grid(train.y, config.levels);

    // Warm start: V0 is the whitened linear-CCA projection of Y.
    const LinearCcaModel init = fit_linear_cca(train, d, config.ridge);
    Matrix v = project(init, train.x, train.y).v;

    CrccaModel model;
    model.config = config;
    Matrix u;
    double prev_objective = -2.0;
    model.converged = false;
    const auto whitening_errors = [&](const Matrix& m, double& mean_err, double& cov_err) {
        const Moments mom = column_moments(m);
        mean_err = std::max(mean_err, mom.mean.cwiseAbs().maxCoeff());
        cov_err = std::max(cov_err,
                           (mom.covariance - Matrix::Identity(d, d)).cwiseAbs().maxCoeff());
    };
    for (int iter = 0; iter < config.max_iters; ++iter) {
        model.map_u = affine_correct(fit_rsuq(train.x, v, grid_x), train.x);
        u = predict(model.map_u, train.x);
        model.map_v = affine_correct(fit_rsuq(train.y, u, grid_y), train.y);
        v = predict(model.map_v, train.y);
        const double objective = normalized_objective(u, v);
        model.objective_trace.push_back(objective);
        double mean_err = 0.0, cov_err = 0.0;
        whitening_errors(u, mean_err, cov_err);
        whitening_errors(v, mean_err, cov_err);
        model.whitening_mean_trace.push_back(mean_err);
        model.whitening_cov_trace.push_back(cov_err);
        if (iter > 0 &&
            std::abs(objective - prev_objective) < config.tol * std::max(std::abs(prev_objective), 1e-12)) {
            model.converged = true;
            break;
        }
        prev_objective = objective;
    }

    // Alternating whitened fits need not diagonalize the cross-covariance;
    // rotate both sides so component-wise correlations realize the full
    // trace. Inputs are whitened, so the CCA rotations are orthogonal.
    const Matrix cross = (u.transpose() * v) / static_cast<double>(train.rows());
    Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    model.align_u = svd.matrixU().transpose();
    model.align_v = svd.matrixV().transpose();

    model.entropy_u = quantizer_entropy(model.map_u, train.x);
    model.entropy_v = quantizer_entropy(model.map_v, train.y);

    const double aligned_objective =
        normalized_objective(u * model.align_u.transpose(), v * model.align_v.transpose());
    model.objective_trace.push_back(aligned_objective);
    return model;
}

Matrix transform_u(const CrccaModel& model, const Matrix& x) {
    return predict(model.map_u, x) * model.align_u.transpose();
}

Matrix transform_v(const CrccaModel& model, const Matrix& y) {
    return predict(model.map_v, y) * model.align_v.transpose();
}

EvalReport evaluate(const CrccaModel& model, const PairedDataset& data) {
    data.validate();
    if (data.x.cols() != model.map_u.grid.dim() || data.y.cols() != model.map_v.grid.dim()) {
        throw std::invalid_argument("evaluate: data dimensions do not match the fitted maps");
    }
    const Matrix u = transform_u(model, data.x);
    const Matrix v = transform_v(model, data.y);
    EvalReport report;
    report.correlations = component_correlations(u, v);
    report.objective = report.correlations.sum() / static_cast<double>(report.correlations.size());
    report.distortion = mean_squared_distance(u, v);
    report.entropy_u = quantizer_entropy(model.map_u, data.x);
    report.entropy_v = quantizer_entropy(model.map_v, data.y);
    return report;
}

std::vector<SweepPoint> sweep_levels(const PairedDataset& train, const PairedDataset& eval,
                                     const std::vector<int>& levels_list, CrccaConfig config) {
    if (levels_list.empty()) {
        throw std::invalid_argument("sweep_levels: empty levels list");
    }
    std::vector<SweepPoint> curve;
    curve.reserve(levels_list.size());
    for (int n : levels_list) {
        SweepPoint point;
        point.levels = n;
        try {
            config.levels = n;
            const CrccaModel model = fit_crcca(train, config);
            const EvalReport report = evaluate(model, eval);
            point.ok = true;
            point.eval_objective = report.objective;
            point.entropy_u = model.entropy_u;
            point.entropy_v = model.entropy_v;
        } catch (const std::exception& e) {
            point.ok = false;
            point.error = e.what();
        }
        curve.push_back(point);
    }
    return curve;
}

}  // namespace crcca
