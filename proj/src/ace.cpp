#include "crcca/ace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace crcca {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("CRCCA_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0 && v <= 1024) return static_cast<int>(v);
    }
    return 1;
}

Eigen::MatrixX<Eigen::Index> knn_indices(const Matrix& points, const Matrix& queries, int k,
                                         int threads) {
    const Eigen::Index n = points.rows();
    if (k < 1 || k > n) throw std::invalid_argument("knn: k must be between 1 and the number of points");
    if (queries.cols() != points.cols())
        throw std::invalid_argument("knn: query dimension mismatch");
    Eigen::MatrixX<Eigen::Index> out(queries.rows(), k);
    auto worker = [&](Eigen::Index lo, Eigen::Index hi) {
        std::vector<std::pair<double, Eigen::Index>> dist(static_cast<size_t>(n));
        for (Eigen::Index q = lo; q < hi; ++q) {
            for (Eigen::Index i = 0; i < n; ++i)
                dist[static_cast<size_t>(i)] = {(points.row(i) - queries.row(q)).squaredNorm(), i};
            std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
            for (int j = 0; j < k; ++j) out(q, j) = dist[static_cast<size_t>(j)].second;
        }
    };
    const Eigen::Index nq = queries.rows();
    const int nt = std::max(1, std::min<int>(threads, static_cast<int>(std::max<Eigen::Index>(nq, 1))));
    if (nt == 1 || nq < 256) {
        worker(0, nq);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(nt));
        const Eigen::Index chunk = (nq + nt - 1) / nt;
        for (int t = 0; t < nt; ++t) {
            const Eigen::Index lo = t * chunk;
            const Eigen::Index hi = std::min(nq, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(worker, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    return out;
}

namespace {

Vector neighbor_mean(const Eigen::MatrixX<Eigen::Index>& neigh, const Vector& values) {
    Vector out(neigh.rows());
    for (Eigen::Index i = 0; i < neigh.rows(); ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < neigh.cols(); ++j) s += values(neigh(i, j));
        out(i) = s / static_cast<double>(neigh.cols());
    }
    return out;
}

// Center, remove projections onto earlier standardized columns, scale to
// unit variance.
void refit_column(Vector& v, const Matrix& earlier, int n_earlier, int component) {
    const double n = static_cast<double>(v.size());
    v.array() -= v.mean();
    for (int c = 0; c < n_earlier; ++c) v -= (v.dot(earlier.col(c)) / n) * earlier.col(c);
    const double var = v.squaredNorm() / n;
    if (!(var > 1e-24))
        throw std::runtime_error("ace: component " + std::to_string(component + 1) +
                                 " collapsed to a constant transform");
    v /= std::sqrt(var);
}

}  // namespace

AceModel fit_ace(const PairedDataset& train, int d, int k, int max_iters, double tol) {
    train.validate();
    const Eigen::Index n = train.x.rows();
    if (d < 1) throw std::invalid_argument("ace: dim must be at least 1");
    if (d >= n) throw std::invalid_argument("ace: dim must be less than the number of rows");
    if (k < 1) throw std::invalid_argument("ace: k must be at least 1");
    if (k >= n) throw std::invalid_argument("ace: k must be less than the number of rows");
    if (max_iters < 1) throw std::invalid_argument("ace: max_iters must be at least 1");
    if (!(tol > 0.0)) throw std::invalid_argument("ace: tol must be positive");

    const int threads = resolve_threads(0);
    const auto neigh_x = knn_indices(train.x, train.x, k, threads);
    const auto neigh_y = knn_indices(train.y, train.y, k, threads);

    // Warm start for each component: linear canonical directions where
    // available, raw coordinates beyond that.
    Matrix psi_init(n, d);
    {
        int filled = 0;
        const int d_lin = std::min<int>(d, static_cast<int>(std::min(train.x.cols(), train.y.cols())));
        if (d_lin >= 1 && n > std::max(train.x.cols(), train.y.cols())) {
            const LinearCcaModel lin = fit_linear_cca(train, d_lin, 1e-10);
            psi_init.leftCols(d_lin) = project(lin, train.x, train.y).v;
            filled = d_lin;
        }
        for (int c = filled; c < d; ++c) psi_init.col(c) = train.y.col(c % train.y.cols());
    }

    AceModel model;
    model.train_x = train.x;
    model.train_y = train.y;
    model.phi = Matrix::Zero(n, d);
    model.psi = Matrix::Zero(n, d);
    model.correlations = Vector::Zero(d);
    model.k = k;
    model.dim = d;

    for (int c = 0; c < d; ++c) {
        Vector psi = psi_init.col(c);
        refit_column(psi, model.psi, c, c);
        Vector phi = Vector::Zero(n);
        double corr = -2.0;
        for (int iter = 0; iter < max_iters; ++iter) {
            phi = neighbor_mean(neigh_x, psi);
            refit_column(phi, model.phi, c, c);
            psi = neighbor_mean(neigh_y, phi);
            refit_column(psi, model.psi, c, c);
            const double next = phi.dot(psi) / static_cast<double>(n);
            if (std::abs(next - corr) < tol) {
                corr = next;
                break;
            }
            corr = next;
        }
        model.phi.col(c) = phi;
        model.psi.col(c) = psi;
        model.correlations(c) = corr;
    }
    return model;
}

Projection predict_ace(const AceModel& model, const Matrix& x_new, const Matrix& y_new) {
    const int threads = resolve_threads(0);
    Projection out;
    out.u = Matrix(x_new.rows(), model.dim);
    out.v = Matrix(y_new.rows(), model.dim);
    if (x_new.rows() > 0) {
        const auto neigh = knn_indices(model.train_x, x_new, model.k, threads);
        for (int c = 0; c < model.dim; ++c) out.u.col(c) = neighbor_mean(neigh, model.phi.col(c));
    }
    if (y_new.rows() > 0) {
        const auto neigh = knn_indices(model.train_y, y_new, model.k, threads);
        for (int c = 0; c < model.dim; ++c) out.v.col(c) = neighbor_mean(neigh, model.psi.col(c));
    }
    return out;
}

}  // namespace crcca
