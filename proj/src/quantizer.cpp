#include "crcca/quantizer.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "crcca/linalg.hpp"

namespace crcca {

std::int64_t LatticeGrid::cell_count() const {
    std::int64_t total = 1;
    for (int n : levels) {
        if (total > std::numeric_limits<std::int64_t>::max() / n) {
            throw std::runtime_error("lattice grid: cell count overflows 64-bit index");
        }
        total *= n;
    }
    return total;
}

void LatticeGrid::validate() const {
    if (lower.size() != upper.size() ||
        static_cast<std::size_t>(lower.size()) != levels.size() || lower.size() == 0) {
        throw std::invalid_argument("lattice grid: inconsistent dimensions");
    }
    for (int axis = 0; axis < dim(); ++axis) {
        if (levels[static_cast<std::size_t>(axis)] < 1) {
            throw std::invalid_argument("lattice grid: levels must be >= 1");
        }
        if (!(lower(axis) < upper(axis))) {
            throw std::invalid_argument("lattice grid: lower must be < upper");
        }
    }
    cell_count();  // overflow check
}

LatticeGrid build_grid(const Matrix& samples, int levels) {
    return build_grid(samples, std::vector<int>(static_cast<std::size_t>(samples.cols()), levels));
}

LatticeGrid build_grid(const Matrix& samples, const std::vector<int>& levels) {
    if (samples.rows() < 1 || samples.cols() < 1) {
        throw std::invalid_argument("build_grid: empty sample matrix");
    }
    if (levels.size() != static_cast<std::size_t>(samples.cols())) {
        throw std::invalid_argument("build_grid: one level count per dimension required");
    }
    LatticeGrid grid;
    grid.lower = samples.colwise().minCoeff();
    grid.upper = samples.colwise().maxCoeff();
    grid.levels = levels;
    for (int axis = 0; axis < grid.dim(); ++axis) {
        if (grid.levels[static_cast<std::size_t>(axis)] < 1) {
            throw std::invalid_argument("build_grid: levels must be >= 1");
        }
        const double range = grid.upper(axis) - grid.lower(axis);
        if (range <= 0.0) {
            std::cerr << "build_grid: dimension " << axis
                      << " has zero range, collapsing to a single cell\n";
            grid.levels[static_cast<std::size_t>(axis)] = 1;
            grid.upper(axis) = grid.lower(axis) + 1.0;
        } else {
            grid.upper(axis) += 1e-9 * range;
        }
    }
    grid.validate();
    return grid;
}

std::int64_t assign_cell(const LatticeGrid& grid, const Eigen::Ref<const Vector>& point) {
    if (point.size() != grid.dim()) {
        throw std::invalid_argument("assign_cell: point dimension does not match grid");
    }
    std::int64_t id = 0;
    for (int axis = 0; axis < grid.dim(); ++axis) {
        const int n = grid.levels[static_cast<std::size_t>(axis)];
        auto idx = static_cast<std::int64_t>(
            std::floor((point(axis) - grid.lower(axis)) / grid.width(axis)));
        if (idx < 0) idx = 0;
        if (idx > n - 1) idx = n - 1;
        id = id * n + idx;
    }
    return id;
}

std::vector<int> unflatten_cell(const LatticeGrid& grid, std::int64_t cell) {
    std::vector<int> idx(static_cast<std::size_t>(grid.dim()));
    for (int axis = grid.dim() - 1; axis >= 0; --axis) {
        const int n = grid.levels[static_cast<std::size_t>(axis)];
        idx[static_cast<std::size_t>(axis)] = static_cast<int>(cell % n);
        cell /= n;
    }
    return idx;
}

QuantizedMap fit_rsuq(const Matrix& x, const Matrix& targets, const LatticeGrid& grid) {
    grid.validate();
    if (x.rows() == 0) {
        throw std::invalid_argument("fit_rsuq: no samples");
    }
    if (x.rows() != targets.rows()) {
        throw std::invalid_argument("fit_rsuq: x and targets must have the same row count");
    }
    if (x.cols() != grid.dim()) {
        throw std::invalid_argument("fit_rsuq: x dimension does not match grid");
    }
    QuantizedMap map;
    map.grid = grid;
    const auto d = targets.cols();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const std::int64_t id = assign_cell(grid, x.row(i).transpose());
        auto& cell = map.cells[id];
        if (cell.count == 0) cell.fit = Vector::Zero(d);
        cell.fit += targets.row(i).transpose();
        cell.count += 1;
    }
    for (auto& [id, cell] : map.cells) {
        cell.fit /= static_cast<double>(cell.count);
    }
    map.fallback = targets.colwise().mean();
    map.affine_a = Matrix::Identity(d, d);
    map.affine_b = Vector::Zero(d);
    map.corrected = false;
    return map;
}

QuantizedMap affine_correct(const QuantizedMap& map, const Matrix& x_train) {
    const Eigen::Index n = x_train.rows();
    if (n < 2) {
        throw std::invalid_argument("affine_correct: need at least 2 training rows");
    }
    const int d = map.target_dim();
    // Moments of the pre-correction outputs over the training set.
    Vector mean = Vector::Zero(d);
    Matrix second = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::int64_t id = assign_cell(map.grid, x_train.row(i).transpose());
        const auto it = map.cells.find(id);
        const Vector& out = it != map.cells.end() ? it->second.fit : map.fallback;
        mean += out;
        second += out * out.transpose();
    }
    mean /= static_cast<double>(n);
    const Matrix cov = second / static_cast<double>(n) - mean * mean.transpose();

    Matrix a;
    try {
        a = inverse_sqrt_psd(cov);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(
            std::string("affine_correct: output covariance rank-deficient (") + e.what() +
            "); use a larger level count N or a smaller output dimension d");
    }
    const Vector b = -a * mean;

    QuantizedMap out = map;
    for (auto& [id, cell] : out.cells) {
        cell.fit = a * cell.fit + b;
    }
    out.fallback = a * map.fallback + b;
    // Composed correction, so repeated calls keep U_q = A*U_RSUQ + B valid.
    out.affine_a = a * map.affine_a;
    out.affine_b = a * map.affine_b + b;
    out.corrected = true;
    return out;
}

namespace {

std::int64_t nearest_occupied_cell(const QuantizedMap& map, std::int64_t cell) {
    const auto want = unflatten_cell(map.grid, cell);
    double best_dist = std::numeric_limits<double>::infinity();
    std::int64_t best_id = -1;
    for (const auto& [id, unused] : map.cells) {
        const auto have = unflatten_cell(map.grid, id);
        double dist = 0.0;
        for (std::size_t k = 0; k < have.size(); ++k) {
            const double diff = static_cast<double>(have[k] - want[k]);
            dist += diff * diff;
        }
        if (dist < best_dist || (dist == best_dist && id < best_id)) {
            best_dist = dist;
            best_id = id;
        }
    }
    return best_id;
}

}  // namespace

Matrix predict(const QuantizedMap& map, const Matrix& x_new) {
    if (x_new.cols() != map.grid.dim()) {
        throw std::invalid_argument("predict: column count does not match grid dimension");
    }
    Matrix out(x_new.rows(), map.target_dim());
    std::unordered_map<std::int64_t, std::int64_t> resolved;  // unoccupied -> nearest occupied
    for (Eigen::Index i = 0; i < x_new.rows(); ++i) {
        std::int64_t id = assign_cell(map.grid, x_new.row(i).transpose());
        auto it = map.cells.find(id);
        if (it == map.cells.end()) {
            auto res = resolved.find(id);
            if (res == resolved.end()) {
                res = resolved.emplace(id, nearest_occupied_cell(map, id)).first;
            }
            it = map.cells.find(res->second);
        }
        out.row(i) = (it != map.cells.end() ? it->second.fit : map.fallback).transpose();
    }
    return out;
}

std::unordered_map<std::int64_t, std::int64_t> cell_histogram(const LatticeGrid& grid,
                                                              const Matrix& x) {
    std::unordered_map<std::int64_t, std::int64_t> counts;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        counts[assign_cell(grid, x.row(i).transpose())] += 1;
    }
    return counts;
}

double quantizer_entropy(const QuantizedMap& map, const Matrix& x) {
    if (x.rows() < 1) {
        throw std::invalid_argument("quantizer_entropy: no samples");
    }
    const auto counts = cell_histogram(map.grid, x);
    const double n = static_cast<double>(x.rows());
    double h = 0.0;
    for (const auto& [id, c] : counts) {
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

}  // namespace crcca
