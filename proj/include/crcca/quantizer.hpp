#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "crcca/dataset.hpp"

namespace crcca {

// Uniform lattice over the source space: per-dimension bounds and level
// counts. Cell widths are (upper - lower) / levels.
struct LatticeGrid {
    Vector lower;
    Vector upper;
    std::vector<int> levels;

    int dim() const { return static_cast<int>(lower.size()); }
    double width(int axis) const {
        return (upper(axis) - lower(axis)) / static_cast<double>(levels[static_cast<std::size_t>(axis)]);
    }
    std::int64_t cell_count() const;
    void validate() const;
};

// Bounds from per-dimension sample min/max, upper widened by 1e-9 * range
// so the max sample falls in the last cell. A zero-range dimension
// collapses to a single cell (warning on stderr).
LatticeGrid build_grid(const Matrix& samples, int levels);
LatticeGrid build_grid(const Matrix& samples, const std::vector<int>& levels);

// Flattened row-major cell id. Out-of-range points clamp to the boundary
// cell, so assignment is total.
std::int64_t assign_cell(const LatticeGrid& grid, const Eigen::Ref<const Vector>& point);

// Inverse of the row-major flattening.
std::vector<int> unflatten_cell(const LatticeGrid& grid, std::int64_t cell);

// Uniform lattice quantizer of a source space with per-cell fit vectors
// learned from a remote target, plus the affine correction that restores
// zero mean and identity covariance on the training set.
struct QuantizedMap {
    struct Cell {
        std::int64_t count = 0;
        Vector fit;
    };

    LatticeGrid grid;
    std::unordered_map<std::int64_t, Cell> cells;  // occupied cells only
    Vector fallback;   // global target mean (corrected along with the fits)
    Matrix affine_a;   // d x d
    Vector affine_b;   // d
    bool corrected = false;

    int target_dim() const { return static_cast<int>(fallback.size()); }
};

// Fit of each occupied cell = mean of the targets whose source row fell in
// that cell; the empirical risk minimizer over uniform lattice quantizers.
QuantizedMap fit_rsuq(const Matrix& x, const Matrix& targets, const LatticeGrid& grid);

// Finds A = symmetric inverse square root of the output covariance on
// x_train and B = -A * (output mean), absorbs them into the stored fits.
// Corrected outputs have exactly zero mean and identity covariance on the
// training set. Throws when the output covariance is rank-deficient.
QuantizedMap affine_correct(const QuantizedMap& map, const Matrix& x_train);

// Per row: the corrected fit of the assigned cell. An unoccupied cell maps
// to the nearest occupied cell in grid-index Euclidean distance, ties
// broken by lowest flattened id.
Matrix predict(const QuantizedMap& map, const Matrix& x_new);

// Shannon entropy (base 2) of the empirical cell-occupancy distribution
// of x under the map's grid.
double quantizer_entropy(const QuantizedMap& map, const Matrix& x);

// Cell-occupancy counts of x under the grid (used for entropy reports).
std::unordered_map<std::int64_t, std::int64_t> cell_histogram(const LatticeGrid& grid,
                                                              const Matrix& x);

}  // namespace crcca
