#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace crcca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Two aligned sample matrices: row i of x pairs with row i of y.
struct PairedDataset {
    Matrix x;  // n x dx
    Matrix y;  // n x dy
    std::vector<std::string> x_names;  // empty when the CSV had no header
    std::vector<std::string> y_names;

    Eigen::Index rows() const { return x.rows(); }

    // Throws unless x and y have the same row count n >= 1 and all
    // entries are finite.
    void validate() const;
};

struct SplitSpec {
    double train_fraction = 0.7;
    double eval_fraction = 0.15;
    double test_fraction = 0.15;
    std::uint64_t seed = 0;

    // Fractions must be in [0,1] and sum to 1 within 1e-12.
    void validate() const;
};

struct SplitResult {
    PairedDataset train;
    PairedDataset eval;
    PairedDataset test;
};

// Reads a comma-separated file of decimal reals. Every row must have the
// same column count. Parse errors name the offending (row, column),
// 1-based over the data section. If `names` is non-null and has_header is
// set, the header cells are returned through it.
Matrix load_csv(const std::string& path, bool has_header,
                std::vector<std::string>* names = nullptr);

void write_csv(const std::string& path, const Matrix& m,
               const std::vector<std::string>& names = {});

// Fisher-Yates permutation of {0..n-1} driven by mt19937_64, identical
// across platforms for a given seed.
std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, std::uint64_t seed);

// Disjoint row partition covering all rows; the same permutation is
// applied to x and y. Sizes: train = round(f_train*n),
// eval = round(f_eval*n), test = remainder. Throws if any split is empty.
SplitResult split(const PairedDataset& data, const SplitSpec& spec);

struct Moments {
    Vector mean;
    Matrix covariance;  // normalized by n, not n-1
};

// Sample mean and covariance of the columns. Requires n >= 2.
Moments column_moments(const Matrix& m);

PairedDataset take_rows(const PairedDataset& data,
                        const std::vector<Eigen::Index>& rows);

}  // namespace crcca
