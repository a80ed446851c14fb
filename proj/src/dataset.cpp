#include "crcca/dataset.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "crcca/rng.hpp"

namespace crcca {

void PairedDataset::validate() const {
    if (x.rows() != y.rows()) {
        throw std::invalid_argument("paired dataset: x has " + std::to_string(x.rows()) +
                                    " rows but y has " + std::to_string(y.rows()));
    }
    if (x.rows() < 1) {
        throw std::invalid_argument("paired dataset: no rows");
    }
    if (!x.allFinite() || !y.allFinite()) {
        throw std::invalid_argument("paired dataset: non-finite entry (NaN or Inf)");
    }
}

void SplitSpec::validate() const {
    const double fracs[3] = {train_fraction, eval_fraction, test_fraction};
    for (double f : fracs) {
        if (!(f >= 0.0 && f <= 1.0)) {
            throw std::invalid_argument("split spec: fraction out of [0,1]");
        }
    }
    const double sum = train_fraction + eval_fraction + test_fraction;
    if (std::abs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument("split spec: fractions sum to " + std::to_string(sum) +
                                    ", expected 1");
    }
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

Matrix load_csv(const std::string& path, bool has_header, std::vector<std::string>* names) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open file: " + path);
    }
    std::string line;
    std::vector<std::vector<double>> rows;
    std::size_t cols = 0;
    std::size_t data_row = 0;
    bool header_pending = has_header;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        if (header_pending) {
            header_pending = false;
            if (names) {
                names->clear();
                for (const auto& c : split_line(line)) names->push_back(trim(c));
            }
            continue;
        }
        ++data_row;
        const auto cells = split_line(line);
        if (cols == 0) {
            cols = cells.size();
        } else if (cells.size() != cols) {
            throw std::runtime_error(path + ": ragged row " + std::to_string(data_row) +
                                     " has " + std::to_string(cells.size()) +
                                     " cells, expected " + std::to_string(cols));
        }
        std::vector<double> row(cols);
        for (std::size_t j = 0; j < cols; ++j) {
            const std::string cell = trim(cells[j]);
            std::size_t used = 0;
            double value = 0;
            bool ok = !cell.empty();
            if (ok) {
                try {
                    value = std::stod(cell, &used);
                } catch (const std::exception&) {
                    ok = false;
                }
            }
            if (!ok || used != cell.size()) {
                throw std::runtime_error(path + ": non-numeric cell \"" + cell + "\" at row " +
                                         std::to_string(data_row) + ", column " +
                                         std::to_string(j + 1));
            }
            row[j] = value;
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw std::runtime_error(path + ": no rows");
    }
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

void write_csv(const std::string& path, const Matrix& m, const std::vector<std::string>& names) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write file: " + path);
    }
    out.precision(17);
    if (!names.empty()) {
        for (std::size_t j = 0; j < names.size(); ++j) {
            if (j) out << ',';
            out << names[j];
        }
        out << '\n';
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << m(i, j);
        }
        out << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed: " + path);
    }
}

std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, std::uint64_t seed) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    std::mt19937_64 gen(seed);
    for (Eigen::Index i = n - 1; i > 0; --i) {
        const auto j = static_cast<Eigen::Index>(bounded(gen, static_cast<std::uint64_t>(i) + 1));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    return idx;
}

PairedDataset take_rows(const PairedDataset& data, const std::vector<Eigen::Index>& rows) {
    PairedDataset out;
    out.x.resize(static_cast<Eigen::Index>(rows.size()), data.x.cols());
    out.y.resize(static_cast<Eigen::Index>(rows.size()), data.y.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.x.row(static_cast<Eigen::Index>(i)) = data.x.row(rows[i]);
        out.y.row(static_cast<Eigen::Index>(i)) = data.y.row(rows[i]);
    }
    out.x_names = data.x_names;
    out.y_names = data.y_names;
    return out;
}

SplitResult split(const PairedDataset& data, const SplitSpec& spec) {
    data.validate();
    spec.validate();
    const Eigen::Index n = data.rows();
    auto n_train = static_cast<Eigen::Index>(std::lround(spec.train_fraction * static_cast<double>(n)));
    auto n_eval = static_cast<Eigen::Index>(std::lround(spec.eval_fraction * static_cast<double>(n)));
    if (n_train + n_eval > n) n_eval = n - n_train;
    const Eigen::Index n_test = n - n_train - n_eval;
    if (n_train < 1 || n_eval < 1 || n_test < 1) {
        throw std::runtime_error("split: empty split (sizes " + std::to_string(n_train) + "/" +
                                 std::to_string(n_eval) + "/" + std::to_string(n_test) + ")");
    }
    const auto perm = shuffled_indices(n, spec.seed);
    std::vector<Eigen::Index> train_rows(perm.begin(), perm.begin() + n_train);
    std::vector<Eigen::Index> eval_rows(perm.begin() + n_train, perm.begin() + n_train + n_eval);
    std::vector<Eigen::Index> test_rows(perm.begin() + n_train + n_eval, perm.end());
    return SplitResult{take_rows(data, train_rows), take_rows(data, eval_rows),
                       take_rows(data, test_rows)};
}

Moments column_moments(const Matrix& m) {
    if (m.rows() < 2) {
        throw std::invalid_argument("column_moments: need at least 2 rows, got " +
                                    std::to_string(m.rows()));
    }
    Moments out;
    out.mean = m.colwise().mean();
    const Matrix centered = m.rowwise() - out.mean.transpose();
    out.covariance = (centered.transpose() * centered) / static_cast<double>(m.rows());
    return out;
}

}  // namespace crcca
