#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crcca/dataset.hpp"

namespace crcca {

inline constexpr const char* kToolVersion = "0.1.0";

// One experiment: data source, split policy, method and its parameter
// grid, repetition count. When `levels` (crcca) or `k_list` (ace) has
// several entries, each repetition picks the entry with the best
// evaluation-split objective and reports test metrics for that pick only.
struct ExperimentConfig {
    std::string method = "crcca";  // linear | ace | crcca
    std::string x_csv;
    std::string y_csv;
    bool csv_header = false;
    std::int64_t synth_n = 0;  // > 0 generates paired synthetic data instead of reading CSVs
    SplitSpec split;           // fractions only; the seed field is set per repetition
    int dim = 2;
    std::vector<int> levels = {13};  // crcca quantization levels per axis
    std::vector<int> k_list = {70};  // ace neighborhood sizes
    int max_iters = 100;
    double tol = 1e-5;
    double ridge = 0.0;
    int repetitions = 1;
    std::uint64_t seed = 0;  // repetition r splits with seed + r
    std::string out_dir;     // empty: no files written
    int threads = 0;         // 0: CRCCA_THREADS env var, else 1

    void validate() const;
};

// One evaluated point of the hyperparameter sweep (all candidates, not
// just the selected one).
struct CurvePoint {
    int repetition = 0;
    int parameter = 0;  // levels or k
    double eval_objective = 0.0;
    double entropy_u = 0.0;  // train-cell entropy in bits, crcca only
    double entropy_v = 0.0;
};

struct RepetitionResult {
    int repetition = 0;
    bool ok = false;
    std::string error;
    int selected_parameter = 0;  // 0 for linear
    double train_objective = 0.0;
    double eval_objective = 0.0;
    double test_objective = 0.0;
    std::vector<double> test_correlations;
    double entropy_u = 0.0;  // empirical train-cell entropies (crcca)
    double entropy_v = 0.0;
    double gt_entropy_u = 0.0;  // Good-Turing smoothed counterparts
    double gt_entropy_v = 0.0;
    double gt_missing_mass_u = 0.0;
    double gt_missing_mass_v = 0.0;
    double seconds = 0.0;
};

struct Report {
    ExperimentConfig config;
    std::string tool_version;
    std::string data_hash_x;  // FNV-1a over the matrix bytes, hex
    std::string data_hash_y;
    std::vector<RepetitionResult> repetitions;
    std::vector<CurvePoint> curve;
    int failed_repetitions = 0;
    double mean_test_objective = 0.0;
    double std_test_objective = 0.0;  // population std over successful reps
    double min_test_objective = 0.0;
    double max_test_objective = 0.0;
    double total_seconds = 0.0;
    std::string timestamp;
};

PairedDataset load_experiment_data(const ExperimentConfig& config);

// Per repetition: split with seed + r, fit on train, select the parameter
// by evaluation objective, measure on test. A repetition that throws is
// recorded with its error and the run continues.
Report run(const ExperimentConfig& config);

// All wall-clock fields live under one "timing" key so reports are
// comparable byte-for-byte after dropping it (or by passing
// include_timing = false).
std::string report_to_json(const Report& report, bool include_timing = true);

std::string experiment_config_to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const std::string& text);

// report.json plus curve.csv (when any sweep points exist) under
// config.out_dir.
void write_report_files(const Report& report);

std::string fnv1a_hex(const Matrix& m);

}  // namespace crcca
