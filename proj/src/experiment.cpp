#include "crcca/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include "crcca/ace.hpp"
#include "crcca/crcca.hpp"
#include "crcca/good_turing.hpp"
#include "crcca/linalg.hpp"
#include "crcca/linear_cca.hpp"
#include "crcca/synthgen.hpp"
#include "json.hpp"

namespace crcca {

namespace {

using nlohmann::json;

std::map<std::int64_t, std::int64_t> ordered(const std::unordered_map<std::int64_t, std::int64_t>& h) {
    return {h.begin(), h.end()};
}

void fill_entropies(const CrccaModel& model, const PairedDataset& train, RepetitionResult& rep) {
    rep.entropy_u = model.entropy_u;
    rep.entropy_v = model.entropy_v;
    const auto gt_u = good_turing(ordered(cell_histogram(model.map_u.grid, train.x)));
    const auto gt_v = good_turing(ordered(cell_histogram(model.map_v.grid, train.y)));
    rep.gt_entropy_u = entropy_bits(gt_u);
    rep.gt_entropy_v = entropy_bits(gt_v);
    rep.gt_missing_mass_u = gt_u.missing_mass;
    rep.gt_missing_mass_v = gt_v.missing_mass;
}

RepetitionResult run_one(const ExperimentConfig& cfg, const PairedDataset& data, int rep_index,
                         std::vector<CurvePoint>& curve) {
    RepetitionResult rep;
    rep.repetition = rep_index;

    SplitSpec spec = cfg.split;
    spec.seed = cfg.seed + static_cast<std::uint64_t>(rep_index);
    const SplitResult parts = split(data, spec);

    if (cfg.method == "linear") {
        const LinearCcaModel model = fit_linear_cca(parts.train, cfg.dim, cfg.ridge);
        const auto objective = [&](const PairedDataset& d) {
            const Projection p = project(model, d.x, d.y);
            return normalized_objective(p.u, p.v);
        };
        rep.train_objective = objective(parts.train);
        rep.eval_objective = objective(parts.eval);
        const Projection pt = project(model, parts.test.x, parts.test.y);
        rep.test_objective = normalized_objective(pt.u, pt.v);
        const Vector corr = component_correlations(pt.u, pt.v);
        rep.test_correlations.assign(corr.data(), corr.data() + corr.size());
    } else if (cfg.method == "ace") {
        bool have = false;
        AceModel best;
        double best_eval = 0.0;
        for (const int k : cfg.k_list) {
            AceModel model = fit_ace(parts.train, cfg.dim, k, cfg.max_iters, cfg.tol);
            const Projection pe = predict_ace(model, parts.eval.x, parts.eval.y);
            const double eval_obj = normalized_objective(pe.u, pe.v);
            curve.push_back({rep_index, k, eval_obj, 0.0, 0.0});
            if (!have || eval_obj > best_eval) {
                have = true;
                best = std::move(model);
                best_eval = eval_obj;
                rep.selected_parameter = k;
            }
        }
        rep.eval_objective = best_eval;
        rep.train_objective = normalized_objective(best.phi, best.psi);
        const Projection pt = predict_ace(best, parts.test.x, parts.test.y);
        rep.test_objective = normalized_objective(pt.u, pt.v);
        const Vector corr = component_correlations(pt.u, pt.v);
        rep.test_correlations.assign(corr.data(), corr.data() + corr.size());
    } else {
        bool have = false;
        CrccaModel best;
        double best_eval = 0.0;
        for (const int levels : cfg.levels) {
            CrccaConfig cc;
            cc.levels = levels;
            cc.dim = cfg.dim;
            cc.max_iters = cfg.max_iters;
            cc.tol = cfg.tol;
            cc.seed = spec.seed;
            cc.ridge = cfg.ridge;
            CrccaModel model = fit_crcca(parts.train, cc);
            const EvalReport ev = evaluate(model, parts.eval);
            curve.push_back({rep_index, levels, ev.objective, model.entropy_u, model.entropy_v});
            if (!have || ev.objective > best_eval) {
                have = true;
                best = std::move(model);
                best_eval = ev.objective;
                rep.selected_parameter = levels;
            }
        }
        rep.eval_objective = best_eval;
        rep.train_objective = evaluate(best, parts.train).objective;
        const EvalReport test = evaluate(best, parts.test);
        rep.test_objective = test.objective;
        rep.test_correlations.assign(test.correlations.data(),
                                     test.correlations.data() + test.correlations.size());
        fill_entropies(best, parts.train, rep);
    }
    rep.ok = true;
    return rep;
}

json config_json(const ExperimentConfig& c) {
    json j;
    j["method"] = c.method;
    j["x_csv"] = c.x_csv;
    j["y_csv"] = c.y_csv;
    j["csv_header"] = c.csv_header;
    j["synth_n"] = c.synth_n;
    j["train_fraction"] = c.split.train_fraction;
    j["eval_fraction"] = c.split.eval_fraction;
    j["test_fraction"] = c.split.test_fraction;
    j["dim"] = c.dim;
    j["levels"] = c.levels;
    j["k"] = c.k_list;
    j["max_iters"] = c.max_iters;
    j["tol"] = c.tol;
    j["ridge"] = c.ridge;
    j["repetitions"] = c.repetitions;
    j["seed"] = c.seed;
    j["out_dir"] = c.out_dir;
    j["threads"] = c.threads;
    return j;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (method != "linear" && method != "ace" && method != "crcca")
        throw std::invalid_argument("config: unknown method \"" + method + "\"");
    const bool synth = synth_n > 0;
    const bool csv = !x_csv.empty() || !y_csv.empty();
    if (synth == csv)
        throw std::invalid_argument("config: provide either synth_n or both x_csv and y_csv");
    if (csv && (x_csv.empty() || y_csv.empty()))
        throw std::invalid_argument("config: both x_csv and y_csv are required");
    split.validate();
    if (dim < 1) throw std::invalid_argument("config: dim must be at least 1");
    if (method == "crcca") {
        if (levels.empty()) throw std::invalid_argument("config: levels list is empty");
        for (const int n : levels)
            if (n < 2) throw std::invalid_argument("config: levels entries must be at least 2");
    }
    if (method == "ace") {
        if (k_list.empty()) throw std::invalid_argument("config: k list is empty");
        for (const int k : k_list)
            if (k < 1) throw std::invalid_argument("config: k entries must be at least 1");
    }
    if (max_iters < 1) throw std::invalid_argument("config: max_iters must be at least 1");
    if (!(tol > 0.0)) throw std::invalid_argument("config: tol must be positive");
    if (ridge < 0.0) throw std::invalid_argument("config: ridge must be non-negative");
    if (repetitions < 1) throw std::invalid_argument("config: repetitions must be at least 1");
    if (threads < 0) throw std::invalid_argument("config: threads must be non-negative");
}

PairedDataset load_experiment_data(const ExperimentConfig& config) {
    if (config.synth_n > 0) return generate(config.synth_n, config.seed).data;
    PairedDataset data;
    data.x = load_csv(config.x_csv, config.csv_header, &data.x_names);
    data.y = load_csv(config.y_csv, config.csv_header, &data.y_names);
    data.validate();
    return data;
}

std::string fnv1a_hex(const Matrix& m) {
    std::uint64_t h = 14695981039346656037ull;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            unsigned char bytes[sizeof(double)];
            std::memcpy(bytes, &v, sizeof(double));
            for (const unsigned char b : bytes) {
                h ^= b;
                h *= 1099511628211ull;
            }
        }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Report run(const ExperimentConfig& config) {
    config.validate();
    if (config.threads > 0) {
        const std::string v = std::to_string(config.threads);
        setenv("CRCCA_THREADS", v.c_str(), 1);
    }

    Report report;
    report.config = config;
    report.tool_version = kToolVersion;

    const PairedDataset data = load_experiment_data(config);
    report.data_hash_x = fnv1a_hex(data.x);
    report.data_hash_y = fnv1a_hex(data.y);

    {
        const auto now = std::chrono::system_clock::now();
        const std::time_t t = std::chrono::system_clock::to_time_t(now);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
        report.timestamp = buf;
    }

    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < config.repetitions; ++r) {
        const auto r0 = std::chrono::steady_clock::now();
        RepetitionResult rep;
        try {
            rep = run_one(config, data, r, report.curve);
        } catch (const std::exception& e) {
            rep = RepetitionResult{};
            rep.repetition = r;
            rep.ok = false;
            rep.error = "repetition " + std::to_string(r) + ": " + e.what();
            ++report.failed_repetitions;
        }
        rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - r0).count();
        report.repetitions.push_back(std::move(rep));
    }
    report.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::vector<double> objectives;
    for (const auto& rep : report.repetitions)
        if (rep.ok) objectives.push_back(rep.test_objective);
    if (!objectives.empty()) {
        double mean = 0.0;
        for (const double o : objectives) mean += o;
        mean /= static_cast<double>(objectives.size());
        double var = 0.0;
        for (const double o : objectives) var += (o - mean) * (o - mean);
        var /= static_cast<double>(objectives.size());
        report.mean_test_objective = mean;
        report.std_test_objective = std::sqrt(var);
        report.min_test_objective = *std::min_element(objectives.begin(), objectives.end());
        report.max_test_objective = *std::max_element(objectives.begin(), objectives.end());
    } else {
        report.mean_test_objective = std::numeric_limits<double>::quiet_NaN();
        report.std_test_objective = std::numeric_limits<double>::quiet_NaN();
        report.min_test_objective = std::numeric_limits<double>::quiet_NaN();
        report.max_test_objective = std::numeric_limits<double>::quiet_NaN();
    }

    if (!config.out_dir.empty()) write_report_files(report);
    return report;
}

std::string report_to_json(const Report& report, bool include_timing) {
    json j;
    j["tool_version"] = report.tool_version;
    j["config"] = config_json(report.config);
    j["data_hash_x"] = report.data_hash_x;
    j["data_hash_y"] = report.data_hash_y;
    json reps = json::array();
    for (const auto& rep : report.repetitions) {
        json r;
        r["repetition"] = rep.repetition;
        r["ok"] = rep.ok;
        if (!rep.ok) r["error"] = rep.error;
        r["selected_parameter"] = rep.selected_parameter;
        r["train_objective"] = rep.train_objective;
        r["eval_objective"] = rep.eval_objective;
        r["test_objective"] = rep.test_objective;
        r["test_correlations"] = rep.test_correlations;
        if (report.config.method == "crcca" && rep.ok) {
            r["entropy_u"] = rep.entropy_u;
            r["entropy_v"] = rep.entropy_v;
            r["gt_entropy_u"] = rep.gt_entropy_u;
            r["gt_entropy_v"] = rep.gt_entropy_v;
            r["gt_missing_mass_u"] = rep.gt_missing_mass_u;
            r["gt_missing_mass_v"] = rep.gt_missing_mass_v;
        }
        reps.push_back(std::move(r));
    }
    j["repetitions"] = std::move(reps);
    json curve = json::array();
    for (const auto& pt : report.curve) {
        json p;
        p["repetition"] = pt.repetition;
        p["parameter"] = pt.parameter;
        p["eval_objective"] = pt.eval_objective;
        if (report.config.method == "crcca") {
            p["entropy_u"] = pt.entropy_u;
            p["entropy_v"] = pt.entropy_v;
        }
        curve.push_back(std::move(p));
    }
    j["curve"] = std::move(curve);
    j["failed_repetitions"] = report.failed_repetitions;
    j["aggregate"] = {{"mean_test_objective", report.mean_test_objective},
                      {"std_test_objective", report.std_test_objective},
                      {"min_test_objective", report.min_test_objective},
                      {"max_test_objective", report.max_test_objective}};
    if (include_timing) {
        json seconds = json::array();
        for (const auto& rep : report.repetitions) seconds.push_back(rep.seconds);
        j["timing"] = {{"timestamp", report.timestamp},
                       {"total_seconds", report.total_seconds},
                       {"repetition_seconds", std::move(seconds)}};
    }
    return j.dump(2) + "\n";
}

std::string experiment_config_to_json(const ExperimentConfig& config) {
    return config_json(config).dump(2) + "\n";
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw std::runtime_error("config must be a JSON object");
    static const char* known[] = {"method",   "x_csv",        "y_csv",       "csv_header",
                                  "synth_n",  "train_fraction", "eval_fraction", "test_fraction",
                                  "dim",      "levels",       "k",           "max_iters",
                                  "tol",      "ridge",        "repetitions", "seed",
                                  "out_dir",  "threads"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool found = false;
        for (const char* name : known)
            if (key == name) found = true;
        if (!found) throw std::runtime_error("config: unknown key \"" + key + "\"");
    }
    ExperimentConfig c;
    try {
        c.method = j.value("method", c.method);
        c.x_csv = j.value("x_csv", c.x_csv);
        c.y_csv = j.value("y_csv", c.y_csv);
        c.csv_header = j.value("csv_header", c.csv_header);
        c.synth_n = j.value("synth_n", c.synth_n);
        c.split.train_fraction = j.value("train_fraction", c.split.train_fraction);
        c.split.eval_fraction = j.value("eval_fraction", c.split.eval_fraction);
        c.split.test_fraction = j.value("test_fraction", c.split.test_fraction);
        c.dim = j.value("dim", c.dim);
        c.levels = j.value("levels", c.levels);
        c.k_list = j.value("k", c.k_list);
        c.max_iters = j.value("max_iters", c.max_iters);
        c.tol = j.value("tol", c.tol);
        c.ridge = j.value("ridge", c.ridge);
        c.repetitions = j.value("repetitions", c.repetitions);
        c.seed = j.value("seed", c.seed);
        c.out_dir = j.value("out_dir", c.out_dir);
        c.threads = j.value("threads", c.threads);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("config field error: ") + e.what());
    }
    return c;
}

void write_report_files(const Report& report) {
    namespace fs = std::filesystem;
    const fs::path dir(report.config.out_dir);
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "report.json");
        if (!out) throw std::runtime_error("cannot write report: " + (dir / "report.json").string());
        out << report_to_json(report, true);
    }
    if (!report.curve.empty()) {
        std::ofstream out(dir / "curve.csv");
        if (!out) throw std::runtime_error("cannot write curve: " + (dir / "curve.csv").string());
        out.precision(17);
        out << "repetition,parameter,eval_objective,entropy_u,entropy_v\n";
        for (const auto& pt : report.curve)
            out << pt.repetition << ',' << pt.parameter << ',' << pt.eval_objective << ','
                << pt.entropy_u << ',' << pt.entropy_v << '\n';
    }
}

}  // namespace crcca
