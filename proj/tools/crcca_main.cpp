#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crcca/ace.hpp"
#include "crcca/crcca.hpp"
#include "crcca/experiment.hpp"
#include "crcca/linalg.hpp"
#include "crcca/linear_cca.hpp"
#include "crcca/model_io.hpp"
#include "crcca/rd_solver.hpp"
#include "crcca/synthgen.hpp"
#include "json.hpp"

namespace {

using crcca::Matrix;
using crcca::Vector;
using nlohmann::json;

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Flags shared by `fit` and `sweep`; a --config file provides the base
// values and explicitly passed flags override it.
struct FitFlags {
    std::string config_path;
    std::string x_csv, y_csv;
    bool header = false;
    std::int64_t synth_n = 0;
    std::string method = "crcca";
    std::vector<int> levels;
    std::vector<int> k_list;
    int dims = 2;
    int iters = 100;
    double tol = 1e-5;
    double ridge = 0.0;
    double train_frac = 0.7, eval_frac = 0.15, test_frac = 0.15;
    int reps = 1;
    std::uint64_t seed = 0;
    std::string out_dir;
    int threads = 0;
    std::string save_model_path;
};

void add_fit_flags(CLI::App* cmd, FitFlags& f, bool with_method) {
    cmd->add_option("--config", f.config_path, "experiment config JSON; other flags override it");
    cmd->add_option("--x", f.x_csv, "X view CSV");
    cmd->add_option("--y", f.y_csv, "Y view CSV");
    cmd->add_flag("--header", f.header, "CSVs start with a header row");
    cmd->add_option("--synth-n", f.synth_n, "generate this many synthetic pairs instead of reading CSVs");
    if (with_method)
        cmd->add_option("--method", f.method, "linear | ace | crcca")->default_str("crcca");
    cmd->add_option("--levels", f.levels, "quantization levels per axis (list sweeps, best by eval)");
    cmd->add_option("--k", f.k_list, "ace neighborhood sizes (list sweeps, best by eval)");
    cmd->add_option("--dims", f.dims, "output dimension");
    cmd->add_option("--iters", f.iters, "iteration cap");
    cmd->add_option("--tol", f.tol, "relative objective tolerance");
    cmd->add_option("--ridge", f.ridge, "covariance ridge");
    cmd->add_option("--train-frac", f.train_frac, "train fraction");
    cmd->add_option("--eval-frac", f.eval_frac, "evaluation fraction");
    cmd->add_option("--test-frac", f.test_frac, "test fraction");
    cmd->add_option("--reps", f.reps, "repetitions (split seed advances by 1 each)");
    cmd->add_option("--seed", f.seed, "base seed");
    cmd->add_option("--out", f.out_dir, "directory for report.json / curve.csv");
    cmd->add_option("--threads", f.threads, "worker threads (0: CRCCA_THREADS env var)");
}

crcca::ExperimentConfig build_config(const CLI::App* cmd, const FitFlags& f) {
    crcca::ExperimentConfig cfg;
    if (!f.config_path.empty())
        cfg = crcca::experiment_config_from_json(read_text(f.config_path));
    const auto given = [&](const std::string& name) { return cmd->count(name) > 0; };
    if (given("--x")) cfg.x_csv = f.x_csv;
    if (given("--y")) cfg.y_csv = f.y_csv;
    if (given("--header")) cfg.csv_header = f.header;
    if (given("--synth-n")) cfg.synth_n = f.synth_n;
    if (cmd->get_option_no_throw("--method") && given("--method")) cfg.method = f.method;
    if (given("--levels")) cfg.levels = f.levels;
    if (given("--k")) cfg.k_list = f.k_list;
    if (given("--dims")) cfg.dim = f.dims;
    if (given("--iters")) cfg.max_iters = f.iters;
    if (given("--tol")) cfg.tol = f.tol;
    if (given("--ridge")) cfg.ridge = f.ridge;
    if (given("--train-frac")) cfg.split.train_fraction = f.train_frac;
    if (given("--eval-frac")) cfg.split.eval_fraction = f.eval_frac;
    if (given("--test-frac")) cfg.split.test_fraction = f.test_frac;
    if (given("--reps")) cfg.repetitions = f.reps;
    if (given("--seed")) cfg.seed = f.seed;
    if (given("--out")) cfg.out_dir = f.out_dir;
    if (given("--threads")) cfg.threads = f.threads;
    return cfg;
}

void save_repetition_zero_model(const crcca::ExperimentConfig& cfg, const crcca::Report& report,
                                const std::string& path) {
    if (report.repetitions.empty() || !report.repetitions.front().ok)
        throw std::runtime_error("cannot save model: repetition 0 failed");
    const int selected = report.repetitions.front().selected_parameter;
    const crcca::PairedDataset data = crcca::load_experiment_data(cfg);
    crcca::SplitSpec spec = cfg.split;
    spec.seed = cfg.seed;
    const crcca::SplitResult parts = crcca::split(data, spec);
    if (cfg.method == "linear") {
        crcca::save_model(crcca::fit_linear_cca(parts.train, cfg.dim, cfg.ridge), path);
    } else if (cfg.method == "crcca") {
        crcca::CrccaConfig cc;
        cc.levels = selected;
        cc.dim = cfg.dim;
        cc.max_iters = cfg.max_iters;
        cc.tol = cfg.tol;
        cc.seed = spec.seed;
        cc.ridge = cfg.ridge;
        crcca::save_model(crcca::fit_crcca(parts.train, cc), path);
    } else {
        throw std::runtime_error("ace models hold their whole training set and are not persisted");
    }
}

int cmd_synth(std::int64_t n, std::uint64_t seed, const std::string& out_dir) {
    const crcca::SynthData synth = crcca::generate(n, seed);
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    crcca::write_csv((fs::path(out_dir) / "x.csv").string(), synth.data.x, synth.data.x_names);
    crcca::write_csv((fs::path(out_dir) / "y.csv").string(), synth.data.y, synth.data.y_names);
    Matrix q(static_cast<Eigen::Index>(synth.quadrant.size()), 1);
    for (Eigen::Index i = 0; i < q.rows(); ++i) q(i, 0) = synth.quadrant[static_cast<size_t>(i)];
    crcca::write_csv((fs::path(out_dir) / "quadrant.csv").string(), q, {"quadrant"});
    std::cout << "wrote " << n << " pairs to " << out_dir << "\n";
    return 0;
}

int cmd_fit(const CLI::App* cmd, const FitFlags& f, bool sweep_mode) {
    crcca::ExperimentConfig cfg = build_config(cmd, f);
    if (sweep_mode) {
        cfg.method = "crcca";
        if (cmd->count("--levels") == 0 && cfg.levels.size() < 2) cfg.levels = {5, 9, 13};
    }
    const crcca::Report report = crcca::run(cfg);
    if (!f.save_model_path.empty()) save_repetition_zero_model(cfg, report, f.save_model_path);
    std::cout << crcca::report_to_json(report, true);
    return report.failed_repetitions == 0 ? 0 : 1;
}

int cmd_eval(const std::string& model_path, const FitFlags& f) {
    crcca::PairedDataset data;
    if (f.synth_n > 0) {
        data = crcca::generate(f.synth_n, f.seed).data;
    } else {
        if (f.x_csv.empty() || f.y_csv.empty())
            throw std::runtime_error("eval needs --x and --y, or --synth-n");
        data.x = crcca::load_csv(f.x_csv, f.header, &data.x_names);
        data.y = crcca::load_csv(f.y_csv, f.header, &data.y_names);
        data.validate();
    }
    json out;
    out["model"] = model_path;
    out["rows"] = data.rows();
    const std::string kind = crcca::model_kind(model_path);
    out["kind"] = kind;
    if (kind == "linear_cca") {
        const crcca::LinearCcaModel model = crcca::load_linear_cca(model_path);
        const crcca::Projection p = crcca::project(model, data.x, data.y);
        out["objective"] = crcca::normalized_objective(p.u, p.v);
        const Vector corr = crcca::component_correlations(p.u, p.v);
        out["correlations"] = std::vector<double>(corr.data(), corr.data() + corr.size());
    } else if (kind == "crcca") {
        const crcca::CrccaModel model = crcca::load_crcca(model_path);
        const crcca::EvalReport ev = crcca::evaluate(model, data);
        out["objective"] = ev.objective;
        out["correlations"] =
            std::vector<double>(ev.correlations.data(), ev.correlations.data() + ev.correlations.size());
        out["distortion"] = ev.distortion;
        out["entropy_u"] = ev.entropy_u;
        out["entropy_v"] = ev.entropy_v;
    } else {
        throw std::runtime_error("unknown model kind \"" + kind + "\"");
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

struct RdFlags {
    std::string source_csv;
    std::string prior_csv;
    std::string repro_csv;
    int grid_count = 33;
    double distortion = 0.0;
    bool no_moments = false;
    double target_mean = 0.0;
    double target_second = 1.0;
    double window = 1e-4;
};

int cmd_rd_solve(const RdFlags& f) {
    const Matrix source = crcca::load_csv(f.source_csv, false);
    const Matrix prior_m = crcca::load_csv(f.prior_csv, false);
    if (prior_m.cols() != 1) throw std::runtime_error("prior CSV must have one column");
    if (prior_m.rows() != source.rows())
        throw std::runtime_error("prior and source row counts differ");
    const Vector prior = prior_m.col(0);
    const Matrix repro = f.repro_csv.empty()
                             ? crcca::default_repro_grid(source, prior, f.grid_count)
                             : crcca::load_csv(f.repro_csv, false);
    crcca::RdOptions opts;
    opts.constrain_moments = !f.no_moments;
    opts.target_mean = f.target_mean;
    opts.target_second_moment = f.target_second;
    opts.window = f.window;
    const crcca::RdResult res = crcca::solve_rd(source, prior, repro, f.distortion, opts);

    json out;
    out["eta"] = res.channel.eta;
    out["rate_bits"] = res.rate_bits;
    out["distortion"] = res.distortion;
    out["mean"] = std::vector<double>(res.mean.data(), res.mean.data() + res.mean.size());
    out["second_moment"] = std::vector<double>(res.second_moment.data(),
                                               res.second_moment.data() + res.second_moment.size());
    json trace = json::array();
    for (const auto& pt : res.eta_trace)
        trace.push_back({{"eta", pt.eta}, {"distortion", pt.distortion}, {"rate_bits", pt.rate_bits}});
    out["eta_trace"] = std::move(trace);
    std::vector<double> marginal(res.channel.marginal.data(),
                                 res.channel.marginal.data() + res.channel.marginal.size());
    out["marginal"] = std::move(marginal);
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rate-constrained nonlinear canonical correlation toolkit"};
    app.set_version_flag("--version", std::string("crcca ") + crcca::kToolVersion);
    app.require_subcommand(1);

    auto* synth = app.add_subcommand("synth", "generate the synthetic paired dataset");
    std::int64_t synth_n = 5000;
    std::uint64_t synth_seed = 0;
    std::string synth_out = ".";
    synth->add_option("--n", synth_n, "sample count")->required();
    synth->add_option("--seed", synth_seed, "seed");
    synth->add_option("--out", synth_out, "output directory");

    FitFlags fit_flags;
    auto* fit = app.add_subcommand("fit", "split, fit, and report an experiment");
    add_fit_flags(fit, fit_flags, true);
    fit->add_option("--save-model", fit_flags.save_model_path,
                    "save the repetition-0 selected model (linear and crcca)");

    FitFlags sweep_flags;
    auto* sweep = app.add_subcommand("sweep", "crcca level sweep (curve over --levels)");
    add_fit_flags(sweep, sweep_flags, false);

    FitFlags eval_flags;
    std::string eval_model;
    auto* eval = app.add_subcommand("eval", "evaluate a saved model on a dataset");
    eval->add_option("--model", eval_model, "model JSON path")->required();
    eval->add_option("--x", eval_flags.x_csv, "X view CSV");
    eval->add_option("--y", eval_flags.y_csv, "Y view CSV");
    eval->add_flag("--header", eval_flags.header, "CSVs start with a header row");
    eval->add_option("--synth-n", eval_flags.synth_n, "evaluate on generated synthetic pairs");
    eval->add_option("--seed", eval_flags.seed, "seed for --synth-n");

    RdFlags rd_flags;
    auto* rd = app.add_subcommand("rd-solve", "constrained rate-distortion solve");
    rd->add_option("--source", rd_flags.source_csv, "source support CSV (row per point)")->required();
    rd->add_option("--prior", rd_flags.prior_csv, "prior CSV (one column)")->required();
    rd->add_option("--repro", rd_flags.repro_csv, "reproduction support CSV (default: uniform grid)");
    rd->add_option("--grid-count", rd_flags.grid_count, "default grid size");
    rd->add_option("-D,--distortion", rd_flags.distortion, "distortion bound")->required();
    rd->add_flag("--no-moments", rd_flags.no_moments, "drop the mean/second-moment constraints");
    rd->add_option("--target-mean", rd_flags.target_mean, "mean constraint target");
    rd->add_option("--target-second", rd_flags.target_second, "second-moment constraint target");
    rd->add_option("--window", rd_flags.window, "accepted distortion slack below the bound");

    try {
        app.parse(argc, argv);
        if (synth->parsed()) return cmd_synth(synth_n, synth_seed, synth_out);
        if (fit->parsed()) return cmd_fit(fit, fit_flags, false);
        if (sweep->parsed()) return cmd_fit(sweep, sweep_flags, true);
        if (eval->parsed()) return cmd_eval(eval_model, eval_flags);
        if (rd->parsed()) return cmd_rd_solve(rd_flags);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
