#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "json.hpp"

#include "crcca/dataset.hpp"

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const char* leaf) {
    auto dir = fs::temp_directory_path() / "crcca_cli_tests" / leaf;
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::string& args) {
    static int counter = 0;
    auto dir = temp_dir("io");
    auto out_path = dir / ("out" + std::to_string(counter) + ".txt");
    auto err_path = dir / ("err" + std::to_string(counter) + ".txt");
    ++counter;
    std::string cmd = std::string(CRCCA_CLI_PATH) + " " + args + " > " + out_path.string() +
                      " 2> " + err_path.string();
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

int count_lines(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) ++n;
    return n;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("version flag") {
    auto r = run_cli("--version");
    CHECK_EQ(r.exit_code, 0);
    CHECK(r.out.find("crcca 0.1.0") != std::string::npos);
}

TEST_CASE("synth writes the three csv files") {
    auto dir = temp_dir("synth");
    auto r = run_cli("synth --n 50 --seed 3 --out " + dir.string());
    CHECK_EQ(r.exit_code, 0);
    CHECK(r.out.find("50") != std::string::npos);
    CHECK_EQ(count_lines(dir / "x.csv"), 51);  // header + rows
    CHECK_EQ(count_lines(dir / "y.csv"), 51);
    CHECK_EQ(count_lines(dir / "quadrant.csv"), 51);
    // regenerating with the same seed is identical
    auto dir2 = temp_dir("synth2");
    run_cli("synth --n 50 --seed 3 --out " + dir2.string());
    CHECK_EQ(slurp(dir / "x.csv"), slurp(dir2 / "x.csv"));
    CHECK_EQ(slurp(dir / "y.csv"), slurp(dir2 / "y.csv"));
}

TEST_CASE("fit linear on synthetic data reports a full json") {
    auto r = run_cli("fit --method linear --synth-n 300 --reps 2 --seed 5");
    REQUIRE_EQ(r.exit_code, 0);
    json rep = json::parse(r.out);
    CHECK_EQ(rep["config"]["method"], "linear");
    CHECK_EQ(rep["repetitions"].size(), 2u);
    CHECK(rep["aggregate"]["mean_test_objective"].is_number());
    CHECK(rep.contains("timing"));
}

TEST_CASE("fit output is deterministic apart from timing") {
    const std::string args = "fit --method linear --synth-n 300 --reps 2 --seed 5";
    auto a = json::parse(run_cli(args).out);
    auto b = json::parse(run_cli(args).out);
    a.erase("timing");
    b.erase("timing");
    CHECK_EQ(a.dump(), b.dump());
}

TEST_CASE("config file plus flag overrides") {
    auto dir = temp_dir("config");
    auto cfg_path = dir / "cfg.json";
    std::ofstream(cfg_path) << R"({"method":"linear","synth_n":200,"repetitions":1,"seed":3})";
    auto r = run_cli("fit --config " + cfg_path.string() + " --reps 2");
    REQUIRE_EQ(r.exit_code, 0);
    json rep = json::parse(r.out);
    CHECK_EQ(rep["config"]["synth_n"], 200);
    CHECK_EQ(rep["config"]["repetitions"], 2);  // the flag wins
}

TEST_CASE("saved crcca model evaluates from the cli") {
    auto dir = temp_dir("model");
    auto model_path = dir / "model.json";
    auto r = run_cli("fit --method crcca --synth-n 400 --levels 4 --reps 1 --seed 6 "
                     "--save-model " + model_path.string());
    REQUIRE_EQ(r.exit_code, 0);
    REQUIRE(fs::exists(model_path));

    auto e = run_cli("eval --model " + model_path.string() + " --synth-n 200 --seed 9");
    REQUIRE_EQ(e.exit_code, 0);
    json rep = json::parse(e.out);
    CHECK(rep["objective"].is_number());
    CHECK(rep["distortion"].is_number());
    CHECK_EQ(rep["correlations"].size(), 2u);
}

TEST_CASE("ace models refuse persistence") {
    auto dir = temp_dir("ace_model");
    auto r = run_cli("fit --method ace --synth-n 200 --k 5 --reps 1 --save-model " +
                     (dir / "m.json").string());
    CHECK(r.exit_code != 0);
    CHECK(r.err.find("persisted") != std::string::npos);
}

TEST_CASE("sweep covers several level counts") {
    auto r = run_cli("sweep --synth-n 250 --levels 3 5 --reps 1 --seed 4");
    REQUIRE_EQ(r.exit_code, 0);
    json rep = json::parse(r.out);
    CHECK_EQ(rep["config"]["method"], "crcca");
    CHECK_EQ(rep["curve"].size(), 2u);
}

TEST_CASE("rd-solve reads csv supports and reports the solution") {
    auto dir = temp_dir("rd");
    {
        crcca::Matrix src(3, 1);
        src << -1, 0, 1;
        crcca::Matrix prior(3, 1);
        prior << 0.25, 0.5, 0.25;
        crcca::write_csv((dir / "source.csv").string(), src);
        crcca::write_csv((dir / "prior.csv").string(), prior);
    }
    auto r = run_cli("rd-solve --source " + (dir / "source.csv").string() + " --prior " +
                     (dir / "prior.csv").string() + " -D 0.9");
    REQUIRE_EQ(r.exit_code, 0);
    json rep = json::parse(r.out);
    CHECK(rep["rate_bits"].is_number());
    CHECK(rep["distortion"].get<double>() <= 0.9 + 1e-12);
    CHECK(rep["eta"].get<double>() > 0.0);
    CHECK_EQ(rep["mean"].size(), 1u);
}

TEST_CASE("errors reach stderr with a nonzero exit") {
    auto r = run_cli("fit --method bogus --synth-n 100");
    CHECK(r.exit_code != 0);
    CHECK(r.err.find("error") != std::string::npos);

    r = run_cli("fit --synth-n 100 --no-such-flag");
    CHECK(r.exit_code != 0);

    r = run_cli("fit --method linear");  // no data source at all
    CHECK(r.exit_code != 0);
    CHECK_FALSE(r.err.empty());

    r = run_cli("");  // a subcommand is required
    CHECK(r.exit_code != 0);
}

}  // TEST_SUITE
