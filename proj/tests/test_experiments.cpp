#include <stdexcept>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "sgdlab/experiments.hpp"

using namespace sgdlab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("sgdlab_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path write(const std::string& name, const std::string& text) const {
        std::ofstream(path / name) << text;
        return path / name;
    }
    static inline int counter = 0;
};

const char* kMultiplicative = R"(
[oracle]
kind = "multiplicative"
levels = [10.0]
[run]
x0 = [-0.5, 1.0]
seeds = 4
k_max = 20000
)";

const char* kExact = R"(
[oracle]
kind = "exact"
[schedule]
rule = "constant"
alpha = 0.05
[run]
x0 = [1.0]
k_max = 10000
n_draws = 1000
)";

CommandOptions options(const TempDir& dir, const fs::path& cfg) {
    CommandOptions opt;
    opt.config = cfg;
    opt.out = dir.path / "out";
    return opt;
}

}  // namespace

TEST_CASE("probe specs") {
    CHECK(parse_probe_spec("0:3") == std::vector<std::uint64_t>{0, 1, 2, 3});
    CHECK(parse_probe_spec("10:30:10") == std::vector<std::uint64_t>{10, 20, 30});
    CHECK(parse_probe_spec("5,7,100") == std::vector<std::uint64_t>{5, 7, 100});
    CHECK_THROWS_AS(parse_probe_spec("3:1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_probe_spec("a:b"), std::invalid_argument);
    CHECK_THROWS_AS(parse_probe_spec("1:5:0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_probe_spec("-1"), std::invalid_argument);
}

TEST_CASE("component ids") {
    const Objective f = make_piecewise_function();
    CHECK(resolve_component(f, "3") == 3);
    CHECK(resolve_component(f, "local-max") == 2);
    CHECK(resolve_component(f, "global-min") == 1);
    CHECK_THROWS_AS(resolve_component(f, "9"), MissingArtifact);
    CHECK_THROWS_AS(resolve_component(f, "bump"), MissingArtifact);
}

TEST_CASE("assumption checks over levels") {
    ExperimentConfig cfg = parse_config(kMultiplicative);
    cfg.levels = {10.0, 1000.0};
    const auto checks = check_assumptions(cfg, 10000);
    REQUIRE(checks.size() == 2);
    for (const auto& c : checks) {
        CHECK(c.derived.passed());
        CHECK(c.paper.passed());
        CHECK(c.derived.ratio->worst == 1.0);
    }
    CHECK(checks[1].alpha == doctest::Approx(5e-4));
}

TEST_CASE("check command exit codes") {
    TempDir dir;
    std::ostringstream os, err;
    CHECK(cmd_check(options(dir, dir.write("m.toml", kMultiplicative)), os, err) == exit_ok);
    CHECK(fs::exists(dir.path / "out" / "check.json"));
    const auto j = nlohmann::json::parse(read_text_file(dir.path / "out" / "check.json"));
    CHECK(j["passed"] == true);
    CHECK(j["master_seed"] == 1);

    const auto vd = dir.write("v.toml", "[oracle]\nkind = \"value-dependent\"\nsigma = 10.0\n");
    CHECK(cmd_check(options(dir, vd), os, err) == exit_assumption_failure);

    CHECK(cmd_check(options(dir, dir.write("bad.toml", "[run]\nseedz = 1\n")), os, err) == exit_config_error);
    CHECK(err.str().find("bad.toml:2") != std::string::npos);
    CHECK(cmd_check(options(dir, dir.path / "absent.toml"), os, err) == exit_io_error);
}

TEST_CASE("run, plot and xi") {
    TempDir dir;
    std::ostringstream os, err;
    auto opt = options(dir, dir.write("e.toml", kExact));
    REQUIRE(cmd_run(opt, os, err) == exit_ok);
    const fs::path out = dir.path / "out";
    CHECK(fs::exists(out / "run_1.csv"));
    CHECK(fs::exists(out / "run_1.svg"));
    const auto report = nlohmann::json::parse(read_text_file(out / "run_1.json"));
    CHECK(report["classification"]["label"] == "global-min");
    CHECK(report["master_seed"] == 1);
    CHECK(parse_config(report["config_toml"].get<std::string>()).k_max == 10000);

    fs::remove(out / "run_1.svg");
    CHECK(cmd_plot(opt, os, err) == exit_ok);
    CHECK(fs::exists(out / "run_1.svg"));

    REQUIRE(cmd_xi(opt, os, err) == exit_ok);
    const auto xi = nlohmann::json::parse(read_text_file(out / "run_1_xi.json"));
    CHECK(xi["probes"].size() == 51);
    for (const auto& p : xi["probes"]) CHECK(p["gamma_required"].is_number());
    CHECK(xi["caveat"].get<std::string>().size() > 0);

    opt.run_id = "nothing_here";
    CHECK(cmd_xi(opt, os, err) == exit_missing_artifact);
    CHECK(cmd_plot(opt, os, err) == exit_missing_artifact);
    opt.run_id.clear();
    opt.probes = "0:20000";
    CHECK(cmd_xi(opt, os, err) == exit_missing_artifact);
}

TEST_CASE("single-point trajectory on the plateau") {
    TempDir dir;
    std::ostringstream os, err;
    auto opt = options(dir, dir.write("e.toml", kExact));
    opt.x0 = 2 * 3.141592653589793;
    REQUIRE(cmd_run(opt, os, err) == exit_ok);
    std::istringstream csv(read_text_file(dir.path / "out" / "run_1.csv"));
    const auto t = read_trajectory_csv(csv).trace;
    for (double x : t.x) CHECK(x == t.x.front());
}

TEST_CASE("run refuses failing schedules unless forced") {
    TempDir dir;
    std::ostringstream os, err;
    auto opt = options(dir, dir.write("v.toml", "[oracle]\nkind = \"value-dependent\"\nsigma = 10.0\n[run]\nk_max = 1000\n"));
    CHECK(cmd_run(opt, os, err) == exit_assumption_failure);
    opt.force = true;
    CHECK(cmd_run(opt, os, err) == exit_ok);
}

TEST_CASE("unwritable output is an I/O error") {
    TempDir dir;
    std::ostringstream os, err;
    auto opt = options(dir, dir.write("e.toml", kExact));
    dir.write("blocker", "");
    opt.out = dir.path / "blocker" / "sub";
    CHECK(cmd_run(opt, os, err) == exit_io_error);
    CHECK(cmd_table(opt, os, err) == exit_io_error);
}

TEST_CASE("table command") {
    TempDir dir;
    std::ostringstream os, err;
    auto opt = options(dir, dir.write("m.toml", kMultiplicative));
    opt.workers = 2;
    REQUIRE(cmd_table(opt, os, err) == exit_ok);
    std::istringstream csv(read_text_file(dir.path / "out" / "table.csv"));
    const OutcomeTable back = read_table_csv(csv);
    const auto direct = run_table(parse_config(kMultiplicative), false, 1);
    CHECK(back == direct.table);
    REQUIRE(back.rows.size() == 2);
    for (const auto& r : back.rows) CHECK(r.n_seeds == 4);
    CHECK(read_text_file(dir.path / "out" / "table.csv").find("# master_seed = 1") != std::string::npos);
}

TEST_CASE("kl command") {
    TempDir dir;
    std::ostringstream os, err;
    auto opt = options(dir, dir.write("e.toml", kExact));
    opt.component = "3";
    REQUIRE(cmd_kl(opt, os, err) == exit_ok);
    const auto j = nlohmann::json::parse(read_text_file(dir.path / "out" / "kl_3.json"));
    CHECK(j["theta_hat"].get<double>() == doctest::Approx(0.5).epsilon(0.1));
    CHECK(fs::exists(dir.path / "out" / "kl_3.csv"));
    opt.component = "7";
    CHECK(cmd_kl(opt, os, err) == exit_missing_artifact);
}
