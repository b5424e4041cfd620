#include <stdexcept>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "sgdlab/config.hpp"

using namespace sgdlab;

TEST_CASE("defaults from an empty document") {
    const auto cfg = parse_config("");
    CHECK(cfg == ExperimentConfig{});
    CHECK(cfg.level_values() == std::vector<double>{0.0});
    CHECK(cfg.level_name() == "none");
}

TEST_CASE("full document") {
    const auto cfg = parse_config(R"(
[objective]
name = "piecewise"
dim = 1

[oracle]
kind = "additive-gaussian"
b = 10
sigma = 5.0
eps_exp = 0.2
levels = [10, 100.0]

[schedule]
rule = "constant"
alpha = 0.01
channel = "paper"

[run]
x0 = [-0.5, 1, 12.566380614359172]
seeds = 7
k_max = 5000
seed = 99
record_stride = 10
gamma = 0.9
n_draws = 2000
out = "somewhere"
)");
    CHECK(cfg.kind == NoiseKind::additive_gaussian);
    CHECK(cfg.b == 10.0);
    CHECK(cfg.eps_exp == 0.2);
    CHECK(cfg.levels == std::vector<double>{10.0, 100.0});
    CHECK(cfg.level_name() == "sigma");
    CHECK(cfg.rule == StepRule::constant);
    CHECK(cfg.channel == BoundsChannel::paper);
    REQUIRE(cfg.x0.size() == 3);
    CHECK(cfg.x0[1] == Point{1.0});
    CHECK(cfg.seeds == 7);
    CHECK(cfg.seed == 99);
    CHECK(cfg.out == "somewhere");
}

TEST_CASE("round trip") {
    ExperimentConfig cfg;
    cfg.kind = NoiseKind::value_dependent;
    cfg.sigma = 0.1 + 0.2;
    cfg.levels = {10.0, 100.0, 1.0 / 3.0};
    cfg.rule = StepRule::power;
    cfg.alpha = 0.07;
    cfg.decay = 0.6;
    cfg.x0 = {{-0.5}, {4 * std::numbers::pi + 1e-5}};
    cfg.seeds = 3;
    cfg.k_max = 123;
    cfg.seed = 0xffffffffffffull;
    cfg.gamma = 0.95;
    cfg.out = "a \"quoted\" \\ path";
    CHECK(parse_config(to_toml(cfg)) == cfg);

    ExperimentConfig q;
    q.objective = "quadratic";
    q.dim = 2;
    q.x0 = {{1.0, 2.0}, {-3.0, 0.5}};
    CHECK(parse_config(to_toml(q)) == q);
    CHECK(parse_config(to_toml(ExperimentConfig{})) == ExperimentConfig{});
}

TEST_CASE("rejections carry key and line") {
    auto message = [](const char* text) -> std::string {
        try {
            parse_config(text, "cfg.toml");
        } catch (const ConfigError& e) {
            return e.what();
        }
        return "";
    };
    CHECK(message("[run]\nseeds = 3\nbogus = 1\n") == "cfg.toml:3: unknown key 'run.bogus'");
    CHECK(message("[extra]\n") .find("unknown section 'extra'") != std::string::npos);
    CHECK(message("[oracle]\nkind = \"gaussian\"\n").find("cfg.toml:2") == 0);
    CHECK(message("[run]\nseeds = \"many\"\n").find("'run.seeds' must be an integer") != std::string::npos);
    CHECK(message("[run]\nseeds = 1.5\n").find("'run.seeds' must be an integer") != std::string::npos);
    CHECK(message("[run]\nx0 = []\n").find("run.x0") != std::string::npos);
    CHECK(message("[run]\nx0 = [[1.0, 2.0]]\n").find("objective.dim") != std::string::npos);
    CHECK(message("[run]\ngamma = 1.0\n").find("gamma") != std::string::npos);
    CHECK(message("[run]\nk_max = -5\n").find("non-negative") != std::string::npos);
    CHECK(message("[run\n").find("cfg.toml:1") == 0);
    CHECK_THROWS_AS(load_config("/nonexistent/cfg.toml"), ConfigError);
}

TEST_CASE("builders") {
    ExperimentConfig cfg;
    cfg.kind = NoiseKind::multiplicative;
    cfg.levels = {10.0, 1000.0};
    const Objective f = make_objective(cfg);
    const NoiseOracle o = make_oracle(cfg, 1000.0, f.beta());
    CHECK(o.b == 1000.0);
    CHECK(o.alpha_ref == doctest::Approx(5e-4));
    const StepSchedule s = make_schedule(cfg, o, f.beta(), BoundsChannel::derived);
    CHECK(s.stepsize(0) == doctest::Approx(5e-4));
    CHECK(s.bounds.b(0) == doctest::Approx(1000.0 + 2.0 / 3.0));
    CHECK(make_schedule(cfg, o, f.beta(), BoundsChannel::paper).bounds.b(0) == 1000.0);

    cfg.kind = NoiseKind::value_dependent;
    const NoiseOracle v = make_oracle(cfg, 100.0, f.beta());
    CHECK(v.sigma == 100.0);
    CHECK(v.b == 10.0);
    CHECK(v.alpha_ref == doctest::Approx(0.05));

    cfg.rule = StepRule::power;
    cfg.alpha = 0.2;
    cfg.decay = 0.5;
    CHECK(make_schedule(cfg, v, 2.0, BoundsChannel::derived).stepsize(3) == doctest::Approx(0.1));

    const RunConfig rc = make_run_config(cfg, Point{3.0}, 17);
    CHECK(rc.x0 == Point{3.0});
    CHECK(rc.seed == 17);
    CHECK(rc.k_max == cfg.k_max);
}
