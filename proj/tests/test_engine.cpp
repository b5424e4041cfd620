#include <stdexcept>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "doctest.h"
#include "sgdlab/engine.hpp"

using namespace sgdlab;
using std::numbers::pi;

namespace {
NoiseOracle oracle(NoiseKind kind, double b = 10.0, double sigma = 0.0) {
    NoiseOracle o;
    o.kind = kind;
    o.b = b;
    o.sigma = sigma;
    o.alpha_ref = inverse_b_beta_step(b, 2.0);
    return o;
}

StepSchedule schedule_for(const NoiseOracle& o, double alpha) { return {{alpha, 0.0}, derived_bounds(o), 2.0}; }

bool same(const Trace& a, const Trace& b) { return a.k == b.k && a.x == b.x && a.f == b.f && a.grad_norm == b.grad_norm; }

bool same(const TrajectoryRecord& a, const TrajectoryRecord& b) {
    return a.seed == b.seed && same(a.history, b.history) && same(a.terminal, b.terminal) && a.final_x == b.final_x &&
           a.final_f == b.final_f && a.min_f == b.min_f && a.numeric_failure == b.numeric_failure;
}
}  // namespace

TEST_CASE("exact descent from 1") {
    const Objective f = make_piecewise_function();
    const auto o = oracle(NoiseKind::exact);
    RunConfig cfg;
    cfg.x0 = {1.0};
    cfg.k_max = 10000;
    const auto rec = run_trajectory(cfg, f, o, schedule_for(o, 0.05));
    CHECK(rec.final_x[0] >= pi - 1e-12);
    CHECK(rec.final_x[0] <= 3 * pi);
    const Trace t = rec.merged();
    CHECK(t.k.front() == 0);
    CHECK(t.k.back() == 10000);
    CHECK(t.x.front() == 1.0);
    for (std::size_t i = 1; i < t.size(); ++i) CHECK(t.f[i] <= t.f[i - 1]);
    // Stored values are recomputed from the iterates.
    for (std::size_t i = 0; i < t.size(); i += 97) {
        CHECK(t.f[i] == f.evaluate(t.x_at(i)));
        CHECK(t.grad_norm[i] == std::abs(f.gradient(t.x_at(i))[0]));
    }
}

TEST_CASE("plateau absorption under multiplicative noise") {
    const Objective f = make_piecewise_function();
    const auto o = oracle(NoiseKind::multiplicative);
    RunConfig cfg;
    cfg.x0 = {2 * pi};
    cfg.k_max = 20000;
    const auto rec = run_trajectory(cfg, f, o, schedule_for(o, 0.05));
    for (double x : rec.merged().x) CHECK(x == 2 * pi);
}

TEST_CASE("multiplicative noise keeps the sign near the saddle") {
    const Objective f = make_piecewise_function();
    const auto o = oracle(NoiseKind::multiplicative, 10.0);
    RunConfig cfg;
    cfg.x0 = {-0.5};
    cfg.seed = 4;
    const auto rec = run_trajectory(cfg, f, o, schedule_for(o, 0.05));
    // Contraction eventually underflows to zero; the sign never flips.
    for (double x : rec.merged().x) CHECK(x <= 0.0);
    CHECK(rec.merged().x[100] < 0.0);
    CHECK(std::abs(rec.final_x[0]) < 1e-3);
}

TEST_CASE("storage layout") {
    const Objective f = make_piecewise_function();
    const auto o = oracle(NoiseKind::additive_gaussian, 10.0, 1.0);
    RunConfig cfg;
    cfg.x0 = {-0.5};
    cfg.k_max = 30000;
    cfg.dense_prefix = 100;
    cfg.record_stride = 50;
    cfg.terminal_window = 200;
    const auto rec = run_trajectory(cfg, f, o, schedule_for(o, 0.05));
    CHECK(rec.history.k.front() == 0);
    CHECK(rec.history.k.back() == 30000);
    CHECK(rec.history.find(99));
    CHECK_FALSE(rec.history.find(101));
    CHECK(rec.history.find(150));
    CHECK(rec.terminal.size() == 200);
    CHECK(rec.terminal.k.back() == 30000);
    CHECK(rec.terminal.k.front() == 29801);
    const Trace m = rec.merged();
    for (std::size_t i = 1; i < m.size(); ++i) CHECK(m.k[i] > m.k[i - 1]);
    CHECK(m.find(29850));
    CHECK(rec.final_x[0] == m.x.back());
}

TEST_CASE("determinism") {
    const Objective f = make_piecewise_function();
    const auto o = oracle(NoiseKind::value_dependent, 10.0, 10.0);
    RunConfig cfg;
    cfg.x0 = {1.0};
    cfg.k_max = 20000;
    cfg.seed = 42;
    const auto s = schedule_for(o, 0.05);
    CHECK(same(run_trajectory(cfg, f, o, s), run_trajectory(cfg, f, o, s)));

    const auto seq = run_ensemble(cfg, f, o, s, 5, 1);
    const auto par = run_ensemble(cfg, f, o, s, 5, 3);
    REQUIRE(seq.size() == 5);
    REQUIRE(par.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(seq[i].seed == 42 + i);
        CHECK(same(seq[i], par[i]));
    }
    CHECK_FALSE(same(seq[0], seq[1]));
}

TEST_CASE("exact ensemble is seed independent") {
    const Objective f = make_piecewise_function();
    const auto o = oracle(NoiseKind::exact);
    RunConfig cfg;
    cfg.x0 = {-0.5};
    cfg.k_max = 1000;
    const auto runs = run_ensemble(cfg, f, o, schedule_for(o, 0.05), 4, 2);
    for (const auto& r : runs) CHECK(r.final_x == runs[0].final_x);
}

TEST_CASE("condition ii gate and numeric failure") {
    const Objective q = make_quadratic(1);
    const auto o = oracle(NoiseKind::exact);
    RunConfig cfg;
    cfg.x0 = {1.0};
    cfg.k_max = 1000;
    const auto s = schedule_for(o, 10.0);
    CHECK_THROWS_AS(run_trajectory(cfg, q, o, s), AssumptionError);
    cfg.force = true;
    const auto rec = run_trajectory(cfg, q, o, s);
    CHECK(rec.numeric_failure);
    CHECK(rec.failure_k > 0);
    CHECK(rec.failure_k < 1000);
    CHECK(std::isfinite(rec.final_x[0]));
    CHECK(rec.final_k == rec.failure_k - 1);
}

TEST_CASE("early stop") {
    const Objective f = make_piecewise_function();
    const auto o = oracle(NoiseKind::exact);
    RunConfig cfg;
    cfg.x0 = {2.0};
    cfg.stop_grad_tol = 1e-8;
    cfg.stop_window = 50;
    const auto rec = run_trajectory(cfg, f, o, schedule_for(o, 0.05));
    CHECK(rec.stopped_early);
    CHECK(rec.final_k < cfg.k_max);
    CHECK(rec.final_grad_norm < 1e-8);
}

TEST_CASE("run config validation") {
    RunConfig cfg;
    cfg.k_max = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.k_max = 10;
    cfg.record_stride = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("worker count from the environment") {
    ::setenv("SGDLAB_THREADS", "3", 1);
    CHECK(default_worker_count() == 3);
    ::setenv("SGDLAB_THREADS", "0", 1);
    CHECK(default_worker_count() >= 1);
    ::unsetenv("SGDLAB_THREADS");
    CHECK(default_worker_count() >= 1);
}

TEST_CASE("several dimensions") {
    const Objective q = make_quadratic(2);
    const auto o = oracle(NoiseKind::additive_gaussian, 10.0, 1.0);
    RunConfig cfg;
    cfg.x0 = {1.0, -2.0};
    cfg.k_max = 50000;
    const auto rec = run_trajectory(cfg, q, o, schedule_for(o, 0.05));
    CHECK(rec.history.dim == 2);
    CHECK(norm(rec.final_x) < 1e-3);
}
