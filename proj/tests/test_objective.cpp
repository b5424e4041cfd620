#include <stdexcept>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "sgdlab/objective.hpp"

using namespace sgdlab;
using std::numbers::pi;

namespace {
double F(const Objective& f, double x) { return f.evaluate(Point{x}); }
double dF(const Objective& f, double x) { return f.gradient(Point{x})[0]; }
}  // namespace

TEST_CASE("piecewise values") {
    const Objective f = make_piecewise_function();
    CHECK(F(f, -1.0) == 2.0);
    CHECK(F(f, 2 * pi) == -1.0);
    CHECK(F(f, 5 * pi) == doctest::Approx(-2.0 / 3).epsilon(1e-15));
    CHECK(F(f, 0.0) == 1.0);
    CHECK(F(f, pi / 2) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(F(f, 4 * pi) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("piecewise gradient") {
    const Objective f = make_piecewise_function();
    CHECK(dF(f, -1.0) == -2.0);
    CHECK(dF(f, pi / 2) == doctest::Approx(-1.0));
    CHECK(dF(f, 2 * pi) == 0.0);
    for (double p : {0.0, pi, 3 * pi, 4 * pi, 5 * pi}) CHECK(std::abs(dF(f, p)) < 1e-10);
}

TEST_CASE("non-finite input is a domain error") {
    const Objective f = make_piecewise_function();
    CHECK_THROWS_AS(F(f, std::nan("")), std::domain_error);
    CHECK_THROWS_AS(dF(f, INFINITY), std::domain_error);
    CHECK_THROWS_AS(f.evaluate(Point{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("catalog") {
    const Objective f = make_piecewise_function();
    CHECK(f.beta() == 2.0);
    CHECK(f.f_min() == -1.0);
    const auto& cat = f.catalog();
    REQUIRE(cat.size() == 4);
    CHECK(cat[0].kind == CriticalKind::saddle);
    CHECK(cat[0].value == 1.0);
    CHECK(cat[1].kind == CriticalKind::global_min);
    CHECK(cat[1].lo[0] == doctest::Approx(pi));
    CHECK(cat[1].hi[0] == doctest::Approx(3 * pi));
    CHECK(cat[1].value == -1.0);
    CHECK(cat[2].kind == CriticalKind::local_max);
    CHECK(cat[2].value == 0.0);
    CHECK(cat[3].kind == CriticalKind::local_min);
    CHECK(cat[3].value == doctest::Approx(-2.0 / 3));
    for (const auto& c : cat) {
        CHECK(F(f, c.lo[0]) == doctest::Approx(c.value).epsilon(1e-14));
        CHECK(F(f, (c.lo[0] + c.hi[0]) / 2) == doctest::Approx(c.value).epsilon(1e-14));
        CHECK(std::abs(dF(f, c.hi[0])) < 1e-10);
    }
    for (std::size_t i = 0; i + 1 < cat.size(); ++i) CHECK(cat[i].hi[0] < cat[i + 1].lo[0]);
}

TEST_CASE("classify_point") {
    const Objective f = make_piecewise_function();
    auto kind_at = [&](double x, double tol) -> std::optional<CriticalKind> {
        const auto i = f.classify_point(Point{x}, tol);
        if (!i) return std::nullopt;
        return f.catalog()[*i].kind;
    };
    CHECK(kind_at(0.0, 1e-3) == CriticalKind::saddle);
    CHECK(kind_at(4 * pi, 1e-3) == CriticalKind::local_max);
    CHECK(kind_at(2 * pi, 1e-3) == CriticalKind::global_min);
    CHECK(kind_at(5 * pi + 0.5, 1e-3) == std::nullopt);
    CHECK(kind_at(pi - 5e-4, 1e-3) == CriticalKind::global_min);
    CHECK_THROWS_AS(f.classify_point(Point{0.0}, 0.0), std::invalid_argument);

    // Same label over the plateau interior; classifying a component point again gives the same component.
    for (double x = pi; x <= 3 * pi; x += 0.01) CHECK(kind_at(x, 1e-3) == CriticalKind::global_min);
    for (std::size_t i = 0; i < f.catalog().size(); ++i) {
        const auto& c = f.catalog()[i];
        CHECK(f.classify_point(c.lo, 1e-3) == i);
        CHECK(f.classify_point(c.hi, 1e-3) == i);
    }
}

TEST_CASE("continuity at breakpoints") {
    const Objective f = make_piecewise_function();
    for (double p : {0.0, pi, 3 * pi, 4 * pi, 5 * pi}) {
        CHECK(std::abs(F(f, p - 1e-8) - F(f, p + 1e-8)) < 1e-7);
        CHECK(std::abs(dF(f, p - 1e-8) - dF(f, p + 1e-8)) < 1e-7);
    }
}

TEST_CASE("finite differences match the gradient") {
    const Objective f = make_piecewise_function();
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-2.0, 20.0);
    const double breaks[] = {0.0, pi, 3 * pi, 4 * pi, 5 * pi};
    int checked = 0;
    while (checked < 1000) {
        const double x = u(gen);
        bool near = false;
        for (double p : breaks) near = near || std::abs(x - p) <= 1e-3;
        if (near) continue;
        const double h = 1e-6;
        const double fd = (F(f, x + h) - F(f, x - h)) / (2 * h);
        CHECK(std::abs(fd - dF(f, x)) < 1e-4);
        ++checked;
    }
}

TEST_CASE("catalog completeness on a grid") {
    const Objective f = make_piecewise_function();
    for (long i = 0; i <= 22000; ++i) {
        const double x = -2.0 + i * 1e-3;
        if (std::abs(dF(f, x)) >= 1e-6) continue;
        bool covered = false;
        for (const auto& c : f.catalog()) covered = covered || c.distance_to(Point{x}) <= 2e-3;
        CHECK_MESSAGE(covered, "uncatalogued stationary point near " << x);
    }
}

TEST_CASE("lower bound and coercivity") {
    const Objective f = make_piecewise_function();
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < 10000; ++i) CHECK(F(f, u(gen)) >= f.f_min());
    const double r = f.coercive_radius();
    for (double t = r + 0.01; t < r + 30; t += 0.5) {
        CHECK(F(f, t + 0.25) > F(f, t));
        CHECK(F(f, -t - 0.25) > F(f, -t));
    }
}

TEST_CASE("check_smoothness") {
    const Objective f = make_piecewise_function();
    const auto rep = check_smoothness(f, {-2.0, 20.0}, 10000, 5);
    CHECK(rep.lipschitz_ratio <= 2.0 + 1e-9);
    CHECK(rep.lipschitz_ratio > 1.9);
    CHECK(rep.passed);

    const Objective q = make_quadratic(1);
    CHECK(check_smoothness(q, {-3.0, 3.0}, 1000, 1).lipschitz_ratio == doctest::Approx(2.0).epsilon(1e-9));

    const Objective flat("flat", 1, 1.0, 0.0, 0.0, {}, [](std::span<const double>) { return 0.0; },
                         [](std::span<const double>, std::span<double> g) { g[0] = 0.0; });
    CHECK(check_smoothness(flat, {-1.0, 1.0}, 100, 1).lipschitz_ratio == 0.0);

    CHECK_THROWS_AS(check_smoothness(f, {1.0, 1.0}, 100, 1), std::domain_error);
    CHECK_THROWS_AS(check_smoothness(f, {2.0, 1.0}, 100, 1), std::domain_error);
    CHECK_THROWS_AS(check_smoothness(f, {0.0, 1.0}, 1, 1), std::invalid_argument);
}

TEST_CASE("quadratic in several dimensions") {
    const Objective q = make_quadratic(3);
    const Point x{1.0, -2.0, 0.5};
    CHECK(q.evaluate(x) == doctest::Approx(5.25));
    const Point g = q.gradient(x);
    CHECK(g == Point{2.0, -4.0, 1.0});
    CHECK(q.classify_point(Point{0.0, 0.0, 1e-4}, 1e-3) == std::optional<std::size_t>(0));
}
