#include "sgdlab/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "sgdlab/rng.hpp"

namespace sgdlab {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

double squared_norm(std::span<const double> v) noexcept {
    double s = 0.0;
    for (double c : v) s += c * c;
    return s;
}

double norm(std::span<const double> v) noexcept {
    if (v.size() == 1) return std::abs(v[0]);
    return std::sqrt(squared_norm(v));
}

std::string_view to_string(CriticalKind kind) noexcept {
    switch (kind) {
        case CriticalKind::saddle: return "saddle";
        case CriticalKind::local_max: return "local-max";
        case CriticalKind::local_min: return "local-min";
        case CriticalKind::global_min: return "global-min";
    }
    return "unknown";
}

std::optional<CriticalKind> parse_critical_kind(std::string_view text) noexcept {
    for (auto kind : {CriticalKind::saddle, CriticalKind::local_max, CriticalKind::local_min, CriticalKind::global_min}) {
        if (to_string(kind) == text) return kind;
    }
    return std::nullopt;
}

double CriticalComponent::distance_to(std::span<const double> x) const {
    if (x.size() != lo.size()) throw std::invalid_argument("CriticalComponent: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = std::max({lo[i] - x[i], 0.0, x[i] - hi[i]});
        s += d * d;
    }
    return std::sqrt(s);
}

Objective::Objective(std::string name, std::size_t dim, double beta, double f_min, double coercive_radius,
                     std::vector<CriticalComponent> catalog, ValueFn value, GradientFn gradient)
    : name_(std::move(name)),
      dim_(dim),
      beta_(beta),
      f_min_(f_min),
      coercive_radius_(coercive_radius),
      catalog_(std::move(catalog)),
      value_(std::move(value)),
      gradient_(std::move(gradient)) {
    if (dim_ == 0) throw std::invalid_argument("Objective: dimension must be positive");
    if (!(beta_ > 0.0)) throw std::invalid_argument("Objective: beta must be positive");
    if (!value_ || !gradient_) throw std::invalid_argument("Objective: value and gradient are required");
    for (const auto& c : catalog_) {
        if (c.lo.size() != dim_ || c.hi.size() != dim_)
            throw std::invalid_argument("Objective: catalog component has wrong dimension");
        for (std::size_t i = 0; i < dim_; ++i) {
            if (c.lo[i] > c.hi[i]) throw std::invalid_argument("Objective: catalog component with lo > hi");
        }
    }
}

void Objective::check_input(std::span<const double> x) const {
    if (x.size() != dim_) throw std::invalid_argument("Objective: dimension mismatch");
    for (double c : x) {
        if (!std::isfinite(c)) throw std::domain_error("Objective: non-finite input");
    }
}

double Objective::evaluate(std::span<const double> x) const {
    check_input(x);
    return value_(x);
}

void Objective::gradient(std::span<const double> x, std::span<double> out) const {
    check_input(x);
    if (out.size() != dim_) throw std::invalid_argument("Objective: gradient buffer has wrong dimension");
    gradient_(x, out);
}

Point Objective::gradient(std::span<const double> x) const {
    Point g(dim_);
    gradient(x, g);
    return g;
}

std::optional<std::size_t> Objective::classify_point(std::span<const double> x, double tol_dist) const {
    if (!(tol_dist > 0.0)) throw std::invalid_argument("classify_point: tol_dist must be positive");
    std::optional<std::size_t> best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < catalog_.size(); ++i) {
        const double d = catalog_[i].distance_to(x);
        if (d <= tol_dist && d < best_dist) {
            best = i;
            best_dist = d;
        }
    }
    return best;
}

double piecewise_value(double x) noexcept {
    if (x < 0.0) return x * x + 1.0;
    if (x < kPi) return std::cos(x);
    if (x < 3.0 * kPi) return -1.0;
    if (x < 4.0 * kPi) return 0.5 * (std::cos(x) - 1.0);
    if (x < 5.0 * kPi) return (std::cos(x) - 1.0) / 3.0;
    // Expanded form x^2 - 10 pi x + 25 pi^2 - 2/3 cancels catastrophically near 5 pi.
    const double d = x - 5.0 * kPi;
    return d * d - 2.0 / 3.0;
}

// At a breakpoint the right-hand branch is used; the one-sided derivatives agree.
double piecewise_derivative(double x) noexcept {
    if (x < 0.0) return 2.0 * x;
    if (x < kPi) return -std::sin(x);
    if (x < 3.0 * kPi) return 0.0;
    if (x < 4.0 * kPi) return -0.5 * std::sin(x);
    if (x < 5.0 * kPi) return -std::sin(x) / 3.0;
    return 2.0 * (x - 5.0 * kPi);
}

Objective make_piecewise_function() {
    std::vector<CriticalComponent> catalog{
        {{0.0}, {0.0}, CriticalKind::saddle, 1.0},
        {{kPi}, {3.0 * kPi}, CriticalKind::global_min, -1.0},
        {{4.0 * kPi}, {4.0 * kPi}, CriticalKind::local_max, 0.0},
        {{5.0 * kPi}, {5.0 * kPi}, CriticalKind::local_min, -2.0 / 3.0},
    };
    return Objective(
        "piecewise", 1, 2.0, -1.0, 5.0 * kPi, std::move(catalog),
        [](std::span<const double> x) { return piecewise_value(x[0]); },
        [](std::span<const double> x, std::span<double> g) { g[0] = piecewise_derivative(x[0]); });
}

Objective make_quadratic(std::size_t dim) {
    std::vector<CriticalComponent> catalog{{Point(dim, 0.0), Point(dim, 0.0), CriticalKind::global_min, 0.0}};
    return Objective(
        "quadratic", dim, 2.0, 0.0, 0.0, std::move(catalog),
        [](std::span<const double> x) { return squared_norm(x); },
        [](std::span<const double> x, std::span<double> g) {
            for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2.0 * x[i];
        });
}

SmoothnessReport check_smoothness(const Objective& f, Interval domain, std::size_t n_samples, std::uint64_t seed,
                                  double fd_step, double fd_tolerance) {
    if (!(domain.hi > domain.lo)) throw std::domain_error("check_smoothness: empty domain");
    if (n_samples < 2) throw std::invalid_argument("check_smoothness: need at least two samples");

    const std::size_t n = f.dim();
    SmoothnessReport rep;
    rep.beta = f.beta();
    rep.fd_tolerance = fd_tolerance;

    Point x(n), y(n), gx(n), gy(n), probe(n);
    for (std::size_t i = 0; i < n_samples; ++i) {
        NoiseStream rng(seed, 0, i);
        for (std::size_t j = 0; j < n; ++j) {
            x[j] = rng.uniform(domain.lo, domain.hi);
            y[j] = rng.uniform(domain.lo, domain.hi);
        }
        f.gradient(x, gx);
        f.gradient(y, gy);

        double dg = 0.0;
        double dx = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            dg += (gx[j] - gy[j]) * (gx[j] - gy[j]);
            dx += (x[j] - y[j]) * (x[j] - y[j]);
        }
        if (dx > 0.0) {
            rep.lipschitz_ratio = std::max(rep.lipschitz_ratio, std::sqrt(dg / dx));
            ++rep.n_pairs;
        }

        for (std::size_t j = 0; j < n; ++j) {
            probe = x;
            probe[j] = x[j] + fd_step;
            const double up = f.evaluate(probe);
            probe[j] = x[j] - fd_step;
            const double down = f.evaluate(probe);
            rep.fd_error = std::max(rep.fd_error, std::abs((up - down) / (2.0 * fd_step) - gx[j]));
        }
    }
    rep.passed = rep.lipschitz_ratio <= rep.beta + 1e-9 && rep.fd_error <= fd_tolerance;
    return rep;
}

}  // namespace sgdlab
