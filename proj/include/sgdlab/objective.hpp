#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sgdlab {

using Point = std::vector<double>;

double squared_norm(std::span<const double> v) noexcept;
double norm(std::span<const double> v) noexcept;

enum class CriticalKind { saddle, local_max, local_min, global_min };

std::string_view to_string(CriticalKind kind) noexcept;
std::optional<CriticalKind> parse_critical_kind(std::string_view text) noexcept;

/// A connected piece of the critical set: an axis-aligned box [lo, hi]
/// (a point when lo == hi) on which F is constant.
struct CriticalComponent {
    Point lo;
    Point hi;
    CriticalKind kind = CriticalKind::saddle;
    double value = 0.0;

    bool is_point() const noexcept { return lo == hi; }
    double distance_to(std::span<const double> x) const;
};

/// Smooth coercive objective with an analytic gradient, its smoothness
/// constant, its global minimum value and a declared critical-set catalog.
/// Immutable after construction.
class Objective {
public:
    using ValueFn = std::function<double(std::span<const double>)>;
    using GradientFn = std::function<void(std::span<const double>, std::span<double>)>;

    Objective(std::string name, std::size_t dim, double beta, double f_min, double coercive_radius,
              std::vector<CriticalComponent> catalog, ValueFn value, GradientFn gradient);

    const std::string& name() const noexcept { return name_; }
    std::size_t dim() const noexcept { return dim_; }
    double beta() const noexcept { return beta_; }
    double f_min() const noexcept { return f_min_; }
    /// F is strictly increasing along every ray beyond this distance from the origin.
    double coercive_radius() const noexcept { return coercive_radius_; }
    const std::vector<CriticalComponent>& catalog() const noexcept { return catalog_; }

    /// Throws std::domain_error on non-finite input or a dimension mismatch.
    double evaluate(std::span<const double> x) const;
    void gradient(std::span<const double> x, std::span<double> out) const;
    Point gradient(std::span<const double> x) const;

    // Unchecked variants for the engine's inner loop.
    double evaluate_unchecked(std::span<const double> x) const { return value_(x); }
    void gradient_unchecked(std::span<const double> x, std::span<double> out) const { gradient_(x, out); }

    /// Nearest catalog component within tol_dist of x, if any.
    std::optional<std::size_t> classify_point(std::span<const double> x, double tol_dist) const;

private:
    void check_input(std::span<const double> x) const;

    std::string name_;
    std::size_t dim_;
    double beta_;
    double f_min_;
    double coercive_radius_;
    std::vector<CriticalComponent> catalog_;
    ValueFn value_;
    GradientFn gradient_;
};

// Scalar piecewise test function:
//   x^2 + 1                 x < 0
//   cos x                   0 <= x < pi
//   -1                      pi <= x < 3pi
//   (cos x - 1) / 2         3pi <= x < 4pi
//   (cos x - 1) / 3         4pi <= x < 5pi
//   (x - 5pi)^2 - 2/3       x >= 5pi
// with beta = 2, F_min = -1.
double piecewise_value(double x) noexcept;
double piecewise_derivative(double x) noexcept;
Objective make_piecewise_function();

/// F(x) = ||x||^2 in the given dimension: beta = 2, single global minimizer at 0.
Objective make_quadratic(std::size_t dim = 1);

struct Interval {
    double lo;
    double hi;
};

struct SmoothnessReport {
    double lipschitz_ratio = 0.0;  ///< max |F'(x) - F'(y)| / |x - y| over sampled pairs
    double fd_error = 0.0;         ///< max |central difference - gradient| over sampled points
    double beta = 0.0;
    double fd_tolerance = 0.0;
    std::size_t n_pairs = 0;
    bool passed = false;
};

/// Empirical check of beta-Lipschitz continuity of the gradient on a box
/// (the interval is applied to every coordinate), plus a central-difference
/// check of the analytic gradient with step fd_step.
SmoothnessReport check_smoothness(const Objective& f, Interval domain, std::size_t n_samples, std::uint64_t seed,
                                  double fd_step = 1e-6, double fd_tolerance = 1e-4);

}  // namespace sgdlab
