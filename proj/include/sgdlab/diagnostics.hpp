#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sgdlab/engine.hpp"

namespace sgdlab {

enum class LimitLabel { saddle, local_max, local_min, global_min, none, non_convergence };

/// Whether F(x_k) > F_inf held along the run.
enum class AboveLimit { yes, yes_except_equality, no, undefined };

std::string_view to_string(LimitLabel label) noexcept;
std::string_view to_string(AboveLimit v) noexcept;
std::optional<LimitLabel> parse_limit_label(std::string_view text) noexcept;
std::optional<AboveLimit> parse_above_limit(std::string_view text) noexcept;
LimitLabel label_of(CriticalKind kind) noexcept;
bool is_minimizer(LimitLabel label) noexcept;

struct LimitClassification {
    LimitLabel label = LimitLabel::none;
    std::optional<std::size_t> component;  ///< catalog index when matched
    double distance = 0.0;                 ///< window mean to the matched component
    AboveLimit above_limit = AboveLimit::undefined;
    double f_inf = 0.0;                    ///< component value when matched, else final F
    double window_diameter = 0.0;
    double grad_norm = 0.0;                ///< at the window mean
};

inline constexpr double kDefaultTolDist = 1e-3;
inline constexpr double kDefaultTolGrad = 1e-4;

/// Classifies the limit from the dense terminal window. The above-limit verdict
/// compares the running minimum of F over every iterate with F_inf, taken as
/// the matched component's value (final F when nothing matches).
LimitClassification classify_limit(const TrajectoryRecord& rec, const Objective& f,
                                   double tol_dist = kDefaultTolDist, double tol_grad = kDefaultTolGrad);

struct ConditionalValue {
    double mean = 0.0;  ///< estimate of E_k[F(x_{k+1}) - F_min]
    double std_error = 0.0;
    std::size_t n_draws = 0;
};

/// Monte-Carlo average of F(x - alpha_k g) - F_min over fresh draws of the
/// oracle's k-th law (probe streams of seed).
ConditionalValue estimate_conditional_value(std::span<const double> x, std::uint64_t k, const Objective& f,
                                            const NoiseOracle& o, const StepSchedule& s, std::size_t n_draws,
                                            std::uint64_t seed);

enum class ProbeStatus { holds, exceeds, void_equal, above_limit_violation, rhs_zero_failure };
std::string_view to_string(ProbeStatus s) noexcept;

struct XiProbeResult {
    std::uint64_t k = 0;
    Point x_k;
    double f_k = 0.0;
    double e_cond = 0.0;
    double e_cond_stderr = 0.0;
    double lhs = 0.0;
    double rhs_unit = 0.0;
    double gamma_required = 0.0;  ///< lhs / rhs_unit; +inf when rhs_unit = 0 < lhs
    ProbeStatus status = ProbeStatus::holds;
};

struct XiProbeSummary {
    std::vector<XiProbeResult> probes;
    double gamma = 0.0;              ///< level the statuses were judged at
    double max_gamma_required = 0.0; ///< over probes that are not void
    bool any_void = false;
    bool consistent = false;         ///< no probe contradicts some gamma0 < 1
    std::optional<std::uint64_t> first_violation_k;
    std::string caveat;
};

/// Evaluates the Xi_{gamma,k} event at recorded iterates:
///   F_inf < F(x_k) and
///   |(F_inf - F_min) - 2/(2 + alpha_k^2 a_k beta) E_k[F(x_{k+1}) - F_min] + alpha_k^2 c_k beta / 2|
///       <= gamma (1 - alpha_k b_k beta / 2) ||grad F(x_k)||^2
/// using the (a_k, b_k, c_k) channel carried by s. Throws std::out_of_range
/// when a probe k was not recorded.
XiProbeSummary xi_probe(const TrajectoryRecord& rec, std::span<const std::uint64_t> probe_ks, const Objective& f,
                        const NoiseOracle& o, const StepSchedule& s, double f_inf, double gamma,
                        std::size_t n_draws, std::uint64_t seed);

struct DescentReport {
    double expected = 0.0;  ///< E_k[F(x_{k+1}) - F_min]
    double std_error = 0.0;
    double bound = 0.0;     ///< (1 + alpha^2 a beta/2)(F - F_min) - alpha (1 - alpha b beta/2)||grad||^2 + alpha^2 c beta/2
    double margin = 0.0;    ///< bound - expected
    bool passed = false;    ///< margin >= -3 standard errors
};

DescentReport check_conditional_descent(std::span<const double> x, std::uint64_t k, const Objective& f,
                                        const NoiseOracle& o, const StepSchedule& s, std::size_t n_draws,
                                        std::uint64_t seed);

class NoDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SampleSide { both, lower, upper };

struct ExponentSample {
    Point x;
    double gap = 0.0;  ///< |F(x) - component value|
    double grad_norm = 0.0;
    int side = 0;
};

struct ExponentFit {
    double theta = 0.0;  ///< slope of log ||grad F|| against log |F - F*|
    double r2 = 0.0;
    std::size_t n_used = 0;
    std::vector<ExponentSample> samples;
};

/// Fits ||grad F(x)|| ~ C_side |F(x) - F*|^theta near a catalog component.
/// Points lie at log-uniform distances in [radius * 1e-4, radius] outside the
/// component; in one dimension each side of the component gets its own
/// intercept. Throws NoDataError when fewer than three samples have a
/// positive gap (e.g. sampling inside a plateau).
ExponentFit estimate_lojasiewicz_exponent(const Objective& f, const CriticalComponent& component, double radius,
                                          std::size_t n_samples, std::uint64_t seed,
                                          SampleSide side = SampleSide::both);

}  // namespace sgdlab
