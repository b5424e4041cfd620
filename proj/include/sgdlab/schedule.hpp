#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "sgdlab/noise.hpp"

namespace sgdlab {

/// coef / (k+1)^exponent; exponent 0 is a constant sequence.
struct PowerLaw {
    double coef = 0.0;
    double exponent = 0.0;

    double operator()(std::uint64_t k) const noexcept;
};

/// A deterministic non-negative sequence. Power laws are recognized in
/// closed form (tail bounds, limits); arbitrary rules are evaluated pointwise.
class Sequence {
public:
    Sequence() = default;
    Sequence(PowerLaw law) : law_(law) {}  // NOLINT(google-explicit-constructor)
    explicit Sequence(std::function<double(std::uint64_t)> rule) : law_(std::nullopt), rule_(std::move(rule)) {}

    static Sequence constant(double v) { return PowerLaw{v, 0.0}; }
    static Sequence zero() { return constant(0.0); }

    double operator()(std::uint64_t k) const { return law_ ? (*law_)(k) : rule_(k); }
    const std::optional<PowerLaw>& power_law() const noexcept { return law_; }

private:
    std::optional<PowerLaw> law_ = PowerLaw{};
    std::function<double(std::uint64_t)> rule_;
};

enum class BoundsChannel { derived, paper };

std::string_view to_string(BoundsChannel channel) noexcept;
std::optional<BoundsChannel> parse_bounds_channel(std::string_view text) noexcept;

/// The three moment-bound sequences (a_k, b_k, c_k).
struct BoundSequences {
    std::string name;
    Sequence a;
    Sequence b;
    Sequence c;

    MomentBounds at(std::uint64_t k) const { return {a(k), b(k), c(k)}; }
};

/// Tight sequences from the oracle's sampling law (matches NoiseOracle::moment_bounds).
BoundSequences derived_bounds(const NoiseOracle& o, std::size_t dim = 1);

/// Sequences the original experiments use to argue conditions i-iii:
///   multiplicative   (0, b, 0)
///   additive         (0, b, 2 sigma_k^2)
///   value-dependent  (2 / (alpha^2 beta (k+1)^(2+eps)), 3b/(k+1)^2, 3 sigma^2/(k+1)^(2+2eps))
BoundSequences paper_bounds(const NoiseOracle& o, double alpha, double beta);

/// Reference-table form of the second-moment bound, for display only.
std::string caption_bound(const NoiseOracle& o);

BoundSequences bounds_for(BoundsChannel channel, const NoiseOracle& o, double alpha, double beta, std::size_t dim = 1);

struct StepSchedule {
    PowerLaw alpha;  ///< alpha_k = coef / (k+1)^exponent
    BoundSequences bounds;
    double beta = 2.0;

    double stepsize(std::uint64_t k) const noexcept { return alpha(k); }
};

/// alpha = 1 / (b beta), i.e. alpha b = 1/beta.
double inverse_b_beta_step(double b, double beta);

enum class Verdict { finite, infinite, unknown };
std::string_view to_string(Verdict v) noexcept;

struct SummabilityReport {
    double partial_sum = 0.0;         ///< sum_{k <= k_max} alpha_k (sqrt a_k + sqrt c_k)
    std::optional<double> tail_bound; ///< upper bound on the remainder
    Verdict verdict = Verdict::unknown;
    std::uint64_t k_max = 0;
    bool passed() const noexcept { return verdict == Verdict::finite; }
};

/// Optional user tail rule for non power-law sequences: returns an upper bound
/// on sum_{k > k_max} of the summand, or nullopt.
using TailRule = std::function<std::optional<double>(std::uint64_t k_max)>;

/// Condition i: sum alpha_k (sqrt a_k + sqrt c_k) < infinity.
SummabilityReport check_summability(const StepSchedule& s, std::uint64_t k_max, const TailRule& tail = {});

struct InfConditionReport {
    double min_value = 0.0;        ///< min_{k <= k_max} alpha_k (1 - alpha_k b_k beta / 2)
    std::uint64_t argmin = 0;
    std::optional<double> limit;   ///< k -> infinity, for power-law alpha and b
    bool passed = false;
};

/// Condition ii: inf_k alpha_k (1 - alpha_k b_k beta / 2) > 0.
InfConditionReport check_inf_condition(const StepSchedule& s, std::uint64_t k_max);

struct RatioReport {
    double worst = 0.0;  ///< max over k < k_max
    std::uint64_t worst_k = 0;
    double smallest = 0.0;
    std::uint64_t smallest_k = 0;
    bool passed = false;  ///< every ratio in (0, 1]
};

/// Condition iii:
///   sqrt(b_{k+1}/b_k) (2 - alpha_k b_k beta) / (2 - alpha_{k+1} b_{k+1} beta) (1 + alpha_{k+1}^2 a_{k+1} beta / 2) <= 1.
/// Throws std::domain_error when some b_k == 0 (the ratio is undefined).
RatioReport check_monotone_ratio(const StepSchedule& s, std::uint64_t k_max);

inline constexpr std::uint64_t kDefaultCheckHorizon = 1'000'000;

}  // namespace sgdlab
