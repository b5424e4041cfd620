#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "sgdlab/objective.hpp"
#include "sgdlab/rng.hpp"

namespace sgdlab {

enum class NoiseKind { exact, multiplicative, additive_gaussian, value_dependent };

std::string_view to_string(NoiseKind kind) noexcept;
std::optional<NoiseKind> parse_noise_kind(std::string_view text) noexcept;

/// Coefficients of E_k ||g_k||^2 <= a (F(x) - F_min) + b ||grad F(x)||^2 + c.
struct MomentBounds {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double bound(double f_gap, double grad_sq) const noexcept { return a * f_gap + b * grad_sq + c; }
};

/// Stochastic gradient generator.
///
///   exact:             g = grad F(x)
///   multiplicative:    g = e1 grad F(x),            e1 ~ U[1 - r, 1 + r], r = sqrt(3b - 1)
///   additive_gaussian: g = e1 grad F(x) + e2,       e2 ~ N(0, sigma_k^2 I)
///   value_dependent:   g = e3 sqrt(F - F_min) + e1 grad F(x) + e2,
///                      e3 ~ U[-w_k, w_k] per coordinate
///
/// with sigma_k = sigma / (k+1)^(1+eps) and w_k = sqrt(3) / (alpha (k+1)^(1+eps)).
/// Draw order within one (seed, stream, k) substream: e1, then per coordinate
/// e2 (two uniforms) followed by e3 (one uniform).
struct NoiseOracle {
    NoiseKind kind = NoiseKind::exact;
    double b = 10.0;
    double sigma = 0.0;
    double eps_exp = 0.1;
    double alpha_ref = 0.05;
    double beta_ref = 2.0;
    /// Added to e1's centre. Non-zero only for validator negative tests (breaks unbiasedness).
    double multiplier_shift = 0.0;

    /// Throws std::invalid_argument on an unusable configuration (b < 1/3, sigma < 0, ...).
    void validate() const;

    bool uses_multiplier() const noexcept { return kind != NoiseKind::exact; }
    bool uses_additive() const noexcept {
        return kind == NoiseKind::additive_gaussian || kind == NoiseKind::value_dependent;
    }
    bool uses_value_term() const noexcept { return kind == NoiseKind::value_dependent; }

    /// Half-width sqrt(3b - 1) of e1's support.
    double multiplier_radius() const;
    /// (k+1)^-(1+eps)
    double decay(std::uint64_t k) const noexcept;
    double sigma_at(std::uint64_t k) const noexcept { return sigma * decay(k); }
    double value_amplitude(std::uint64_t k) const noexcept;

    /// Writes one draw of g_k into out. f_gap = F(x) - F_min must be >= 0.
    void sample(std::span<const double> grad_true, double f_gap, NoiseStream& rng, std::span<double> out,
                std::uint64_t k) const;
    Point sample(std::span<const double> grad_true, double f_gap, NoiseStream& rng, std::uint64_t k) const;

    /// Tight bounds implied by the sampling law (dim = problem dimension).
    MomentBounds moment_bounds(std::uint64_t k, std::size_t dim = 1) const noexcept;
};

struct UnbiasednessReport {
    Point mean;
    Point std_error;
    Point target;  ///< grad F(x)
    double z = 0.0;
    double max_abs_z = 0.0;  ///< max over coordinates of |mean - target| / std_error (0/0 -> 0)
    std::size_t n_draws = 0;
    bool passed = false;
};

/// Sample-mean test of E_k[g_k] = grad F(x) at the given confidence level.
UnbiasednessReport verify_unbiasedness(const NoiseOracle& o, const Objective& f, std::span<const double> x,
                                       std::uint64_t k, std::size_t n_draws, double confidence, std::uint64_t seed);

struct SecondMomentReport {
    double empirical = 0.0;  ///< mean of ||g||^2
    double std_error = 0.0;
    double bound = 0.0;      ///< a (F - F_min) + b ||grad F||^2 + c
    double slack = 0.0;
    MomentBounds bounds;
    std::size_t n_draws = 0;
    bool passed = false;
};

/// Checks mean ||g||^2 <= bound + slack. slack defaults to 3 standard errors.
SecondMomentReport verify_second_moment(const NoiseOracle& o, const Objective& f, std::span<const double> x,
                                        std::uint64_t k, std::size_t n_draws, std::optional<double> slack,
                                        std::uint64_t seed);

/// Monte-Carlo probes draw from stream 1 + j for the j-th fresh sample.
inline constexpr std::uint32_t kProbeStreamBase = 1;

}  // namespace sgdlab
