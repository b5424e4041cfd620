#include "sgdlab/noise.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace sgdlab {

std::string_view to_string(NoiseKind kind) noexcept {
    switch (kind) {
        case NoiseKind::exact: return "exact";
        case NoiseKind::multiplicative: return "multiplicative";
        case NoiseKind::additive_gaussian: return "additive-gaussian";
        case NoiseKind::value_dependent: return "value-dependent";
    }
    return "unknown";
}

std::optional<NoiseKind> parse_noise_kind(std::string_view text) noexcept {
    for (auto kind : {NoiseKind::exact, NoiseKind::multiplicative, NoiseKind::additive_gaussian,
                      NoiseKind::value_dependent}) {
        if (to_string(kind) == text) return kind;
    }
    return std::nullopt;
}

void NoiseOracle::validate() const {
    if (uses_multiplier() && !(3.0 * b - 1.0 >= 0.0))
        throw std::invalid_argument("NoiseOracle: b must be >= 1/3 (negative radicand in sqrt(3b - 1))");
    if (uses_additive() && !(sigma >= 0.0)) throw std::invalid_argument("NoiseOracle: sigma must be >= 0");
    if (!(eps_exp > 0.0)) throw std::invalid_argument("NoiseOracle: eps_exp must be positive");
    if (uses_value_term() && !(alpha_ref > 0.0)) throw std::invalid_argument("NoiseOracle: alpha_ref must be positive");
    if (!(beta_ref > 0.0)) throw std::invalid_argument("NoiseOracle: beta_ref must be positive");
}

double NoiseOracle::multiplier_radius() const {
    const double radicand = 3.0 * b - 1.0;
    if (!(radicand >= 0.0)) throw std::invalid_argument("NoiseOracle: b must be >= 1/3");
    return std::sqrt(radicand);
}

double NoiseOracle::decay(std::uint64_t k) const noexcept {
    return std::pow(static_cast<double>(k) + 1.0, -(1.0 + eps_exp));
}

double NoiseOracle::value_amplitude(std::uint64_t k) const noexcept {
    return std::sqrt(3.0) / alpha_ref * decay(k);
}

void NoiseOracle::sample(std::span<const double> grad_true, double f_gap, NoiseStream& rng, std::span<double> out,
                         std::uint64_t k) const {
    if (f_gap < 0.0) throw std::domain_error("NoiseOracle: negative F(x) - F_min");
    const std::size_t n = grad_true.size();
    if (kind == NoiseKind::exact) {
        for (std::size_t i = 0; i < n; ++i) out[i] = grad_true[i];
        return;
    }

    const double r = multiplier_radius();
    const double e1 = 1.0 + multiplier_shift + r * (2.0 * rng.uniform() - 1.0);
    for (std::size_t i = 0; i < n; ++i) out[i] = e1 * grad_true[i];
    if (kind == NoiseKind::multiplicative) return;

    const double d = decay(k);
    const double sd = sigma * d;
    const double w = uses_value_term() ? std::sqrt(3.0) / alpha_ref * d : 0.0;
    const double root_gap = std::sqrt(f_gap);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] += sd * rng.normal();
        if (uses_value_term()) out[i] += w * (2.0 * rng.uniform() - 1.0) * root_gap;
    }
}

Point NoiseOracle::sample(std::span<const double> grad_true, double f_gap, NoiseStream& rng, std::uint64_t k) const {
    Point out(grad_true.size());
    sample(grad_true, f_gap, rng, out, k);
    return out;
}

MomentBounds NoiseOracle::moment_bounds(std::uint64_t k, std::size_t dim) const noexcept {
    if (kind == NoiseKind::exact) return {0.0, 1.0, 0.0};
    // E[e1^2] = 1 + Var(e1) = 1 + (3b - 1)/3
    MomentBounds m{0.0, b + 2.0 / 3.0, 0.0};
    if (multiplier_shift != 0.0) m.b = (1.0 + multiplier_shift) * (1.0 + multiplier_shift) + (3.0 * b - 1.0) / 3.0;
    if (uses_additive()) {
        const double sd = sigma_at(k);
        m.c = static_cast<double>(dim) * sd * sd;
    }
    if (uses_value_term()) {
        const double d = decay(k);
        m.a = static_cast<double>(dim) * d * d / (alpha_ref * alpha_ref);  // Var(U[-w, w]) = w^2 / 3
    }
    return m;
}

namespace {

struct GapAndGrad {
    double gap;
    Point grad;
};

GapAndGrad state_at(const Objective& f, std::span<const double> x) {
    GapAndGrad s{f.evaluate(x) - f.f_min(), f.gradient(x)};
    if (s.gap < 0.0) s.gap = 0.0;
    return s;
}

}  // namespace

UnbiasednessReport verify_unbiasedness(const NoiseOracle& o, const Objective& f, std::span<const double> x,
                                       std::uint64_t k, std::size_t n_draws, double confidence, std::uint64_t seed) {
    if (n_draws < 1000) throw std::invalid_argument("verify_unbiasedness: need at least 1000 draws");
    if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("verify_unbiasedness: confidence in (0,1)");
    o.validate();

    const auto st = state_at(f, x);
    const std::size_t n = f.dim();
    std::vector<double> mean(n, 0.0), m2(n, 0.0);
    Point g(n);
    for (std::size_t j = 0; j < n_draws; ++j) {
        NoiseStream rng(seed, kProbeStreamBase + static_cast<std::uint32_t>(j), k);
        o.sample(st.grad, st.gap, rng, g, k);
        const double count = static_cast<double>(j + 1);
        for (std::size_t i = 0; i < n; ++i) {
            const double delta = g[i] - mean[i];
            mean[i] += delta / count;
            m2[i] += delta * (g[i] - mean[i]);
        }
    }

    UnbiasednessReport rep;
    rep.n_draws = n_draws;
    rep.mean = mean;
    rep.target = st.grad;
    rep.std_error.resize(n);
    rep.z = boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + confidence / 2.0);
    rep.passed = true;
    const double nd = static_cast<double>(n_draws);
    for (std::size_t i = 0; i < n; ++i) {
        rep.std_error[i] = std::sqrt(m2[i] / (nd - 1.0) / nd);
        const double diff = std::abs(mean[i] - st.grad[i]);
        const double fp_floor = 1e-12 * (1.0 + std::abs(st.grad[i]));
        if (rep.std_error[i] <= fp_floor) {
            // Degenerate law: the mean must match exactly (up to rounding).
            if (diff > fp_floor) {
                rep.passed = false;
                rep.max_abs_z = std::numeric_limits<double>::infinity();
            }
            continue;
        }
        const double zi = diff / rep.std_error[i];
        rep.max_abs_z = std::max(rep.max_abs_z, zi);
        if (zi > rep.z) rep.passed = false;
    }
    return rep;
}

SecondMomentReport verify_second_moment(const NoiseOracle& o, const Objective& f, std::span<const double> x,
                                        std::uint64_t k, std::size_t n_draws, std::optional<double> slack,
                                        std::uint64_t seed) {
    if (n_draws < 1000) throw std::invalid_argument("verify_second_moment: need at least 1000 draws");
    if (slack && *slack < 0.0) throw std::invalid_argument("verify_second_moment: slack must be >= 0");
    o.validate();

    const auto st = state_at(f, x);
    Point g(f.dim());
    double mean = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < n_draws; ++j) {
        NoiseStream rng(seed, kProbeStreamBase + static_cast<std::uint32_t>(j), k);
        o.sample(st.grad, st.gap, rng, g, k);
        const double v = squared_norm(g);
        const double delta = v - mean;
        mean += delta / static_cast<double>(j + 1);
        m2 += delta * (v - mean);
    }

    SecondMomentReport rep;
    rep.n_draws = n_draws;
    rep.empirical = mean;
    const double nd = static_cast<double>(n_draws);
    rep.std_error = std::sqrt(m2 / (nd - 1.0) / nd);
    rep.bounds = o.moment_bounds(k, f.dim());
    rep.bound = rep.bounds.bound(st.gap, squared_norm(st.grad));
    rep.slack = slack ? *slack : 3.0 * rep.std_error;
    rep.passed = rep.empirical <= rep.bound + rep.slack + 1e-12 * (1.0 + std::abs(rep.bound));
    return rep;
}

}  // namespace sgdlab
