#include "sgdlab/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace sgdlab {

double PowerLaw::operator()(std::uint64_t k) const noexcept {
    if (exponent == 0.0) return coef;
    return coef * std::pow(static_cast<double>(k) + 1.0, -exponent);
}

std::string_view to_string(BoundsChannel channel) noexcept {
    return channel == BoundsChannel::derived ? "derived" : "paper";
}

std::optional<BoundsChannel> parse_bounds_channel(std::string_view text) noexcept {
    if (text == "derived") return BoundsChannel::derived;
    if (text == "paper") return BoundsChannel::paper;
    return std::nullopt;
}

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::finite: return "finite";
        case Verdict::infinite: return "infinite";
        case Verdict::unknown: return "unknown";
    }
    return "unknown";
}

BoundSequences derived_bounds(const NoiseOracle& o, std::size_t dim) {
    const double n = static_cast<double>(dim);
    const double decay2 = 2.0 + 2.0 * o.eps_exp;
    BoundSequences s{"derived", Sequence::zero(), Sequence::constant(1.0), Sequence::zero()};
    if (o.kind == NoiseKind::exact) return s;
    s.b = Sequence::constant(o.moment_bounds(0, dim).b);
    if (o.uses_additive()) s.c = PowerLaw{n * o.sigma * o.sigma, decay2};
    if (o.uses_value_term()) s.a = PowerLaw{n / (o.alpha_ref * o.alpha_ref), decay2};
    return s;
}

BoundSequences paper_bounds(const NoiseOracle& o, double alpha, double beta) {
    BoundSequences s{"paper", Sequence::zero(), Sequence::constant(1.0), Sequence::zero()};
    switch (o.kind) {
        case NoiseKind::exact:
            break;
        case NoiseKind::multiplicative:
            s.b = Sequence::constant(o.b);
            break;
        case NoiseKind::additive_gaussian:
            s.b = Sequence::constant(o.b);
            s.c = PowerLaw{2.0 * o.sigma * o.sigma, 2.0 + 2.0 * o.eps_exp};
            break;
        case NoiseKind::value_dependent:
            // (k+1) rather than k in a_k so that k = 0 is defined.
            s.a = PowerLaw{2.0 / (alpha * alpha * beta), 2.0 + o.eps_exp};
            s.b = PowerLaw{3.0 * o.b, 2.0};
            s.c = PowerLaw{3.0 * o.sigma * o.sigma, 2.0 + 2.0 * o.eps_exp};
            break;
    }
    return s;
}

std::string caption_bound(const NoiseOracle& o) {
    std::ostringstream os;
    os.precision(6);
    switch (o.kind) {
        case NoiseKind::exact:
            os << "E||g||^2 = ||grad F||^2";
            break;
        case NoiseKind::multiplicative:
            os << "E g^2 <= " << o.b << " F'(x)^2";
            break;
        case NoiseKind::additive_gaussian:
            os << "E g^2 <= " << 2.0 * o.b << " F'(x)^2 + 2 sigma^2/(k+1)^(2+2eps)";
            break;
        case NoiseKind::value_dependent:
            os << "E g^2 <= 8/(alpha^2 beta) (F(x)-F_min)^2 + " << 4.0 * o.b
               << " F'(x)^2 + 4 sigma^2/(k+1)^(2+2eps)";
            break;
    }
    return os.str();
}

BoundSequences bounds_for(BoundsChannel channel, const NoiseOracle& o, double alpha, double beta, std::size_t dim) {
    return channel == BoundsChannel::derived ? derived_bounds(o, dim) : paper_bounds(o, alpha, beta);
}

double inverse_b_beta_step(double b, double beta) {
    if (!(b > 0.0) || !(beta > 0.0)) throw std::invalid_argument("inverse_b_beta_step: b and beta must be positive");
    return 1.0 / (b * beta);
}

SummabilityReport check_summability(const StepSchedule& s, std::uint64_t k_max, const TailRule& tail) {
    if (k_max < 1) throw std::invalid_argument("check_summability: k_max must be >= 1");
    SummabilityReport rep;
    rep.k_max = k_max;

    for (std::uint64_t k = 0; k <= k_max; ++k) {
        const double a = s.bounds.a(k);
        const double c = s.bounds.c(k);
        if (a < 0.0 || c < 0.0) throw std::domain_error("check_summability: negative bound sequence");
        rep.partial_sum += s.alpha(k) * (std::sqrt(a) + std::sqrt(c));
    }

    const auto& la = s.bounds.a.power_law();
    const auto& lc = s.bounds.c.power_law();
    if (la && lc) {
        // alpha_k sqrt(X_k) = alpha.coef sqrt(X.coef) / (k+1)^(alpha.exp + X.exp / 2)
        double tail_sum = 0.0;
        bool divergent = false;
        for (const PowerLaw& law : {*la, *lc}) {
            const double coef = s.alpha.coef * std::sqrt(law.coef);
            if (coef == 0.0) continue;
            const double q = s.alpha.exponent + law.exponent / 2.0;
            if (q <= 1.0) {
                divergent = true;
                continue;
            }
            tail_sum += coef * std::pow(static_cast<double>(k_max) + 1.0, 1.0 - q) / (q - 1.0);
        }
        if (divergent) {
            rep.verdict = Verdict::infinite;
        } else {
            rep.tail_bound = tail_sum;
            rep.verdict = Verdict::finite;
        }
        return rep;
    }
    if (tail) {
        rep.tail_bound = tail(k_max);
        if (rep.tail_bound) rep.verdict = Verdict::finite;
    }
    return rep;
}

InfConditionReport check_inf_condition(const StepSchedule& s, std::uint64_t k_max) {
    if (k_max < 1) throw std::invalid_argument("check_inf_condition: k_max must be >= 1");
    InfConditionReport rep;
    rep.min_value = std::numeric_limits<double>::infinity();
    for (std::uint64_t k = 0; k <= k_max; ++k) {
        const double a = s.alpha(k);
        const double v = a * (1.0 - a * s.bounds.b(k) * s.beta / 2.0);
        if (v < rep.min_value) {
            rep.min_value = v;
            rep.argmin = k;
        }
    }
    if (const auto& lb = s.bounds.b.power_law()) {
        if (s.alpha.exponent > 0.0) {
            rep.limit = 0.0;
        } else if (lb->exponent > 0.0) {
            rep.limit = s.alpha.coef;
        } else if (lb->exponent == 0.0) {
            rep.limit = s.alpha.coef * (1.0 - s.alpha.coef * lb->coef * s.beta / 2.0);
        } else {
            rep.limit = -std::numeric_limits<double>::infinity();
        }
    }
    rep.passed = rep.min_value > 0.0 && (!rep.limit || *rep.limit > 0.0);
    return rep;
}

RatioReport check_monotone_ratio(const StepSchedule& s, std::uint64_t k_max) {
    if (k_max < 1) throw std::invalid_argument("check_monotone_ratio: k_max must be >= 1");
    RatioReport rep;
    rep.worst = -std::numeric_limits<double>::infinity();
    rep.smallest = std::numeric_limits<double>::infinity();

    double alpha_k = s.alpha(0);
    double b_k = s.bounds.b(0);
    for (std::uint64_t k = 0; k < k_max; ++k) {
        const double alpha_next = s.alpha(k + 1);
        const double b_next = s.bounds.b(k + 1);
        const double a_next = s.bounds.a(k + 1);
        if (b_k == 0.0 || b_next == 0.0)
            throw std::domain_error("check_monotone_ratio: b_k = 0 makes the ratio undefined; use a positive floor");
        const double ratio = std::sqrt(b_next / b_k) * (2.0 - alpha_k * b_k * s.beta) /
                             (2.0 - alpha_next * b_next * s.beta) *
                             (1.0 + alpha_next * alpha_next * a_next * s.beta / 2.0);
        if (ratio > rep.worst) {
            rep.worst = ratio;
            rep.worst_k = k;
        }
        if (ratio < rep.smallest) {
            rep.smallest = ratio;
            rep.smallest_k = k;
        }
        alpha_k = alpha_next;
        b_k = b_next;
    }
    rep.passed = rep.smallest > 0.0 && rep.worst <= 1.0;
    return rep;
}

}  // namespace sgdlab
