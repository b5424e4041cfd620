#include "sgdlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace sgdlab {

std::string_view to_string(LimitLabel label) noexcept {
    switch (label) {
        case LimitLabel::saddle: return "saddle";
        case LimitLabel::local_max: return "local-max";
        case LimitLabel::local_min: return "local-min";
        case LimitLabel::global_min: return "global-min";
        case LimitLabel::none: return "none";
        case LimitLabel::non_convergence: return "non-convergence";
    }
    return "none";
}

std::string_view to_string(AboveLimit v) noexcept {
    switch (v) {
        case AboveLimit::yes: return "yes";
        case AboveLimit::yes_except_equality: return "yes-except-equality";
        case AboveLimit::no: return "no";
        case AboveLimit::undefined: return "undefined";
    }
    return "undefined";
}

std::optional<LimitLabel> parse_limit_label(std::string_view text) noexcept {
    for (auto l : {LimitLabel::saddle, LimitLabel::local_max, LimitLabel::local_min, LimitLabel::global_min,
                   LimitLabel::none, LimitLabel::non_convergence}) {
        if (to_string(l) == text) return l;
    }
    return std::nullopt;
}

std::optional<AboveLimit> parse_above_limit(std::string_view text) noexcept {
    for (auto v : {AboveLimit::yes, AboveLimit::yes_except_equality, AboveLimit::no, AboveLimit::undefined}) {
        if (to_string(v) == text) return v;
    }
    return std::nullopt;
}

LimitLabel label_of(CriticalKind kind) noexcept {
    switch (kind) {
        case CriticalKind::saddle: return LimitLabel::saddle;
        case CriticalKind::local_max: return LimitLabel::local_max;
        case CriticalKind::local_min: return LimitLabel::local_min;
        case CriticalKind::global_min: return LimitLabel::global_min;
    }
    return LimitLabel::none;
}

bool is_minimizer(LimitLabel label) noexcept {
    return label == LimitLabel::local_min || label == LimitLabel::global_min;
}

std::string_view to_string(ProbeStatus s) noexcept {
    switch (s) {
        case ProbeStatus::holds: return "holds";
        case ProbeStatus::exceeds: return "exceeds";
        case ProbeStatus::void_equal: return "void";
        case ProbeStatus::above_limit_violation: return "above-limit-violation";
        case ProbeStatus::rhs_zero_failure: return "rhs-zero-failure";
    }
    return "holds";
}

namespace {

double equality_tol(double v) { return 1e-12 * std::max(1.0, std::abs(v)); }

}  // namespace

LimitClassification classify_limit(const TrajectoryRecord& rec, const Objective& f, double tol_dist,
                                   double tol_grad) {
    LimitClassification out;
    out.f_inf = rec.final_f;
    if (rec.numeric_failure) {
        out.label = LimitLabel::non_convergence;
        return out;
    }
    const Trace& w = rec.terminal.empty() ? rec.history : rec.terminal;
    if (w.empty()) throw std::invalid_argument("classify_limit: empty record");

    // An early stop certifies only its own window of small gradients.
    std::size_t first = 0;
    if (rec.stopped_early && rec.config.stop_window < w.size()) first = w.size() - rec.config.stop_window;

    const std::size_t n = w.dim;
    Point lo(w.x_at(first).begin(), w.x_at(first).end()), hi = lo, mean(n, 0.0);
    for (std::size_t i = first; i < w.size(); ++i) {
        const auto xi = w.x_at(i);
        for (std::size_t d = 0; d < n; ++d) {
            lo[d] = std::min(lo[d], xi[d]);
            hi[d] = std::max(hi[d], xi[d]);
            mean[d] += xi[d];
        }
    }
    double diam2 = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
        diam2 += (hi[d] - lo[d]) * (hi[d] - lo[d]);
        mean[d] /= static_cast<double>(w.size() - first);
    }
    out.window_diameter = std::sqrt(diam2);
    if (out.window_diameter > tol_dist) {
        out.label = LimitLabel::non_convergence;
        return out;
    }

    out.grad_norm = norm(f.gradient(mean));
    const auto idx = f.classify_point(mean, tol_dist);
    if (idx && out.grad_norm < tol_grad) {
        const auto& comp = f.catalog()[*idx];
        out.label = label_of(comp.kind);
        out.component = idx;
        out.distance = comp.distance_to(mean);
        out.f_inf = comp.value;
    } else {
        out.label = LimitLabel::none;
        if (idx) out.distance = f.catalog()[*idx].distance_to(mean);
    }

    const double tol = equality_tol(out.f_inf);
    if (rec.min_f < out.f_inf - tol) {
        out.above_limit = AboveLimit::no;
    } else if (rec.min_f <= out.f_inf + tol) {
        out.above_limit = AboveLimit::yes_except_equality;
    } else {
        out.above_limit = AboveLimit::yes;
    }
    return out;
}

ConditionalValue estimate_conditional_value(std::span<const double> x, std::uint64_t k, const Objective& f,
                                            const NoiseOracle& o, const StepSchedule& s, std::size_t n_draws,
                                            std::uint64_t seed) {
    if (n_draws < 1000) throw std::invalid_argument("estimate_conditional_value: need at least 1000 draws");
    o.validate();
    const std::size_t n = f.dim();
    const double gap = std::max(f.evaluate(x) - f.f_min(), 0.0);
    const Point grad = f.gradient(x);
    const double alpha = s.stepsize(k);

    Point g(n), y(n);
    double mean = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < n_draws; ++j) {
        NoiseStream rng(seed, kProbeStreamBase + static_cast<std::uint32_t>(j), k);
        o.sample(grad, gap, rng, g, k);
        for (std::size_t i = 0; i < n; ++i) y[i] = x[i] - alpha * g[i];
        const double v = f.evaluate_unchecked(y) - f.f_min();
        const double delta = v - mean;
        mean += delta / static_cast<double>(j + 1);
        m2 += delta * (v - mean);
    }
    const double nd = static_cast<double>(n_draws);
    return {mean, std::sqrt(m2 / (nd - 1.0) / nd), n_draws};
}

XiProbeSummary xi_probe(const TrajectoryRecord& rec, std::span<const std::uint64_t> probe_ks, const Objective& f,
                        const NoiseOracle& o, const StepSchedule& s, double f_inf, double gamma,
                        std::size_t n_draws, std::uint64_t seed) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("xi_probe: gamma must lie in (0, 1)");
    const Trace trace = rec.merged();
    const double beta = f.beta();

    XiProbeSummary sum;
    sum.gamma = gamma;
    sum.consistent = true;
    sum.caveat =
        "Monte-Carlo probes at sampled k can refute the event but cannot certify that it holds "
        "almost surely for every k.";

    for (std::uint64_t k : probe_ks) {
        const auto idx = trace.find(k);
        if (!idx) throw std::out_of_range("xi_probe: iteration " + std::to_string(k) + " is not recorded");
        XiProbeResult r;
        r.k = k;
        const auto xk = trace.x_at(*idx);
        r.x_k.assign(xk.begin(), xk.end());
        r.f_k = trace.f[*idx];

        const double alpha = s.stepsize(k);
        const MomentBounds m = s.bounds.at(k);
        const auto cv = estimate_conditional_value(xk, k, f, o, s, n_draws, seed);
        r.e_cond = cv.mean;
        r.e_cond_stderr = cv.std_error;

        const double shrink = 2.0 / (2.0 + alpha * alpha * m.a * beta);
        const double inner = (f_inf - f.f_min()) - shrink * cv.mean + alpha * alpha * m.c * beta / 2.0;
        r.lhs = std::abs(inner);
        const double lhs_se = shrink * cv.std_error;
        const double g2 = trace.grad_norm[*idx] * trace.grad_norm[*idx];
        r.rhs_unit = (1.0 - alpha * m.b * beta / 2.0) * g2;

        const bool lhs_positive = r.lhs > 3.0 * lhs_se + equality_tol(f_inf);
        if (r.rhs_unit > 0.0) {
            r.gamma_required = r.lhs / r.rhs_unit;
        } else {
            r.gamma_required = lhs_positive ? std::numeric_limits<double>::infinity() : 0.0;
        }

        const double tol = equality_tol(f_inf);
        if (f_inf > r.f_k + tol) {
            r.status = ProbeStatus::above_limit_violation;
        } else if (f_inf >= r.f_k - tol) {
            r.status = ProbeStatus::void_equal;
        } else if (r.rhs_unit <= 0.0 && lhs_positive) {
            r.status = ProbeStatus::rhs_zero_failure;
        } else {
            r.status = r.gamma_required <= gamma ? ProbeStatus::holds : ProbeStatus::exceeds;
        }

        if (r.status == ProbeStatus::void_equal) {
            sum.any_void = true;
        } else {
            sum.max_gamma_required = std::max(sum.max_gamma_required, r.gamma_required);
            const bool contradicts = r.status == ProbeStatus::above_limit_violation ||
                                     r.status == ProbeStatus::rhs_zero_failure || !(r.gamma_required < 1.0);
            if (contradicts) {
                sum.consistent = false;
                if (!sum.first_violation_k) sum.first_violation_k = k;
            }
        }
        sum.probes.push_back(std::move(r));
    }
    return sum;
}

DescentReport check_conditional_descent(std::span<const double> x, std::uint64_t k, const Objective& f,
                                        const NoiseOracle& o, const StepSchedule& s, std::size_t n_draws,
                                        std::uint64_t seed) {
    const auto cv = estimate_conditional_value(x, k, f, o, s, n_draws, seed);
    const double alpha = s.stepsize(k);
    const MomentBounds m = s.bounds.at(k);
    const double beta = f.beta();
    const double gap = std::max(f.evaluate(x) - f.f_min(), 0.0);
    const double g2 = squared_norm(f.gradient(x));

    DescentReport rep;
    rep.expected = cv.mean;
    rep.std_error = cv.std_error;
    rep.bound = (1.0 + alpha * alpha * m.a * beta / 2.0) * gap - alpha * (1.0 - alpha * m.b * beta / 2.0) * g2 +
                alpha * alpha * m.c * beta / 2.0;
    rep.margin = rep.bound - rep.expected;
    rep.passed = rep.margin >= -3.0 * rep.std_error - equality_tol(rep.bound);
    return rep;
}

ExponentFit estimate_lojasiewicz_exponent(const Objective& f, const CriticalComponent& component, double radius,
                                          std::size_t n_samples, std::uint64_t seed, SampleSide side) {
    if (!(radius > 0.0)) throw std::invalid_argument("estimate_lojasiewicz_exponent: radius must be positive");
    if (n_samples < 3) throw std::invalid_argument("estimate_lojasiewicz_exponent: need at least 3 samples");
    const std::size_t n = f.dim();
    if (component.lo.size() != n) throw std::invalid_argument("estimate_lojasiewicz_exponent: dimension mismatch");

    constexpr double kDecades = 4.0;
    const double log_span = kDecades * std::log(10.0);
    const double gap_floor = 1e-300;

    ExponentFit fit;
    Point x(n), grad(n);
    for (std::size_t j = 0; j < n_samples; ++j) {
        NoiseStream rng(seed, kProbeStreamBase + static_cast<std::uint32_t>(j), 0);
        const double dist = radius * std::exp(-log_span * rng.uniform());
        int group = 0;
        if (n == 1) {
            bool upper = rng.uniform() < 0.5;
            if (side == SampleSide::lower) upper = false;
            if (side == SampleSide::upper) upper = true;
            x[0] = upper ? component.hi[0] + dist : component.lo[0] - dist;
            group = upper ? 1 : 0;
        } else {
            double len2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                grad[i] = rng.normal();
                len2 += grad[i] * grad[i];
            }
            const double len = std::sqrt(len2);
            for (std::size_t i = 0; i < n; ++i)
                x[i] = rng.uniform(component.lo[i], component.hi[i]) + dist * grad[i] / len;
        }
        const double gap = std::abs(f.evaluate(x) - component.value);
        f.gradient(x, grad);
        const double gn = norm(grad);
        if (gap > gap_floor && gn > 0.0) fit.samples.push_back({x, gap, gn, group});
    }
    fit.n_used = fit.samples.size();
    if (fit.n_used < 3) {
        throw NoDataError(
            "no sample with F(x) != F* near the component (plateau interior?); sample at the component boundary");
    }

    // Pooled slope, one intercept per side.
    std::map<int, std::pair<double, double>> group_sums;  // side -> (sum log gap, sum log grad)
    std::map<int, std::size_t> group_counts;
    double all_y = 0.0;
    for (const auto& s : fit.samples) {
        auto& acc = group_sums[s.side];
        acc.first += std::log(s.gap);
        acc.second += std::log(s.grad_norm);
        ++group_counts[s.side];
        all_y += std::log(s.grad_norm);
    }
    all_y /= static_cast<double>(fit.n_used);

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (const auto& s : fit.samples) {
        const auto cnt = static_cast<double>(group_counts[s.side]);
        const double dx = std::log(s.gap) - group_sums[s.side].first / cnt;
        const double dy = std::log(s.grad_norm) - group_sums[s.side].second / cnt;
        sxy += dx * dy;
        sxx += dx * dx;
    }
    if (sxx <= 0.0) throw NoDataError("estimate_lojasiewicz_exponent: degenerate samples (no spread in F - F*)");
    fit.theta = sxy / sxx;

    double ss_res = 0.0;
    for (const auto& s : fit.samples) {
        const auto cnt = static_cast<double>(group_counts[s.side]);
        const double dx = std::log(s.gap) - group_sums[s.side].first / cnt;
        const double dy = std::log(s.grad_norm) - group_sums[s.side].second / cnt;
        const double r = dy - fit.theta * dx;
        ss_res += r * r;
        const double t = std::log(s.grad_norm) - all_y;
        syy += t * t;
    }
    fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

}  // namespace sgdlab
