#include "sgdlab/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace sgdlab {

void RunConfig::validate() const {
    if (x0.empty()) throw std::invalid_argument("RunConfig: x0 is empty");
    for (double c : x0) {
        if (!std::isfinite(c)) throw std::invalid_argument("RunConfig: x0 must be finite");
    }
    if (k_max < 1) throw std::invalid_argument("RunConfig: k_max must be >= 1");
    if (record_stride < 1) throw std::invalid_argument("RunConfig: record_stride must be >= 1");
    if (stop_window < 1) throw std::invalid_argument("RunConfig: stop_window must be >= 1");
    if (stop_grad_tol < 0.0) throw std::invalid_argument("RunConfig: stop_grad_tol must be >= 0");
    if (terminal_window < 1) throw std::invalid_argument("RunConfig: terminal_window must be >= 1");
}

void Trace::push(std::uint64_t step, std::span<const double> xi, double fi, double gi) {
    k.push_back(step);
    x.insert(x.end(), xi.begin(), xi.end());
    f.push_back(fi);
    grad_norm.push_back(gi);
}

std::optional<std::size_t> Trace::find(std::uint64_t step) const {
    const auto it = std::lower_bound(k.begin(), k.end(), step);
    if (it == k.end() || *it != step) return std::nullopt;
    return static_cast<std::size_t>(it - k.begin());
}

Trace TrajectoryRecord::merged() const {
    Trace out;
    out.dim = history.dim;
    std::size_t i = 0, j = 0;
    while (i < history.size() || j < terminal.size()) {
        const bool take_history =
            j == terminal.size() || (i < history.size() && history.k[i] <= terminal.k[j]);
        const Trace& src = take_history ? history : terminal;
        const std::size_t idx = take_history ? i : j;
        if (out.empty() || out.k.back() != src.k[idx]) out.push(src.k[idx], src.x_at(idx), src.f[idx], src.grad_norm[idx]);
        if (take_history) {
            if (j < terminal.size() && terminal.k[j] == history.k[i]) ++j;
            ++i;
        } else {
            ++j;
        }
    }
    return out;
}

namespace {

// Fixed-capacity ring of the most recent iterates.
class TailBuffer {
public:
    TailBuffer(std::size_t dim, std::size_t capacity)
        : dim_(dim), cap_(capacity), k_(capacity), x_(capacity * dim), f_(capacity), g_(capacity) {}

    void push(std::uint64_t step, std::span<const double> x, double f, double g) {
        const std::size_t slot = head_;
        k_[slot] = step;
        std::copy(x.begin(), x.end(), x_.begin() + static_cast<std::ptrdiff_t>(slot * dim_));
        f_[slot] = f;
        g_[slot] = g;
        head_ = (head_ + 1) % cap_;
        if (size_ < cap_) ++size_;
    }

    Trace to_trace() const {
        Trace t;
        t.dim = dim_;
        const std::size_t start = (head_ + cap_ - size_) % cap_;
        for (std::size_t n = 0; n < size_; ++n) {
            const std::size_t slot = (start + n) % cap_;
            t.push(k_[slot], {x_.data() + slot * dim_, dim_}, f_[slot], g_[slot]);
        }
        return t;
    }

private:
    std::size_t dim_;
    std::size_t cap_;
    std::vector<std::uint64_t> k_;
    std::vector<double> x_;
    std::vector<double> f_;
    std::vector<double> g_;
    std::size_t head_ = 0;
    std::size_t size_ = 0;
};

void require_condition_ii(const StepSchedule& s, std::uint64_t k_max) {
    const auto rep = check_inf_condition(s, std::min<std::uint64_t>(k_max, 10'000));
    if (!rep.passed) {
        throw AssumptionError("schedule fails inf_k alpha_k (1 - alpha_k b_k beta / 2) > 0 (min " +
                              std::to_string(rep.min_value) + " at k = " + std::to_string(rep.argmin) +
                              "); set force to run anyway");
    }
}

TrajectoryRecord simulate(const RunConfig& cfg, const Objective& f, const NoiseOracle& o, const StepSchedule& s) {
    const std::size_t n = f.dim();
    if (cfg.x0.size() != n) throw std::invalid_argument("run_trajectory: x0 dimension does not match objective");

    TrajectoryRecord rec;
    rec.seed = cfg.seed;
    rec.config = cfg;
    rec.history.dim = n;
    TailBuffer tail(n, static_cast<std::size_t>(std::min<std::uint64_t>(cfg.terminal_window, cfg.k_max + 1)));

    Point x = cfg.x0, next(n), grad(n), g(n);
    const bool constant_step = s.alpha.exponent == 0.0;
    const double f_min = f.f_min();
    std::uint64_t below_tol_run = 0;
    std::uint64_t last_history_k = 0;
    bool have_history = false;

    double fx = 0.0, gn = 0.0, prev_f = 0.0, prev_gn = 0.0;
    std::uint64_t k = 0;
    for (;; ++k) {
        fx = f.evaluate_unchecked(x);
        f.gradient_unchecked(x, grad);
        gn = norm(grad);
        if (!std::isfinite(fx) || !std::isfinite(gn)) {
            // Finite iterate whose value overflows: roll back to x_{k-1}.
            rec.numeric_failure = true;
            rec.failure_k = k;
            if (k > 0) {
                x.swap(next);
                fx = prev_f;
                gn = prev_gn;
                --k;
            }
            break;
        }

        if (k == 0 || fx < rec.min_f) rec.min_f = fx;
        if (k == 0 || gn < rec.min_grad_norm) {
            rec.min_grad_norm = gn;
            rec.min_grad_k = k;
        }
        if (k < cfg.dense_prefix || k % cfg.record_stride == 0) {
            rec.history.push(k, x, fx, gn);
            last_history_k = k;
            have_history = true;
        }
        tail.push(k, x, fx, gn);

        if (k == cfg.k_max) break;
        if (cfg.stop_grad_tol > 0.0) {
            below_tol_run = gn < cfg.stop_grad_tol ? below_tol_run + 1 : 0;
            if (below_tol_run >= cfg.stop_window) {
                rec.stopped_early = true;
                rec.stop_k = k;
                break;
            }
        }

        NoiseStream rng(cfg.seed, 0, k);
        o.sample(grad, std::max(fx - f_min, 0.0), rng, g, k);
        const double alpha = constant_step ? s.alpha.coef : s.alpha(k);
        bool finite = true;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = x[i] - alpha * g[i];
            finite = finite && std::isfinite(next[i]);
        }
        if (!finite) {
            rec.numeric_failure = true;
            rec.failure_k = k + 1;
            break;
        }
        prev_f = fx;
        prev_gn = gn;
        x.swap(next);
    }

    if (!have_history || last_history_k != k) rec.history.push(k, x, fx, gn);
    rec.terminal = tail.to_trace();
    rec.final_x = x;
    rec.final_f = fx;
    rec.final_grad_norm = gn;
    rec.final_k = k;
    return rec;
}

}  // namespace

TrajectoryRecord run_trajectory(const RunConfig& cfg, const Objective& f, const NoiseOracle& o,
                                const StepSchedule& s) {
    cfg.validate();
    o.validate();
    if (!cfg.force) require_condition_ii(s, cfg.k_max);
    return simulate(cfg, f, o, s);
}

std::vector<TrajectoryRecord> run_ensemble(const RunConfig& cfg, const Objective& f, const NoiseOracle& o,
                                           const StepSchedule& s, std::size_t n_seeds, unsigned workers) {
    if (n_seeds < 1) throw std::invalid_argument("run_ensemble: n_seeds must be >= 1");
    cfg.validate();
    o.validate();
    if (!cfg.force) require_condition_ii(s, cfg.k_max);

    std::vector<TrajectoryRecord> out(n_seeds);
    if (workers == 0) workers = default_worker_count();
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_seeds));

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < n_seeds; i = next++) {
            try {
                RunConfig c = cfg;
                c.seed = cfg.seed + i;
                out[i] = simulate(c, f, o, s);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (error) std::rethrow_exception(error);
    return out;
}

unsigned default_worker_count() {
    if (const char* env = std::getenv("SGDLAB_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace sgdlab
