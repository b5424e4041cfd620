#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "sgdlab/noise.hpp"
#include "sgdlab/objective.hpp"
#include "sgdlab/schedule.hpp"

namespace sgdlab {

struct RunConfig {
    Point x0{0.0};
    std::uint64_t k_max = 1'000'000;
    /// Early stop once ||grad F|| < stop_grad_tol for stop_window consecutive iterates (0 disables).
    double stop_grad_tol = 0.0;
    std::uint64_t stop_window = 1000;
    std::uint64_t record_stride = 100;
    std::uint64_t seed = 1;
    /// Iterates k < dense_prefix are all stored; afterwards every record_stride-th.
    std::uint64_t dense_prefix = 10'000;
    /// The last terminal_window iterates are always stored densely.
    std::uint64_t terminal_window = 1000;
    /// Run even when the schedule fails condition ii.
    bool force = false;

    void validate() const;
};

/// Column store of (k, x_k, F(x_k), ||grad F(x_k)||).
struct Trace {
    std::size_t dim = 1;
    std::vector<std::uint64_t> k;
    std::vector<double> x;  ///< row-major, dim values per entry
    std::vector<double> f;
    std::vector<double> grad_norm;

    std::size_t size() const noexcept { return k.size(); }
    bool empty() const noexcept { return k.empty(); }
    std::span<const double> x_at(std::size_t i) const { return {x.data() + i * dim, dim}; }
    void push(std::uint64_t step, std::span<const double> xi, double fi, double gi);
    /// Index of the entry with iteration number step, if stored.
    std::optional<std::size_t> find(std::uint64_t step) const;
};

struct TrajectoryRecord {
    std::uint64_t seed = 0;
    RunConfig config;
    Trace history;   ///< decimated; first entry is x0, last is the terminal iterate
    Trace terminal;  ///< dense tail of the run, ending at the terminal iterate

    Point final_x;
    double final_f = 0.0;
    double final_grad_norm = 0.0;
    std::uint64_t final_k = 0;

    bool stopped_early = false;
    std::uint64_t stop_k = 0;
    bool numeric_failure = false;
    std::uint64_t failure_k = 0;  ///< first k whose iterate was non-finite

    /// Running extrema over every iterate (not only stored ones).
    double min_f = 0.0;
    double min_grad_norm = 0.0;
    std::uint64_t min_grad_k = 0;

    /// Union of history and terminal, sorted by k without duplicates.
    Trace merged() const;
};

class AssumptionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// x_{k+1} = x_k - alpha_k g_k with g_k drawn from the substream (seed, 0, k).
/// Throws AssumptionError when the schedule fails condition ii and cfg.force is false.
TrajectoryRecord run_trajectory(const RunConfig& cfg, const Objective& f, const NoiseOracle& o,
                                const StepSchedule& s);

/// Seeds cfg.seed + i for i in [0, n_seeds). Output order follows the seed
/// order whatever the worker count (0 = default_worker_count()).
std::vector<TrajectoryRecord> run_ensemble(const RunConfig& cfg, const Objective& f, const NoiseOracle& o,
                                           const StepSchedule& s, std::size_t n_seeds, unsigned workers = 0);

/// SGDLAB_THREADS if set and positive, else hardware concurrency (at least 1).
unsigned default_worker_count();

}  // namespace sgdlab
