#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sgdlab/engine.hpp"
#include "sgdlab/noise.hpp"
#include "sgdlab/objective.hpp"
#include "sgdlab/schedule.hpp"

namespace sgdlab {

/// Malformed or inconsistent configuration; the message carries key and line context.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class StepRule { inverse_b_beta, constant, power };

std::string_view to_string(StepRule r) noexcept;

/// One experiment family. TOML layout:
///
///   [objective]  name = "piecewise" | "quadratic", dim = 1
///   [oracle]     kind, b, sigma, eps_exp, levels = [...]
///   [schedule]   rule = "inverse-b-beta" | "constant" | "power", alpha, decay, channel
///   [run]        x0 = [...], seeds, k_max, seed, record_stride, stop_grad_tol,
///                stop_window, gamma, n_draws, out
///
/// levels sweeps b for the multiplicative oracle and sigma for the additive
/// and value-dependent ones; an empty list means the single configured value.
struct ExperimentConfig {
    std::string objective = "piecewise";
    std::size_t dim = 1;

    NoiseKind kind = NoiseKind::exact;
    double b = 10.0;
    double sigma = 0.0;
    double eps_exp = 0.1;
    std::vector<double> levels;

    StepRule rule = StepRule::inverse_b_beta;
    double alpha = 0.05;
    double decay = 0.0;
    BoundsChannel channel = BoundsChannel::derived;

    std::vector<Point> x0{{0.0}};
    std::size_t seeds = 100;
    std::uint64_t k_max = 1'000'000;
    std::uint64_t seed = 1;
    std::uint64_t record_stride = 100;
    double stop_grad_tol = 0.0;
    std::uint64_t stop_window = 1000;
    double gamma = 0.99;
    std::size_t n_draws = 100'000;
    std::string out = "out";

    bool operator==(const ExperimentConfig&) const = default;

    /// The swept values (never empty).
    std::vector<double> level_values() const;
    /// Name of the swept parameter: "b", "sigma" or "none".
    std::string_view level_name() const noexcept;
};

/// Throws ConfigError.
ExperimentConfig parse_config(std::string_view toml_text, std::string_view source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);
std::string to_toml(const ExperimentConfig& cfg);

Objective make_objective(const ExperimentConfig& cfg);
NoiseOracle make_oracle(const ExperimentConfig& cfg, double level, double beta);
StepSchedule make_schedule(const ExperimentConfig& cfg, const NoiseOracle& o, double beta, BoundsChannel channel);
RunConfig make_run_config(const ExperimentConfig& cfg, const Point& x0, std::uint64_t seed);

}  // namespace sgdlab
