#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgdlab/config.hpp"
#include "sgdlab/diagnostics.hpp"
#include "sgdlab/io.hpp"

namespace sgdlab {

enum ExitCode : int {
    exit_ok = 0,
    exit_assumption_failure = 1,
    exit_config_error = 2,
    exit_io_error = 3,
    exit_missing_artifact = 4,
};

/// A run or other input artifact referenced by a command does not exist.
class MissingArtifact : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CommandOptions {
    std::filesystem::path config;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
    std::optional<BoundsChannel> channel;
    bool force = false;

    // run / xi / plot
    std::string run_id;               ///< default "run_<seed>"
    std::optional<double> x0;         ///< default: first configured x0
    std::optional<double> level;      ///< default: first configured level
    bool plot = true;
    std::string probes = "0:50";

    // kl
    std::string component;            ///< catalog index or label
    double radius = 0.3;
    std::size_t samples = 2000;
    SampleSide side = SampleSide::both;

    unsigned workers = 0;             ///< 0 = default_worker_count()
};

/// Config file plus command-line overrides.
struct ResolvedConfig {
    ExperimentConfig cfg;
    std::filesystem::path out;
    BoundsChannel channel = BoundsChannel::derived;
    Provenance provenance;
};

ResolvedConfig resolve(const CommandOptions& opt);

struct ChannelCheck {
    BoundsChannel channel = BoundsChannel::derived;
    SummabilityReport summability;
    InfConditionReport inf;
    std::optional<RatioReport> ratio;
    std::string ratio_error;  ///< set when the ratio is undefined
    bool passed() const noexcept { return summability.passed() && inf.passed && ratio && ratio->passed; }
};

struct LevelCheck {
    double level = 0.0;
    double alpha = 0.0;
    ChannelCheck derived;
    ChannelCheck paper;
    const ChannelCheck& on(BoundsChannel c) const noexcept { return c == BoundsChannel::paper ? paper : derived; }
};

/// Conditions i-iii on both bound channels for every swept level.
std::vector<LevelCheck> check_assumptions(const ExperimentConfig& cfg, std::uint64_t horizon = kDefaultCheckHorizon);

struct TableResult {
    OutcomeTable table;
    /// Per (cell, seed) detail in row order.
    struct Run {
        std::size_t row = 0;
        std::uint64_t seed = 0;
        LimitClassification cls;
        Point final_x;
        double min_grad_norm = 0.0;
        bool numeric_failure = false;
    };
    std::vector<Run> runs;
};

inline constexpr double kGradGate = 1e-4;

/// Runs cfg.seeds trajectories per (x0, level) cell and classifies each.
TableResult run_table(const ExperimentConfig& cfg, bool force = false, unsigned workers = 0);

/// "a:b" (inclusive), "a:b:step" or a comma list "k1,k2,...".
std::vector<std::uint64_t> parse_probe_spec(const std::string& spec);

/// Catalog index from "3" or a kind label such as "local-min" (first match).
std::size_t resolve_component(const Objective& f, const std::string& id);

// Subcommands; each returns an ExitCode and prints to os (diagnostics to err).
int cmd_check(const CommandOptions& opt, std::ostream& os, std::ostream& err);
int cmd_run(const CommandOptions& opt, std::ostream& os, std::ostream& err);
int cmd_table(const CommandOptions& opt, std::ostream& os, std::ostream& err);
int cmd_xi(const CommandOptions& opt, std::ostream& os, std::ostream& err);
int cmd_kl(const CommandOptions& opt, std::ostream& os, std::ostream& err);
int cmd_plot(const CommandOptions& opt, std::ostream& os, std::ostream& err);

}  // namespace sgdlab
