#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgdlab/diagnostics.hpp"
#include "sgdlab/engine.hpp"

namespace sgdlab {

/// A file could not be written or read.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Metadata stamped into every emitted file.
struct Provenance {
    std::string config_toml;
    std::uint64_t master_seed = 0;
};

struct RunMeta {
    Provenance provenance;
    std::string run_id;
    Point x0;
    double level = 0.0;
    std::string channel = "derived";
};

/// Shortest text that parses back to the same double.
std::string format_double(double v);

/// '#' comment header (provenance and run metadata), then k,x,f,grad_norm rows
/// (x0..x{N-1} when N > 1) for every stored iterate.
void write_trajectory_csv(std::ostream& os, const Trace& trace, const RunMeta& meta);

struct LoadedTrajectory {
    Trace trace;
    Provenance provenance;
};

/// Inverse of write_trajectory_csv. Throws IoError on malformed input.
LoadedTrajectory read_trajectory_csv(std::istream& is);

std::string run_report_json(const TrajectoryRecord& rec, const LimitClassification& cls, const RunMeta& meta);

struct OutcomeRow {
    Point x0;
    double level = 0.0;
    LimitLabel majority = LimitLabel::none;
    std::map<LimitLabel, std::size_t> labels;
    std::map<AboveLimit, std::size_t> above;
    std::size_t n_seeds = 0;
    /// Seeds whose running minimum of the gradient norm fell below the gate.
    std::size_t grad_converged = 0;

    bool operator==(const OutcomeRow&) const = default;
    std::size_t count(LimitLabel label) const;
};

struct OutcomeTable {
    std::string level_name = "level";
    std::vector<OutcomeRow> rows;

    bool operator==(const OutcomeTable&) const = default;
};

/// Builds a row; the majority label is the most frequent one (earliest label on ties).
OutcomeRow make_outcome_row(const Point& x0, double level, const std::vector<LimitClassification>& cls,
                            const std::vector<TrajectoryRecord>& runs, double grad_gate);

std::string render_table(const OutcomeTable& table);
/// Histograms are encoded as "label:count;label:count".
void write_table_csv(std::ostream& os, const OutcomeTable& table, const Provenance& prov);
OutcomeTable read_table_csv(std::istream& is);
std::string table_json(const OutcomeTable& table, const Provenance& prov);

struct PlotOptions {
    double x_lo = -2.0;
    double x_hi = 20.0;
    std::size_t max_points = 2000;  ///< trajectory points after decimation
    std::string title;
};

/// Function graph with trajectory overlay; start marker pink, end marker blue.
std::string render_svg(const Objective& f, const Trace& trace, const Provenance& prov, const PlotOptions& opt = {});

/// Writes text to path, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace sgdlab
