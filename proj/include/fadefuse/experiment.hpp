#pragma once

// Experiment configuration and the sweep pipelines behind the CLI.

#include "fadefuse/allocation.hpp"
#include "fadefuse/channel.hpp"
#include "fadefuse/diversity.hpp"
#include "fadefuse/errors.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace fadefuse {

/// Flat "section.key" -> raw value view of an INI-style file.
using IniValues = std::map<std::string, std::string>;

/// Parses `[section]` headers and `key = value` lines; `#` and `;` start
/// comments. Keys outside any section live under "experiment".
IniValues parse_ini(std::istream& in);

/// Applies "section.key=value" overrides on top of parsed values.
void apply_overrides(IniValues& values, const std::vector<std::string>& overrides);

struct SweepAxis {
    enum class Kind { power, distortion };
    Kind kind = Kind::power;
    double start = 0.0;  ///< watts for power sweeps
    double stop = 0.0;
    std::size_t points = 0;
    bool log_spaced = true;

    std::vector<double> values() const;
};

/// Scenario names; each fixes the CSV column layout.
namespace scenario {
inline constexpr const char* kDistortion = "fig3-distortion";
inline constexpr const char* kOutage = "fig4-outage";
inline constexpr const char* kActive = "fig5-active";
inline constexpr const char* kCompare = "fig6-compare";
inline constexpr const char* kCapped = "fig7-capped";
inline constexpr const char* kMinPower = "fig8-minpower";
}  // namespace scenario

struct ExperimentConfig {
    std::string scenario = scenario::kOutage;
    std::vector<std::size_t> sensor_counts;
    ChannelConfig channel = reference_setup();
    Policy::Kind policy = Policy::Kind::equal;
    double d0 = 0.02;
    double cap_share = 1.5;
    SweepAxis sweep;
    MonteCarloOptions monte_carlo;
    std::string output = "-";

    /// Canonical text of every setting that influences the CSV; hashed into the
    /// metadata header.
    std::string canonical() const;
    void validate() const;
};

/// Preset for a scenario, before any file or flag values are applied.
ExperimentConfig scenario_preset(const std::string& name);

/// Preset for values["experiment.scenario"] with every recognized key applied.
/// Unknown keys are a ConfigError.
ExperimentConfig build_experiment(const IniValues& values);

std::uint64_t fnv1a64(std::string_view text) noexcept;

/// Raised when every point of a minimum-power sweep is infeasible.
class InfeasibleSweep : public Error {
public:
    using Error::Error;
};

struct RunSummary {
    std::size_t rows = 0;
    double wall_seconds = 0.0;
};

/// Writes `#` metadata lines, a header row, and one row per sweep point.
RunSummary run_experiment(const ExperimentConfig& config, std::ostream& csv);

/// Snapshot text format: a `sigma_theta_sq <value>` line, then one
/// `<gamma> <s>` line per sensor. gamma may be `inf` or `noiseless`.
/// Blank lines and `#` comments are ignored.
Snapshot parse_snapshot(std::istream& in);

enum class AllocPolicy { equal, max_performance, capped, min_power, l2_min_power };

struct AllocRequest {
    AllocPolicy policy = AllocPolicy::max_performance;
    double budget = 0.0;  ///< watts; sum-power policies
    double target = 0.0;  ///< distortion; target policies
    std::vector<double> caps;  ///< explicit caps, or empty for cap_share
    double cap_share = 1.5;
    bool key_value = false;  ///< machine-readable output
};

/// Solves one snapshot and prints the per-sensor table.
void allocate_once(const Snapshot& snapshot, const AllocRequest& request, std::ostream& out);

}  // namespace fadefuse
