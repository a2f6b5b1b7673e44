#pragma once

// Telemetry ingestion, N-step fidelity metrics and bounded black-box
// calibration of the physical parameter vector.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "sbsim/building.hpp"
#include "sbsim/engine.hpp"

namespace sbsim {

// ---------------------------------------------------------------------------
// Telemetry
// ---------------------------------------------------------------------------

struct TelemetryRecord {
    Timestamp timestamp = 0;
    std::map<std::string, double> zone_temperatures;  // K
    double ambient_temperature = 0.0;
    HvacAction setpoints;
    std::optional<double> supply_air_temperature;
    std::optional<double> supply_water_temperature;
    std::map<std::string, double> extra;  // "device_id/field" for any other rows (e.g. meters)
};

struct TelemetrySeries {
    std::vector<std::string> zones;  // sorted
    std::vector<TelemetryRecord> records;

    std::size_t size() const { return records.size(); }
    ObservedState observed(std::size_t index) const;
    TimedAction action(std::size_t index) const;
    AmbientInput ambient(std::size_t index) const;
};

/// CSV with header `timestamp,device_id,field,value`. zone_air_temperature
/// rows name the zone in device_id. Throws MisalignedTimestamp,
/// MissingZoneReading, DuplicateRecord, SeriesGap or DataError.
TelemetrySeries parse_telemetry(std::string_view text, const std::string& source = {});
TelemetrySeries load_telemetry(const std::filesystem::path& path);
void write_telemetry_csv(std::ostream& out, const TelemetrySeries& series);

// ---------------------------------------------------------------------------
// Fidelity metrics
// ---------------------------------------------------------------------------

/// Mean temperature of a zone's air cells.
double zone_mean_temp(const ThermalGrid& grid, int zone);
double zone_mean_temp(const Simulator& sim, const std::string& zone_id);

/// Median of a multiset; even counts average the two middle values.
double median_of(std::vector<double> values);

struct SpatialError {
    double mae = 0.0;
    double median = 0.0;
    std::map<std::string, double> abs_errors;  // per zone
};

/// epsilon_t = (1/Z) * sum_z |real_z - sim_z|. Throws ZoneSetMismatch.
SpatialError spatial_error(const std::map<std::string, double>& real, const std::map<std::string, double>& sim);
SpatialError spatial_error(const std::map<std::string, double>& real, const Simulator& sim);

struct FidelityReport {
    int n = 0;
    double mae = 0.0;     // epsilon at step N-1
    double median = 0.0;  // median |error| at step N-1
    std::map<std::string, double> zone_errors;  // |real - sim| at step N-1
    std::vector<double> epsilon;                // epsilon_t, t = 0..N-1
    bool failed = false;                        // simulation blew up; mae = +inf
    std::string failure;
};

/// Per-step zone temperatures kept for drift plots and heatmaps.
struct NStepRun {
    FidelityReport report;
    std::vector<std::map<std::string, double>> sim_zone_temperatures;  // t = 0..N-1 (up to failure)
    std::optional<Simulator> final_state;
};

/// Reset from telemetry[start], replay the recorded setpoints and ambient for
/// N-1 steps, score against telemetry[start + N - 1].
NStepRun n_step_run(const BuildingConfig& config, const Theta& theta, const TelemetrySeries& telemetry, int n,
                    std::size_t start = 0);
FidelityReport n_step_eval(const BuildingConfig& config, const Theta& theta, const TelemetrySeries& telemetry, int n,
                           std::size_t start = 0);

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

enum class SearchStrategy { Quasirandom, CoordinateDescent, NelderMeadBoxed };

const char* to_string(SearchStrategy s);

struct Interval {
    std::size_t start = 0;
    int n = 72;

    bool overlaps(const Interval& other) const;
};

struct ParamRange {
    ThetaParam param;
    double min;
    double max;
};

struct CalibrationSpec {
    std::vector<ParamRange> params;  // searched; others stay at the config's value
    int budget = 100;
    std::uint64_t seed = 0;
    SearchStrategy strategy = SearchStrategy::Quasirandom;
    Interval objective{0, 72};
    std::vector<Interval> validation;

    /// Every parameter of the bounds table with its full range.
    static CalibrationSpec full_box();

    /// Throws BoundsViolation or ConfigError.
    void validate() const;

    Theta midpoint(const Theta& base) const;
};

/// Lines: `param <name> <min> <max>`, `budget <n>`, `seed <n>`,
/// `strategy <quasirandom|coordinate-descent|nelder-mead-boxed>`,
/// `objective_interval <start> <N>`, `validation_interval <start> <N>`.
CalibrationSpec parse_calibration_spec(std::string_view text, const std::string& source = {});
CalibrationSpec load_calibration_spec(const std::filesystem::path& path);

struct EvaluationRecord {
    int index = 0;
    Theta theta;
    double objective = 0.0;     // +inf for failed candidates
    double running_best = 0.0;
};

struct CalibrationResult {
    Theta best_theta;
    double best_objective = 0.0;
    int best_index = -1;
    std::vector<EvaluationRecord> log;
    bool degenerate = false;  // every candidate failed
    double wall_seconds = 0.0;
    double mean_evaluation_seconds = 0.0;
};

/// Point i of the seeded, Cranley-Patterson shifted Halton sequence in [0,1)^dims.
std::vector<double> halton_point(std::size_t index, std::size_t dims, const std::vector<double>& shift);

/// Evaluates `budget` candidates. Quasirandom candidates run on `jobs`
/// threads; the argmin is reduced in candidate order (lowest index wins ties).
CalibrationResult calibrate(const BuildingConfig& config, const CalibrationSpec& spec,
                            const TelemetrySeries& telemetry, int jobs = 1);

void write_calibration_log_csv(std::ostream& out, const CalibrationResult& result);

// ---------------------------------------------------------------------------
// Synthetic telemetry
// ---------------------------------------------------------------------------

struct SyntheticScenario {
    Timestamp start = 1688607600;  // 2023-07-06T01:40:00Z
    int records = 72;
    double ambient_mean = 288.15;       // K
    double ambient_amplitude = 5.0;     // K, diurnal cosine peaking at 15:00 UTC
    std::map<std::string, double> initial_zone_temperatures;  // missing zones use the config value
    HvacAction policy;
    double supply_water_swing = 0.0;    // K, hourly square-wave alternation of the water setpoint
};

/// Runs the simulator under `theta` and records what a telemetry feed would
/// contain: record 0 is the initial state, record k the state after k steps.
TelemetrySeries generate_synthetic_telemetry(const BuildingConfig& config, const Theta& theta,
                                             const SyntheticScenario& scenario);

}  // namespace sbsim
