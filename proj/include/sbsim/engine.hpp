#pragma once

// Simulation loop and control interface. One step is a five-minute interval:
// thermostat demands, plant, grid energy balance, air shuffle, observation.

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sbsim/building.hpp"
#include "sbsim/grid.hpp"
#include "sbsim/hvac.hpp"
#include "sbsim/rng.hpp"
#include "sbsim/timeutil.hpp"

namespace sbsim {

/// Measured state used to initialize a simulator.
struct ObservedState {
    Timestamp timestamp = 0;
    std::map<std::string, double> zone_temperatures;  // K, by zone id
    double ambient_temperature = 0.0;
    HvacAction setpoints;
    std::optional<double> supply_air_temperature;    // defaults to the setpoint
    std::optional<double> supply_water_temperature;  // defaults to the setpoint
};

/// Fixed-length state vector S_t. Ordering is given by observation_fields().
struct Observation {
    Timestamp timestamp = 0;
    std::vector<double> zone_temperatures;  // K, building zone order
    double ambient_temperature = 0.0;
    double supply_air_temperature = 0.0;
    double supply_water_temperature = 0.0;
    HvacAction setpoints;
    EnergyMeters meters;

    std::vector<double> to_vector() const;
    bool operator==(const Observation&) const;
};

std::vector<std::string> observation_fields(const std::vector<std::string>& zone_ids);

struct AmbientInput {
    Timestamp timestamp = 0;  // start of the interval
    double temperature = 0.0;
};

struct TimedAction {
    Timestamp timestamp = 0;  // start of the interval
    HvacAction action;
};

/// Costs are normalized by the configured reference scales.
struct RewardBreakdown {
    double carbon_cost = 0.0;
    double energy_cost = 0.0;
    double comfort_cost = 0.0;
    double w_carbon = 0.0;
    double w_energy = 0.0;
    double w_comfort = 0.0;
    double total = 0.0;  // -(w_carbon*carbon + w_energy*energy + w_comfort*comfort)
};

/// Kelvin outside the comfort band, summed over zones.
double comfort_violation(std::span<const double> zone_temperatures, std::span<const ZoneComfortSpec> specs);

RewardBreakdown compute_reward(const EnergyMeters& delta, double comfort_violation_k, const RewardConfig& config);

struct StepResult {
    Observation observation;
    RewardBreakdown reward;
    EnergyMeters meter_delta;
    std::vector<Demand> demands;
    std::vector<StepDiagnostics> diagnostics;  // per floor
};

class Simulator {
public:
    explicit Simulator(BuildingConfig config);

    /// Air cells take their zone's reading, walls are interpolated from
    /// adjacent air (exterior walls also average in ambient), meters zero,
    /// thermostats idle, rng reseeded. Throws MissingZoneReading.
    void reset(const ObservedState& initial);

    /// Throws ActuatorLimitViolation, NonFiniteTemperature, MisalignedTimestamp.
    StepResult step(const HvacAction& action, const AmbientInput& ambient);

    Observation observe() const;
    std::vector<double> zone_temperatures() const;
    double zone_temperature(const std::string& zone_id) const;  // throws UnknownZone

    const BuildingConfig& config() const { return config_; }
    const std::vector<std::string>& zone_ids() const { return zone_ids_; }
    const std::vector<ZoneRef>& zone_refs() const { return zone_refs_; }
    std::vector<std::string> observation_fields() const { return sbsim::observation_fields(zone_ids_); }
    const std::vector<ThermalGrid>& grids() const { return grids_; }
    std::vector<ThermalGrid>& grids() { return grids_; }
    const HvacPlant& plant() const { return plant_; }
    Timestamp time() const { return time_; }
    double ambient_temperature() const { return ambient_; }

private:
    BuildingConfig config_;
    std::vector<std::string> zone_ids_;
    std::vector<ZoneRef> zone_refs_;
    std::vector<ZoneComfortSpec> comfort_;
    std::vector<ThermalGrid> grids_;
    HvacPlant plant_;
    std::vector<Demand> thermostat_;
    std::vector<std::vector<double>> power_scratch_;
    Rng rng_;
    Timestamp time_ = 0;
    double ambient_ = 0.0;
    HvacAction setpoints_;
};

/// Validated simulator for a configuration (one grid per floor, one plant).
Simulator assemble(const BuildingConfig& config);

/// Runs `steps` intervals from the simulator's current time, taking the action
/// and ambient stamped at each interval start. Throws MisalignedTimestamp for
/// off-lattice stamps and SeriesGap when an interval is missing.
std::vector<StepResult> replay(Simulator& sim, std::span<const TimedAction> actions,
                               std::span<const AmbientInput> ambient, int steps);

/// One row per step: timestamp, every observation field, reward breakdown.
void write_trajectory_csv(std::ostream& out, const std::vector<std::string>& zone_ids,
                          const std::vector<StepResult>& trajectory);

}  // namespace sbsim
