#pragma once

// Energy-balance HVAC plant: air handler, hot-water loop with boiler, chiller,
// and VAV boxes driven by zone thermostats. Produces per-diffuser thermal
// power for the grid and metered electricity, gas and carbon.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sbsim {

inline constexpr double kAirSpecificHeat = 1006.0;  // J/kg/K

enum class Demand { None, Heating, Cooling };

const char* to_string(Demand demand);

struct ZoneComfortSpec {
    double heating_setpoint = 293.15;  // K, lower bound of the comfort band
    double cooling_setpoint = 297.15;  // K, upper bound
    double deadband = 0.5;             // K

    bool valid() const;
};

/// Thermostat with hysteresis. Heating starts below the heating setpoint and
/// holds until the zone is `deadband` above it; cooling mirrors that above the
/// cooling setpoint.
Demand thermostat_demand(double zone_temperature, const ZoneComfortSpec& spec, Demand previous = Demand::None);

/// Mass-weighted mix of return and outside air at equal specific heat.
double mix_air(double return_temperature, double ambient_temperature, double recirc_fraction);

struct EmissionFactors {
    double electricity = 1.1e-7;  // kg CO2e per J
    double natural_gas = 5.0e-8;  // kg CO2e per J
};

double carbon_from_energy(double electricity_j, double gas_j, const EmissionFactors& factors);

struct EnergyMeters {
    double electricity = 0.0;  // J
    double natural_gas = 0.0;  // J
    double carbon = 0.0;       // kg CO2e

    EnergyMeters& operator+=(const EnergyMeters& other) {
        electricity += other.electricity;
        natural_gas += other.natural_gas;
        carbon += other.carbon;
        return *this;
    }
};

struct HvacAction {
    double supply_water_setpoint = 333.15;  // K
    double supply_air_setpoint = 291.15;    // K
};

struct AirHandlerConfig {
    double intake_fan_power = 500.0;   // W
    double exhaust_fan_power = 500.0;  // W
    double recirc_fraction = 0.3;
    double time_constant = 900.0;      // s
    double supply_air_min = 285.15;    // K
    double supply_air_max = 300.15;    // K
};

struct BoilerConfig {
    double efficiency = 0.9;
    double pump_power = 300.0;         // W
    double time_constant = 900.0;      // s
    double loop_loss_fraction = 0.05;
    double supply_water_min = 310.15;  // K
    double supply_water_max = 355.15;  // K
};

struct ChillerConfig {
    double cop = 3.5;
    double pump_power = 300.0;  // W
};

struct DiffuserRef {
    int floor = 0;
    std::size_t cell = 0;

    bool operator==(const DiffuserRef&) const = default;
};

struct VavConfig {
    std::string device_id;
    int zone = 0;                        // building-wide zone index
    double design_flow = 0.5;            // kg/s
    double reheat_effectiveness = 0.8;
    double min_damper = 0.2;
    std::vector<DiffuserRef> diffusers;
};

struct PlantConfig {
    AirHandlerConfig air_handler;
    BoilerConfig boiler;
    ChillerConfig chiller;
    EmissionFactors emissions;
};

struct AirHandlerState {
    double supply_air_setpoint = 0.0;
    double supply_air_temperature = 0.0;
    double intake_flow = 0.0;    // kg/s
    double exhaust_flow = 0.0;   // kg/s
    double recirc_flow = 0.0;    // kg/s
    double exhaust_temperature = 0.0;
    double mixed_air_temperature = 0.0;
    double intake_fan_power = 0.0;   // W
    double exhaust_fan_power = 0.0;  // W
};

struct HotWaterState {
    double supply_water_setpoint = 0.0;
    double supply_water_temperature = 0.0;
    double boiler_gas_power = 0.0;  // W of heat into the water loop (gas draw is this / efficiency)
    double pump_power = 0.0;        // W
    double boiler_efficiency = 0.9;
};

struct ChillerState {
    double compressor_power = 0.0;    // W
    double coolant_pump_power = 0.0;  // W
    double cop = 3.5;
};

struct VavState {
    std::string device_id;
    int zone = 0;
    double design_flow = 0.0;
    double damper_fraction = 0.0;
    double reheat_effectiveness = 0.0;
    double supplied_power = 0.0;      // W into the zone (negative = cooling)
    double recirculated_power = 0.0;  // W, return-air enthalpy flow relative to supply (diagnostic)
};

struct DiffuserPower {
    DiffuserRef where;
    double watts = 0.0;
};

struct PlantStepResult {
    std::vector<DiffuserPower> diffuser_power;
    std::vector<double> zone_power;  // W per zone
    EnergyMeters delta;
    double cooling_delivered = 0.0;  // W, >= 0
    double reheat_delivered = 0.0;   // W, >= 0
};

class HvacPlant {
public:
    HvacPlant(PlantConfig config, std::vector<VavConfig> vavs, int zone_count);

    /// Throws ActuatorLimitViolation when a setpoint is outside its limits.
    void check_action(const HvacAction& action) const;

    /// Sets loop temperatures and setpoints, zeroes meters and device powers.
    void reset(double supply_air_temperature, double supply_water_temperature, const HvacAction& setpoints);

    /// One plant interval. `demands` and `zone_temperatures` are indexed by zone.
    PlantStepResult step(std::span<const Demand> demands, std::span<const double> zone_temperatures,
                         const HvacAction& action, double ambient, double dt);

    const PlantConfig& config() const { return config_; }
    const AirHandlerState& air_handler() const { return air_; }
    const HotWaterState& hot_water() const { return water_; }
    const ChillerState& chiller() const { return chiller_; }
    const std::vector<VavState>& vavs() const { return vav_state_; }
    const std::vector<VavConfig>& vav_configs() const { return vavs_; }
    const EnergyMeters& meters() const { return meters_; }
    int zone_count() const { return zone_count_; }

private:
    PlantConfig config_;
    std::vector<VavConfig> vavs_;
    int zone_count_;
    AirHandlerState air_;
    HotWaterState water_;
    ChillerState chiller_;
    std::vector<VavState> vav_state_;
    EnergyMeters meters_;
};

}  // namespace sbsim
