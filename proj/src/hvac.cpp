#include "sbsim/hvac.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sbsim/error.hpp"

namespace sbsim {

const char* to_string(Demand demand) {
    switch (demand) {
        case Demand::Heating: return "heating";
        case Demand::Cooling: return "cooling";
        case Demand::None: break;
    }
    return "none";
}

bool ZoneComfortSpec::valid() const {
    return std::isfinite(heating_setpoint) && std::isfinite(cooling_setpoint) && std::isfinite(deadband) &&
           deadband >= 0.0 && heating_setpoint + deadband < cooling_setpoint;
}

Demand thermostat_demand(double zone_temperature, const ZoneComfortSpec& spec, Demand previous) {
    if (previous == Demand::Heating && zone_temperature < spec.heating_setpoint + spec.deadband) {
        return Demand::Heating;
    }
    if (previous == Demand::Cooling && zone_temperature > spec.cooling_setpoint - spec.deadband) {
        return Demand::Cooling;
    }
    if (zone_temperature < spec.heating_setpoint) return Demand::Heating;
    if (zone_temperature > spec.cooling_setpoint) return Demand::Cooling;
    return Demand::None;
}

double mix_air(double return_temperature, double ambient_temperature, double recirc_fraction) {
    return recirc_fraction * return_temperature + (1.0 - recirc_fraction) * ambient_temperature;
}

double carbon_from_energy(double electricity_j, double gas_j, const EmissionFactors& factors) {
    return electricity_j * factors.electricity + gas_j * factors.natural_gas;
}

HvacPlant::HvacPlant(PlantConfig config, std::vector<VavConfig> vavs, int zone_count)
    : config_(config), vavs_(std::move(vavs)), zone_count_(zone_count) {
    const auto& ahu = config_.air_handler;
    const auto& boiler = config_.boiler;
    if (!(ahu.recirc_fraction >= 0.0 && ahu.recirc_fraction <= 1.0) || !(ahu.time_constant > 0.0) ||
        !(ahu.supply_air_min <= ahu.supply_air_max) || ahu.intake_fan_power < 0.0 || ahu.exhaust_fan_power < 0.0) {
        throw Error(ErrorCode::ConfigError, "invalid air handler constants");
    }
    if (!(boiler.efficiency > 0.0 && boiler.efficiency <= 1.0) || !(boiler.time_constant > 0.0) ||
        boiler.loop_loss_fraction < 0.0 || boiler.pump_power < 0.0 ||
        !(boiler.supply_water_min <= boiler.supply_water_max)) {
        throw Error(ErrorCode::ConfigError, "invalid boiler constants");
    }
    if (!(config_.chiller.cop > 0.0) || config_.chiller.pump_power < 0.0) {
        throw Error(ErrorCode::ConfigError, "invalid chiller constants");
    }
    if (config_.emissions.electricity < 0.0 || config_.emissions.natural_gas < 0.0) {
        throw Error(ErrorCode::ConfigError, "emission factors must be non-negative");
    }
    for (const auto& vav : vavs_) {
        if (vav.zone < 0 || vav.zone >= zone_count_) {
            throw Error(ErrorCode::ConfigError, "vav " + vav.device_id + " references an unknown zone");
        }
        if (!(vav.design_flow >= 0.0) || !(vav.reheat_effectiveness >= 0.0 && vav.reheat_effectiveness <= 1.0) ||
            !(vav.min_damper >= 0.0 && vav.min_damper <= 1.0) || vav.diffusers.empty()) {
            throw Error(ErrorCode::ConfigError, "invalid constants for vav " + vav.device_id);
        }
        VavState s;
        s.device_id = vav.device_id;
        s.zone = vav.zone;
        s.design_flow = vav.design_flow;
        s.reheat_effectiveness = vav.reheat_effectiveness;
        vav_state_.push_back(s);
    }
    chiller_.cop = config_.chiller.cop;
    water_.boiler_efficiency = config_.boiler.efficiency;
    reset(config_.air_handler.supply_air_min, config_.boiler.supply_water_min,
          HvacAction{config_.boiler.supply_water_min, config_.air_handler.supply_air_min});
}

void HvacPlant::check_action(const HvacAction& action) const {
    const auto& ahu = config_.air_handler;
    const auto& boiler = config_.boiler;
    if (!(action.supply_water_setpoint >= boiler.supply_water_min &&
          action.supply_water_setpoint <= boiler.supply_water_max)) {
        std::ostringstream msg;
        msg << "supply water setpoint " << action.supply_water_setpoint << " K outside [" << boiler.supply_water_min
            << ", " << boiler.supply_water_max << "]";
        throw Error(ErrorCode::ActuatorLimitViolation, msg.str());
    }
    if (!(action.supply_air_setpoint >= ahu.supply_air_min && action.supply_air_setpoint <= ahu.supply_air_max)) {
        std::ostringstream msg;
        msg << "supply air setpoint " << action.supply_air_setpoint << " K outside [" << ahu.supply_air_min << ", "
            << ahu.supply_air_max << "]";
        throw Error(ErrorCode::ActuatorLimitViolation, msg.str());
    }
}

void HvacPlant::reset(double supply_air_temperature, double supply_water_temperature, const HvacAction& setpoints) {
    air_ = AirHandlerState{};
    air_.supply_air_setpoint = setpoints.supply_air_setpoint;
    air_.supply_air_temperature = supply_air_temperature;
    water_ = HotWaterState{};
    water_.boiler_efficiency = config_.boiler.efficiency;
    water_.supply_water_setpoint = setpoints.supply_water_setpoint;
    water_.supply_water_temperature = supply_water_temperature;
    chiller_ = ChillerState{};
    chiller_.cop = config_.chiller.cop;
    for (auto& s : vav_state_) {
        s.damper_fraction = 0.0;
        s.supplied_power = 0.0;
        s.recirculated_power = 0.0;
    }
    meters_ = EnergyMeters{};
}

PlantStepResult HvacPlant::step(std::span<const Demand> demands, std::span<const double> zone_temperatures,
                                const HvacAction& action, double ambient, double dt) {
    if (demands.size() != static_cast<std::size_t>(zone_count_) ||
        zone_temperatures.size() != static_cast<std::size_t>(zone_count_)) {
        throw Error(ErrorCode::InvalidArgument, "plant step expects one demand and temperature per zone");
    }
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
    check_action(action);

    // First-order lag of both loops toward their setpoints.
    air_.supply_air_setpoint = action.supply_air_setpoint;
    water_.supply_water_setpoint = action.supply_water_setpoint;
    const double air_gain = 1.0 - std::exp(-dt / config_.air_handler.time_constant);
    const double water_gain = 1.0 - std::exp(-dt / config_.boiler.time_constant);
    air_.supply_air_temperature += (action.supply_air_setpoint - air_.supply_air_temperature) * air_gain;
    water_.supply_water_temperature += (action.supply_water_setpoint - water_.supply_water_temperature) * water_gain;
    const double t_supply = air_.supply_air_temperature;
    const double t_water = water_.supply_water_temperature;

    PlantStepResult out;
    out.zone_power.assign(static_cast<std::size_t>(zone_count_), 0.0);
    double total_flow = 0.0;
    double return_enthalpy = 0.0;
    for (std::size_t v = 0; v < vavs_.size(); ++v) {
        const VavConfig& cfg = vavs_[v];
        VavState& state = vav_state_[v];
        const auto zone = static_cast<std::size_t>(cfg.zone);
        const Demand demand = demands[zone];
        const double t_zone = zone_temperatures[zone];

        state.damper_fraction = demand == Demand::None ? cfg.min_damper : 1.0;
        const double flow = cfg.design_flow * state.damper_fraction;
        double power = 0.0;
        if (demand == Demand::Cooling) {
            power = std::min(0.0, flow * kAirSpecificHeat * (t_supply - t_zone));
            out.cooling_delivered -= power;
        } else if (demand == Demand::Heating) {
            power = std::max(0.0, cfg.reheat_effectiveness * flow * kAirSpecificHeat * (t_water - t_zone));
            out.reheat_delivered += power;
        }
        state.supplied_power = power;
        state.recirculated_power = flow * kAirSpecificHeat * (t_zone - t_supply);
        out.zone_power[zone] += power;

        const double share = power / static_cast<double>(cfg.diffusers.size());
        for (const DiffuserRef& d : cfg.diffusers) out.diffuser_power.push_back({d, share});

        total_flow += flow;
        return_enthalpy += flow * t_zone;
    }

    // Air handler flows and temperatures.
    const double recirc = config_.air_handler.recirc_fraction;
    const double t_return = total_flow > 0.0 ? return_enthalpy / total_flow : ambient;
    air_.recirc_flow = recirc * total_flow;
    air_.intake_flow = total_flow - air_.recirc_flow;
    air_.exhaust_flow = air_.intake_flow;
    air_.exhaust_temperature = t_return;
    air_.mixed_air_temperature = mix_air(t_return, ambient, recirc);
    const bool air_running = total_flow > 0.0;
    air_.intake_fan_power = air_running ? config_.air_handler.intake_fan_power : 0.0;
    air_.exhaust_fan_power = air_running ? config_.air_handler.exhaust_fan_power : 0.0;

    chiller_.compressor_power = out.cooling_delivered / config_.chiller.cop;
    chiller_.coolant_pump_power = out.cooling_delivered > 0.0 ? config_.chiller.pump_power : 0.0;

    water_.boiler_gas_power = out.reheat_delivered * (1.0 + config_.boiler.loop_loss_fraction);
    water_.pump_power = out.reheat_delivered > 0.0 ? config_.boiler.pump_power : 0.0;

    const double electric_power = air_.intake_fan_power + air_.exhaust_fan_power + chiller_.compressor_power +
                                  chiller_.coolant_pump_power + water_.pump_power;
    out.delta.electricity = electric_power * dt;
    out.delta.natural_gas = water_.boiler_gas_power * dt / config_.boiler.efficiency;
    out.delta.carbon = carbon_from_energy(out.delta.electricity, out.delta.natural_gas, config_.emissions);
    meters_ += out.delta;
    return out;
}

}  // namespace sbsim
