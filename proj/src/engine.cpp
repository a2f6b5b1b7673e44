#include "sbsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sbsim/error.hpp"

namespace sbsim {

std::vector<double> Observation::to_vector() const {
    std::vector<double> v(zone_temperatures);
    v.insert(v.end(), {ambient_temperature, supply_air_temperature, supply_water_temperature,
                       setpoints.supply_air_setpoint, setpoints.supply_water_setpoint, meters.electricity,
                       meters.natural_gas, meters.carbon});
    return v;
}

bool Observation::operator==(const Observation& o) const {
    return timestamp == o.timestamp && to_vector() == o.to_vector();
}

std::vector<std::string> observation_fields(const std::vector<std::string>& zone_ids) {
    std::vector<std::string> names;
    for (const auto& z : zone_ids) names.push_back("zone_air_temperature:" + z);
    names.insert(names.end(), {"ambient_temperature", "supply_air_temperature", "supply_water_temperature",
                               "supply_air_setpoint", "supply_water_setpoint", "electricity_energy",
                               "natural_gas_energy", "carbon_emission"});
    return names;
}

double comfort_violation(std::span<const double> zone_temperatures, std::span<const ZoneComfortSpec> specs) {
    double sum = 0.0;
    for (std::size_t z = 0; z < zone_temperatures.size(); ++z) {
        sum += std::max(0.0, zone_temperatures[z] - specs[z].cooling_setpoint) +
               std::max(0.0, specs[z].heating_setpoint - zone_temperatures[z]);
    }
    return sum;
}

RewardBreakdown compute_reward(const EnergyMeters& delta, double comfort_violation_k, const RewardConfig& config) {
    RewardBreakdown r;
    r.carbon_cost = delta.carbon / config.carbon_scale;
    r.energy_cost = (delta.electricity + delta.natural_gas) / config.energy_scale;
    r.comfort_cost = comfort_violation_k / config.comfort_scale;
    r.w_carbon = config.w_carbon;
    r.w_energy = config.w_energy;
    r.w_comfort = config.w_comfort;
    r.total = -(r.w_carbon * r.carbon_cost + r.w_energy * r.energy_cost + r.w_comfort * r.comfort_cost);
    return r;
}

namespace {

std::vector<ZoneComfortSpec> comfort_specs(const BuildingConfig& config, const std::vector<std::string>& ids) {
    std::vector<ZoneComfortSpec> out;
    for (const auto& id : ids) out.push_back(config.comfort_for(id));
    return out;
}

}  // namespace

Simulator::Simulator(BuildingConfig config)
    : config_((config.validate(), std::move(config))),
      zone_ids_(config_.zone_ids()),
      zone_refs_(config_.zone_refs()),
      comfort_(comfort_specs(config_, zone_ids_)),
      grids_(config_.build_grids(config_.initial_temperature)),
      plant_(config_.plant_config(), config_.vav_configs(), static_cast<int>(zone_ids_.size())),
      thermostat_(zone_ids_.size(), Demand::None),
      rng_(config_.seed) {
    for (const auto& g : grids_) power_scratch_.emplace_back(g.size(), 0.0);
    ObservedState initial;
    initial.timestamp = config_.start_time;
    initial.ambient_temperature = config_.ambient_temperature;
    for (const auto& id : zone_ids_) {
        const auto it = config_.initial_zone_temperature.find(id);
        initial.zone_temperatures[id] =
            it == config_.initial_zone_temperature.end() ? config_.initial_temperature : it->second;
    }
    const auto& p = config_.plant_config();
    initial.setpoints = HvacAction{std::clamp(333.15, p.boiler.supply_water_min, p.boiler.supply_water_max),
                                   std::clamp(291.15, p.air_handler.supply_air_min, p.air_handler.supply_air_max)};
    reset(initial);
}

void Simulator::reset(const ObservedState& initial) {
    if (!std::isfinite(initial.ambient_temperature)) {
        throw Error(ErrorCode::InvalidArgument, "initial ambient temperature must be finite");
    }
    std::vector<double> zone_t(zone_ids_.size());
    for (std::size_t z = 0; z < zone_ids_.size(); ++z) {
        const auto it = initial.zone_temperatures.find(zone_ids_[z]);
        if (it == initial.zone_temperatures.end()) {
            throw Error(ErrorCode::MissingZoneReading, "initial observation has no reading for zone '" +
                                                           zone_ids_[z] + "'");
        }
        if (!std::isfinite(it->second)) {
            throw Error(ErrorCode::InvalidArgument, "reading for zone '" + zone_ids_[z] + "' is not finite");
        }
        zone_t[z] = it->second;
    }
    const double ambient = initial.ambient_temperature;

    // Zone id -> building index, per floor.
    std::vector<std::vector<int>> global(grids_.size());
    for (std::size_t z = 0; z < zone_refs_.size(); ++z) {
        auto& map = global[static_cast<std::size_t>(zone_refs_[z].floor)];
        if (map.size() <= static_cast<std::size_t>(zone_refs_[z].local)) map.resize(zone_refs_[z].local + 1);
        map[static_cast<std::size_t>(zone_refs_[z].local)] = static_cast<int>(z);
    }
    double building_mean = 0.0;
    for (double t : zone_t) building_mean += t;
    building_mean /= static_cast<double>(zone_t.size());

    for (std::size_t f = 0; f < grids_.size(); ++f) {
        ThermalGrid& g = grids_[f];
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (g.kind(i) == CellKind::InteriorAir) {
                g.set_temperature(i, zone_t[static_cast<std::size_t>(global[f][static_cast<std::size_t>(g.zone(i))])]);
            } else if (g.kind(i) == CellKind::OutsideAir) {
                g.set_temperature(i, ambient);
            }
        }
        // One pass over walls, reading only air neighbours.
        const int rows = g.rows();
        const int cols = g.cols();
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                const std::size_t i = g.index(r, c);
                const CellKind kind = g.kind(i);
                if (kind != CellKind::ExteriorWall && kind != CellKind::InteriorWall) continue;
                double sum = 0.0;
                int count = 0;
                const int dr[4] = {-1, 1, 0, 0};
                const int dc[4] = {0, 0, -1, 1};
                for (int d = 0; d < 4; ++d) {
                    const int nr = r + dr[d];
                    const int nc = c + dc[d];
                    if (nr < 0 || nc < 0 || nr >= rows || nc >= cols) continue;
                    const std::size_t j = g.index(nr, nc);
                    if (g.kind(j) == CellKind::InteriorAir) {
                        sum += g.temperatures()[j];
                        ++count;
                    }
                }
                const double air = count > 0 ? sum / count : building_mean;
                g.set_temperature(i, kind == CellKind::ExteriorWall ? 0.5 * (air + ambient) : air);
            }
        }
    }

    const double t_s = initial.supply_air_temperature.value_or(initial.setpoints.supply_air_setpoint);
    const double t_b = initial.supply_water_temperature.value_or(initial.setpoints.supply_water_setpoint);
    plant_.reset(t_s, t_b, initial.setpoints);
    std::fill(thermostat_.begin(), thermostat_.end(), Demand::None);
    rng_.seed(config_.seed);
    time_ = initial.timestamp;
    ambient_ = ambient;
    setpoints_ = initial.setpoints;
}

std::vector<double> Simulator::zone_temperatures() const {
    std::vector<double> out;
    out.reserve(zone_refs_.size());
    for (const auto& ref : zone_refs_) {
        out.push_back(grids_[static_cast<std::size_t>(ref.floor)].zone_mean_temperature(ref.local));
    }
    return out;
}

double Simulator::zone_temperature(const std::string& zone_id) const {
    const auto it = std::find(zone_ids_.begin(), zone_ids_.end(), zone_id);
    if (it == zone_ids_.end()) throw Error(ErrorCode::UnknownZone, "unknown zone '" + zone_id + "'");
    const ZoneRef& ref = zone_refs_[static_cast<std::size_t>(it - zone_ids_.begin())];
    return grids_[static_cast<std::size_t>(ref.floor)].zone_mean_temperature(ref.local);
}

Observation Simulator::observe() const {
    Observation o;
    o.timestamp = time_;
    o.zone_temperatures = zone_temperatures();
    o.ambient_temperature = ambient_;
    o.supply_air_temperature = plant_.air_handler().supply_air_temperature;
    o.supply_water_temperature = plant_.hot_water().supply_water_temperature;
    o.setpoints = setpoints_;
    o.meters = plant_.meters();
    return o;
}

StepResult Simulator::step(const HvacAction& action, const AmbientInput& ambient) {
    if (ambient.timestamp != time_) {
        throw Error(ErrorCode::MisalignedTimestamp, "ambient stamped " + format_iso8601(ambient.timestamp) +
                                                        " but the simulator is at " + format_iso8601(time_));
    }
    if (!std::isfinite(ambient.temperature)) {
        throw Error(ErrorCode::InvalidArgument, "ambient temperature must be finite");
    }
    plant_.check_action(action);

    StepResult result;
    const double dt = static_cast<double>(kStepSeconds);

    // (1) thermostat demands from current zone means
    const std::vector<double> zone_t = zone_temperatures();
    for (std::size_t z = 0; z < zone_t.size(); ++z) {
        thermostat_[z] = thermostat_demand(zone_t[z], comfort_[z], thermostat_[z]);
    }
    result.demands = thermostat_;

    // (2) plant
    const PlantStepResult plant = plant_.step(thermostat_, zone_t, action, ambient.temperature, dt);
    for (auto& p : power_scratch_) std::fill(p.begin(), p.end(), 0.0);
    for (const auto& d : plant.diffuser_power) {
        power_scratch_[static_cast<std::size_t>(d.where.floor)][d.where.cell] += d.watts;
    }

    // (3) grid energy balance, (4) shuffle
    for (std::size_t f = 0; f < grids_.size(); ++f) {
        result.diagnostics.push_back(grids_[f].step_energy_balance(dt, power_scratch_[f], ambient.temperature));
    }
    for (auto& g : grids_) g.shuffle_air(rng_);

    // (5) observation and reward
    time_ += kStepSeconds;
    ambient_ = ambient.temperature;
    setpoints_ = action;
    result.observation = observe();
    result.meter_delta = plant.delta;
    result.reward = compute_reward(plant.delta, comfort_violation(result.observation.zone_temperatures, comfort_),
                                   config_.reward);
    return result;
}

Simulator assemble(const BuildingConfig& config) { return Simulator(config); }

std::vector<StepResult> replay(Simulator& sim, std::span<const TimedAction> actions,
                               std::span<const AmbientInput> ambient, int steps) {
    if (steps < 0) throw Error(ErrorCode::InvalidArgument, "step count must be non-negative");
    auto check_lattice = [](Timestamp ts, const char* what) {
        if (!on_step_lattice(ts)) {
            throw Error(ErrorCode::MisalignedTimestamp,
                        std::string(what) + " stamped " + format_iso8601(ts) + " is off the 5-minute lattice");
        }
    };
    std::map<Timestamp, const HvacAction*> action_at;
    std::map<Timestamp, double> ambient_at;
    for (const auto& a : actions) {
        check_lattice(a.timestamp, "action");
        action_at[a.timestamp] = &a.action;
    }
    for (const auto& a : ambient) {
        check_lattice(a.timestamp, "ambient");
        ambient_at[a.timestamp] = a.temperature;
    }
    std::vector<StepResult> out;
    out.reserve(static_cast<std::size_t>(steps));
    for (int k = 0; k < steps; ++k) {
        const Timestamp t = sim.time();
        const auto a = action_at.find(t);
        const auto w = ambient_at.find(t);
        if (a == action_at.end() || w == ambient_at.end()) {
            throw Error(ErrorCode::SeriesGap, std::string(a == action_at.end() ? "action" : "ambient") +
                                                  " series has no sample at " + format_iso8601(t) + " (step " +
                                                  std::to_string(k) + ")");
        }
        out.push_back(sim.step(*a->second, AmbientInput{t, w->second}));
    }
    return out;
}

void write_trajectory_csv(std::ostream& out, const std::vector<std::string>& zone_ids,
                          const std::vector<StepResult>& trajectory) {
    out << "timestamp";
    for (const auto& name : observation_fields(zone_ids)) out << ',' << name;
    out << ",carbon_cost,energy_cost,comfort_cost,reward\n";
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, ",%.10g", v);
        out << buf;
    };
    for (const auto& step : trajectory) {
        out << format_iso8601(step.observation.timestamp);
        for (double v : step.observation.to_vector()) put(v);
        put(step.reward.carbon_cost);
        put(step.reward.energy_cost);
        put(step.reward.comfort_cost);
        put(step.reward.total);
        out << '\n';
    }
}

}  // namespace sbsim
