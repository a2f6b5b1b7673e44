#include <algorithm>
#include <cmath>
#include <limits>

#include "sbsim/calib.hpp"
#include "sbsim/error.hpp"

namespace sbsim {

double zone_mean_temp(const ThermalGrid& grid, int zone) { return grid.zone_mean_temperature(zone); }

double zone_mean_temp(const Simulator& sim, const std::string& zone_id) { return sim.zone_temperature(zone_id); }

double median_of(std::vector<double> values) {
    if (values.empty()) throw Error(ErrorCode::InvalidArgument, "median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

SpatialError spatial_error(const std::map<std::string, double>& real, const std::map<std::string, double>& sim) {
    if (real.empty()) throw Error(ErrorCode::ZoneSetMismatch, "no zones to compare");
    if (real.size() != sim.size()) {
        throw Error(ErrorCode::ZoneSetMismatch, "real has " + std::to_string(real.size()) + " zones, sim has " +
                                                    std::to_string(sim.size()));
    }
    SpatialError out;
    std::vector<double> errors;
    double sum = 0.0;
    for (const auto& [zone, t_real] : real) {
        const auto it = sim.find(zone);
        if (it == sim.end()) throw Error(ErrorCode::ZoneSetMismatch, "zone '" + zone + "' missing from simulation");
        const double e = std::abs(t_real - it->second);
        out.abs_errors[zone] = e;
        errors.push_back(e);
        sum += e;
    }
    out.mae = sum / static_cast<double>(errors.size());
    out.median = median_of(std::move(errors));
    return out;
}

SpatialError spatial_error(const std::map<std::string, double>& real, const Simulator& sim) {
    std::map<std::string, double> simulated;
    const auto temps = sim.zone_temperatures();
    for (std::size_t z = 0; z < temps.size(); ++z) simulated[sim.zone_ids()[z]] = temps[z];
    return spatial_error(real, simulated);
}

namespace {

std::map<std::string, double> zone_map(const Simulator& sim) {
    std::map<std::string, double> out;
    const auto temps = sim.zone_temperatures();
    for (std::size_t z = 0; z < temps.size(); ++z) out[sim.zone_ids()[z]] = temps[z];
    return out;
}

}  // namespace

NStepRun n_step_run(const BuildingConfig& config, const Theta& theta, const TelemetrySeries& telemetry, int n,
                    std::size_t start) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "N must be at least 1");
    if (start + static_cast<std::size_t>(n) > telemetry.size()) {
        throw Error(ErrorCode::SeriesGap, "telemetry has " + std::to_string(telemetry.size()) +
                                              " records; interval needs " + std::to_string(start + n));
    }
    theta.check_bounds();
    BuildingConfig cfg = config;
    cfg.theta = theta;

    {
        auto ids = cfg.zone_ids();
        std::sort(ids.begin(), ids.end());
        if (ids != telemetry.zones) throw Error(ErrorCode::ZoneSetMismatch, "telemetry zones differ from the building's");
    }

    NStepRun run;
    FidelityReport& report = run.report;
    report.n = n;
    Simulator sim(cfg);
    sim.reset(telemetry.observed(start));
    auto record = [&](std::size_t t) {
        auto sim_t = zone_map(sim);
        const SpatialError e = spatial_error(telemetry.records[start + t].zone_temperatures, sim_t);
        report.epsilon.push_back(e.mae);
        run.sim_zone_temperatures.push_back(std::move(sim_t));
        return e;
    };
    SpatialError last = record(0);
    try {
        for (int t = 1; t < n; ++t) {
            const std::size_t k = start + static_cast<std::size_t>(t) - 1;
            sim.step(telemetry.records[k].setpoints, telemetry.ambient(k));
            last = record(static_cast<std::size_t>(t));
        }
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NonFiniteTemperature) throw;
        report.failed = true;
        report.failure = e.what();
        report.mae = std::numeric_limits<double>::infinity();
        report.median = std::numeric_limits<double>::infinity();
        return run;
    }
    report.mae = last.mae;
    report.median = last.median;
    report.zone_errors = last.abs_errors;
    run.final_state.emplace(std::move(sim));
    return run;
}

FidelityReport n_step_eval(const BuildingConfig& config, const Theta& theta, const TelemetrySeries& telemetry, int n,
                           std::size_t start) {
    return n_step_run(config, theta, telemetry, n, start).report;
}

TelemetrySeries generate_synthetic_telemetry(const BuildingConfig& config, const Theta& theta,
                                             const SyntheticScenario& scenario) {
    if (scenario.records < 1) throw Error(ErrorCode::InvalidArgument, "scenario needs at least one record");
    if (!on_step_lattice(scenario.start)) {
        throw Error(ErrorCode::MisalignedTimestamp, "scenario start is off the 5-minute lattice");
    }
    theta.check_bounds();
    BuildingConfig cfg = config;
    cfg.theta = theta;
    Simulator sim(cfg);

    constexpr double kPi = 3.14159265358979323846;
    auto ambient_at = [&](Timestamp ts) {
        const double seconds_of_day = static_cast<double>(((ts % 86400) + 86400) % 86400);
        return scenario.ambient_mean +
               scenario.ambient_amplitude * std::cos(2.0 * kPi * (seconds_of_day - 15.0 * 3600.0) / 86400.0);
    };
    auto policy_at = [&](Timestamp ts) {
        HvacAction a = scenario.policy;
        if (scenario.supply_water_swing != 0.0 && ((ts - scenario.start) / 3600) % 2 == 1) {
            a.supply_water_setpoint += scenario.supply_water_swing;
        }
        return a;
    };

    ObservedState initial;
    initial.timestamp = scenario.start;
    initial.ambient_temperature = ambient_at(scenario.start);
    initial.setpoints = policy_at(scenario.start);
    for (const auto& id : sim.zone_ids()) {
        if (auto it = scenario.initial_zone_temperatures.find(id); it != scenario.initial_zone_temperatures.end()) {
            initial.zone_temperatures[id] = it->second;
        } else if (auto jt = cfg.initial_zone_temperature.find(id); jt != cfg.initial_zone_temperature.end()) {
            initial.zone_temperatures[id] = jt->second;
        } else {
            initial.zone_temperatures[id] = cfg.initial_temperature;
        }
    }
    sim.reset(initial);

    TelemetrySeries series;
    series.zones = sim.zone_ids();
    std::sort(series.zones.begin(), series.zones.end());
    auto capture = [&]() {
        TelemetryRecord r;
        r.timestamp = sim.time();
        r.zone_temperatures = zone_map(sim);
        r.ambient_temperature = ambient_at(sim.time());
        r.setpoints = policy_at(sim.time());
        r.supply_air_temperature = sim.plant().air_handler().supply_air_temperature;
        r.supply_water_temperature = sim.plant().hot_water().supply_water_temperature;
        series.records.push_back(std::move(r));
    };
    capture();
    for (int k = 1; k < scenario.records; ++k) {
        const TelemetryRecord& prev = series.records.back();
        sim.step(prev.setpoints, AmbientInput{prev.timestamp, prev.ambient_temperature});
        capture();
    }
    return series;
}

}  // namespace sbsim
