#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <sstream>

#include "sbsim/building.hpp"
#include "sbsim/calib.hpp"
#include "sbsim/engine.hpp"
#include "sbsim/error.hpp"
#include "sbsim/timeutil.hpp"

namespace py = pybind11;
using namespace sbsim;

namespace {

py::dict theta_to_dict(const Theta& t) {
    py::dict d;
    const auto& b = theta_bounds();
    for (std::size_t i = 0; i < kThetaSize; ++i) d[b[i].name] = t.values[i];
    return d;
}

// Unlisted parameters keep their value in `base`.
Theta theta_from_dict(const std::map<std::string, double>& values, Theta base) {
    for (const auto& [name, v] : values) {
        const auto p = theta_param_from_name(name);
        if (!p) throw Error(ErrorCode::ConfigError, "unknown parameter '" + name + "'");
        base[*p] = v;
    }
    base.check_bounds();
    return base;
}

const char* demand_name(Demand d) {
    switch (d) {
        case Demand::Heating: return "heating";
        case Demand::Cooling: return "cooling";
        default: return "none";
    }
}

py::dict meters_dict(const EnergyMeters& m) {
    py::dict d;
    d["electricity_J"] = m.electricity;
    d["natural_gas_J"] = m.natural_gas;
    d["carbon_kg"] = m.carbon;
    return d;
}

py::dict report_dict(const FidelityReport& r) {
    py::dict d;
    d["n"] = r.n;
    d["mae"] = r.mae;
    d["median"] = r.median;
    d["zone_errors"] = r.zone_errors;
    d["epsilon"] = r.epsilon;
    d["failed"] = r.failed;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Grid-based building thermal simulator with HVAC plant and calibration";

    // Held for the life of the process; the interpreter owns the type object.
    static PyObject* error_type = py::exception<Error>(m, "SbsimError", PyExc_RuntimeError).release().ptr();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object inst = py::reinterpret_borrow<py::object>(error_type)(e.diagnostic());
            inst.attr("code") = std::string(to_string(e.code()));
            PyErr_SetObject(error_type, inst.ptr());
        }
    });

    m.def("parse_iso8601", &parse_iso8601);
    m.def("format_iso8601", &format_iso8601);

    m.def("theta_bounds", [] {
        py::list out;
        for (const auto& b : theta_bounds()) out.append(py::make_tuple(b.name, b.min, b.max, b.best));
        return out;
    });
    m.def("theta_defaults", [] { return theta_to_dict(Theta::defaults()); });
    m.def("theta_midpoint", [] { return theta_to_dict(Theta::midpoint()); });

    py::class_<BuildingConfig>(m, "BuildingConfig")
        .def_property_readonly("zone_ids", &BuildingConfig::zone_ids)
        .def_property_readonly("floor_count", [](const BuildingConfig& c) { return c.floors.size(); })
        .def_readwrite("seed", &BuildingConfig::seed)
        .def_readwrite("start_time", &BuildingConfig::start_time)
        .def_readwrite("ambient_temperature", &BuildingConfig::ambient_temperature)
        .def_property(
            "theta", [](const BuildingConfig& c) { return theta_to_dict(c.theta); },
            [](BuildingConfig& c, const std::map<std::string, double>& v) { c.theta = theta_from_dict(v, c.theta); })
        .def("validate", &BuildingConfig::validate);

    m.def("load_manifest", &load_manifest, py::arg("path"));
    m.def(
        "parse_manifest",
        [](const std::string& text, const std::filesystem::path& base_dir) { return parse_manifest(text, base_dir); },
        py::arg("text"), py::arg("base_dir"));

    py::class_<Simulator>(m, "Simulator")
        .def(py::init<BuildingConfig>(), py::arg("config"))
        .def(
            "reset",
            [](Simulator& s, const std::map<std::string, double>& zones, double ambient,
               std::optional<Timestamp> timestamp) {
                ObservedState o;
                o.timestamp = timestamp.value_or(s.config().start_time);
                o.zone_temperatures = zones;
                o.ambient_temperature = ambient;
                s.reset(o);
            },
            py::arg("zone_temperatures"), py::arg("ambient_temperature"), py::arg("timestamp") = py::none())
        .def(
            "step",
            [](Simulator& s, double water, double air, double ambient) {
                const StepResult r = s.step(HvacAction{water, air}, {s.time(), ambient});
                py::dict d;
                d["timestamp"] = r.observation.timestamp;
                d["observation"] = r.observation.to_vector();
                d["reward"] = r.reward.total;
                d["carbon_cost"] = r.reward.carbon_cost;
                d["energy_cost"] = r.reward.energy_cost;
                d["comfort_cost"] = r.reward.comfort_cost;
                d["meter_delta"] = meters_dict(r.meter_delta);
                py::list demands;
                for (Demand dm : r.demands) demands.append(demand_name(dm));
                d["demands"] = demands;
                return d;
            },
            py::arg("supply_water_setpoint"), py::arg("supply_air_setpoint"), py::arg("ambient_temperature"))
        .def("observe", [](const Simulator& s) { return s.observe().to_vector(); })
        .def("observation_fields", &Simulator::observation_fields)
        .def("zone_temperatures",
             [](const Simulator& s) {
                 std::map<std::string, double> out;
                 const auto t = s.zone_temperatures();
                 for (std::size_t i = 0; i < t.size(); ++i) out[s.zone_ids()[i]] = t[i];
                 return out;
             })
        .def("meters", [](const Simulator& s) { return meters_dict(s.plant().meters()); })
        .def_property_readonly("zone_ids", &Simulator::zone_ids)
        .def_property_readonly("time", &Simulator::time);

    py::class_<TelemetrySeries>(m, "TelemetrySeries")
        .def("__len__", &TelemetrySeries::size)
        .def_readonly("zones", &TelemetrySeries::zones)
        .def("timestamps",
             [](const TelemetrySeries& s) {
                 std::vector<Timestamp> out;
                 for (const auto& r : s.records) out.push_back(r.timestamp);
                 return out;
             })
        .def("zone_temperatures", [](const TelemetrySeries& s, std::size_t i) { return s.records.at(i).zone_temperatures; })
        .def("to_csv", [](const TelemetrySeries& s) {
            std::ostringstream out;
            write_telemetry_csv(out, s);
            return out.str();
        });

    m.def("load_telemetry", &load_telemetry, py::arg("path"));
    m.def(
        "parse_telemetry", [](const std::string& text) { return parse_telemetry(text); }, py::arg("text"));

    m.def(
        "generate_synthetic_telemetry",
        [](const BuildingConfig& cfg, std::optional<std::map<std::string, double>> theta, int records,
           std::optional<Timestamp> start, const std::map<std::string, double>& initial, double ambient_mean,
           double ambient_amplitude, double water_swing, double water, double air) {
            SyntheticScenario sc;
            sc.start = start.value_or(cfg.start_time);
            sc.records = records;
            sc.initial_zone_temperatures = initial;
            sc.ambient_mean = ambient_mean;
            sc.ambient_amplitude = ambient_amplitude;
            sc.supply_water_swing = water_swing;
            sc.policy = HvacAction{water, air};
            const Theta t = theta ? theta_from_dict(*theta, cfg.theta) : cfg.theta;
            return generate_synthetic_telemetry(cfg, t, sc);
        },
        py::arg("config"), py::arg("theta") = py::none(), py::arg("records") = 72, py::arg("start") = py::none(),
        py::arg("initial") = std::map<std::string, double>{}, py::arg("ambient_mean") = 288.15,
        py::arg("ambient_amplitude") = 5.0, py::arg("water_swing") = 0.0, py::arg("supply_water_setpoint") = 333.15,
        py::arg("supply_air_setpoint") = 291.15);

    m.def(
        "spatial_error",
        [](const std::map<std::string, double>& real, const std::map<std::string, double>& sim) {
            const SpatialError e = spatial_error(real, sim);
            py::dict d;
            d["mae"] = e.mae;
            d["median"] = e.median;
            d["abs_errors"] = e.abs_errors;
            return d;
        },
        py::arg("real"), py::arg("sim"));

    m.def(
        "n_step_eval",
        [](const BuildingConfig& cfg, const TelemetrySeries& telemetry, int n, std::size_t start,
           std::optional<std::map<std::string, double>> theta) {
            const Theta t = theta ? theta_from_dict(*theta, cfg.theta) : cfg.theta;
            FidelityReport r;
            {
                py::gil_scoped_release release;
                r = n_step_eval(cfg, t, telemetry, n, start);
            }
            return report_dict(r);
        },
        py::arg("config"), py::arg("telemetry"), py::arg("n"), py::arg("start") = 0, py::arg("theta") = py::none());

    m.def(
        "calibrate",
        [](const BuildingConfig& cfg, const TelemetrySeries& telemetry, const std::string& spec_text, int jobs) {
            const CalibrationSpec spec = parse_calibration_spec(spec_text);
            CalibrationResult r;
            {
                py::gil_scoped_release release;
                r = calibrate(cfg, spec, telemetry, jobs);
            }
            py::dict d;
            d["best_theta"] = theta_to_dict(r.best_theta);
            d["best_objective"] = r.best_objective;
            d["best_index"] = r.degenerate ? py::object(py::none()) : py::object(py::int_(r.best_index));
            d["degenerate"] = r.degenerate;
            std::vector<double> objectives;
            for (const auto& e : r.log) objectives.push_back(e.objective);
            d["objectives"] = objectives;
            d["patch"] = theta_patch(r.best_theta);
            return d;
        },
        py::arg("config"), py::arg("telemetry"), py::arg("spec"), py::arg("jobs") = 1);
}
