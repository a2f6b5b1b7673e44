#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "sbsim/building.hpp"
#include "sbsim/calib.hpp"
#include "sbsim/engine.hpp"
#include "sbsim/error.hpp"
#include "sbsim/render.hpp"

namespace sbsim::cli {
namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string read_text(const fs::path& path, ErrorCode code) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(code, "cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::DataError, "cannot write '" + path.string() + "'");
    return out;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::DataError, "cannot create '" + dir.string() + "': " + ec.message());
}

/// --seed beats SBSIM_SEED beats the manifest.
void apply_seed(BuildingConfig& cfg, const std::optional<std::uint64_t>& flag) {
    if (flag) {
        cfg.seed = *flag;
        return;
    }
    if (const char* env = std::getenv("SBSIM_SEED"); env && *env) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (*end != '\0') throw Error(ErrorCode::ConfigError, "SBSIM_SEED must be an unsigned integer");
        cfg.seed = v;
    }
}

// timestamp,ambient_temperature
std::vector<AmbientInput> load_ambient(const fs::path& path) {
    std::istringstream in(read_text(path, ErrorCode::DataError));
    std::string line;
    std::vector<AmbientInput> out;
    int number = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            if (line != "timestamp,ambient_temperature") {
                throw Error(ErrorCode::DataError, "expected header 'timestamp,ambient_temperature'", path.string(),
                            number);
            }
            header = false;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw Error(ErrorCode::DataError, "expected 2 columns", path.string(), number);
        AmbientInput a;
        try {
            a.timestamp = parse_iso8601(line.substr(0, comma));
        } catch (const Error& e) {
            throw Error(e.code(), e.message(), path.string(), number);
        }
        if (!on_step_lattice(a.timestamp)) {
            throw Error(ErrorCode::MisalignedTimestamp, "timestamp off the 5-minute lattice", path.string(), number);
        }
        char* end = nullptr;
        const std::string value = line.substr(comma + 1);
        a.temperature = std::strtod(value.c_str(), &end);
        if (value.empty() || *end != '\0') throw Error(ErrorCode::DataError, "bad temperature", path.string(), number);
        out.push_back(a);
    }
    if (out.empty()) throw Error(ErrorCode::DataError, "ambient file has no rows", path.string());
    return out;
}

// timestamp,supply_water_setpoint,supply_air_setpoint
std::vector<TimedAction> load_schedule(const fs::path& path) {
    std::istringstream in(read_text(path, ErrorCode::DataError));
    std::string line;
    std::vector<TimedAction> out;
    int number = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            if (line != "timestamp,supply_water_setpoint,supply_air_setpoint") {
                throw Error(ErrorCode::DataError,
                            "expected header 'timestamp,supply_water_setpoint,supply_air_setpoint'", path.string(),
                            number);
            }
            header = false;
            continue;
        }
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cols.push_back(cell);
        if (cols.size() != 3) throw Error(ErrorCode::DataError, "expected 3 columns", path.string(), number);
        TimedAction a;
        try {
            a.timestamp = parse_iso8601(cols[0]);
        } catch (const Error& e) {
            throw Error(e.code(), e.message(), path.string(), number);
        }
        char* e1 = nullptr;
        char* e2 = nullptr;
        a.action.supply_water_setpoint = std::strtod(cols[1].c_str(), &e1);
        a.action.supply_air_setpoint = std::strtod(cols[2].c_str(), &e2);
        if (*e1 != '\0' || *e2 != '\0' || cols[1].empty() || cols[2].empty()) {
            throw Error(ErrorCode::DataError, "bad setpoint value", path.string(), number);
        }
        out.push_back(a);
    }
    return out;
}

struct Policy {
    std::optional<HvacAction> constant;
    std::vector<TimedAction> schedule;
};

Policy parse_policy(const std::vector<std::string>& words) {
    Policy p;
    if (words.empty()) {
        p.constant = HvacAction{};
        return p;
    }
    if (words[0] == "constant" && words.size() == 3) {
        char* e1 = nullptr;
        char* e2 = nullptr;
        HvacAction a;
        a.supply_water_setpoint = std::strtod(words[1].c_str(), &e1);
        a.supply_air_setpoint = std::strtod(words[2].c_str(), &e2);
        if (*e1 != '\0' || *e2 != '\0') throw Error(ErrorCode::ConfigError, "--policy constant <T_b> <T_s> (K)");
        p.constant = a;
        return p;
    }
    if (words[0] == "schedule" && words.size() == 2) {
        p.schedule = load_schedule(words[1]);
        return p;
    }
    throw Error(ErrorCode::ConfigError, "--policy expects 'constant <T_b> <T_s>' or 'schedule <file>'");
}

int report_error(const Error& e, std::ostream& err) {
    err << "error: " << e.diagnostic() << '\n';
    return is_config_error(e.code()) ? kConfigError : kRuntimeError;
}

// ---------------------------------------------------------------------------

int cmd_validate(const std::string& manifest, std::ostream& out) {
    const BuildingConfig cfg = load_manifest(manifest);
    std::size_t cells = 0;
    for (const auto& f : cfg.floors) cells += static_cast<std::size_t>(f.row_count() * f.col_count());
    out << "ok: " << cfg.floors.size() << " floor(s), " << cells << " cells, " << cfg.zone_ids().size()
        << " zone(s), " << cfg.devices.size() << " device(s)\n";
    return kOk;
}

struct RunOptions {
    std::string manifest;
    int steps = 72;
    std::optional<std::uint64_t> seed;
    std::string ambient;
    std::vector<std::string> policy;
    std::string out_dir = ".";
};

int cmd_run(const RunOptions& o, std::ostream& out) {
    BuildingConfig cfg = load_manifest(o.manifest);
    apply_seed(cfg, o.seed);
    if (o.steps < 0) throw Error(ErrorCode::ConfigError, "--steps must be non-negative");
    const Policy policy = parse_policy(o.policy);

    std::vector<AmbientInput> ambient;
    Timestamp start = cfg.start_time;
    if (!o.ambient.empty()) {
        ambient = load_ambient(o.ambient);
        start = ambient.front().timestamp;
    } else {
        for (int k = 0; k < o.steps; ++k) ambient.push_back({start + k * kStepSeconds, cfg.ambient_temperature});
    }
    std::vector<TimedAction> actions = policy.schedule;
    if (policy.constant) {
        for (int k = 0; k < o.steps; ++k) actions.push_back({start + k * kStepSeconds, *policy.constant});
    }

    Simulator sim(cfg);
    ObservedState initial;
    initial.timestamp = start;
    initial.ambient_temperature = ambient.front().temperature;
    initial.setpoints = actions.empty() ? HvacAction{} : actions.front().action;
    for (const auto& id : sim.zone_ids()) {
        const auto it = cfg.initial_zone_temperature.find(id);
        initial.zone_temperatures[id] = it == cfg.initial_zone_temperature.end() ? cfg.initial_temperature : it->second;
    }
    sim.reset(initial);
    const auto trajectory = replay(sim, actions, ambient, o.steps);

    ensure_dir(o.out_dir);
    {
        auto f = open_out(fs::path(o.out_dir) / "trajectory.csv");
        write_trajectory_csv(f, sim.zone_ids(), trajectory);
    }
    int violations = 0;
    double violation_k = 0.0;
    double reward = 0.0;
    std::vector<ZoneComfortSpec> specs;
    for (const auto& id : sim.zone_ids()) specs.push_back(cfg.comfort_for(id));
    for (const auto& s : trajectory) {
        reward += s.reward.total;
        for (std::size_t z = 0; z < specs.size(); ++z) {
            const double v = comfort_violation(std::span(&s.observation.zone_temperatures[z], 1), std::span(&specs[z], 1));
            if (v > 0.0) ++violations;
            violation_k += v;
        }
    }
    const EnergyMeters& m = sim.plant().meters();
    std::ostringstream summary;
    summary << "steps " << trajectory.size() << '\n'
            << "electricity_kwh " << fixed(m.electricity / 3.6e6, 6) << '\n'
            << "natural_gas_kwh " << fixed(m.natural_gas / 3.6e6, 6) << '\n'
            << "carbon_kg " << fixed(m.carbon, 6) << '\n'
            << "comfort_violation_zone_steps " << violations << '\n'
            << "comfort_violation_kelvin_steps " << fixed(violation_k, 6) << '\n'
            << "total_reward " << fixed(reward, 6) << '\n';
    {
        auto f = open_out(fs::path(o.out_dir) / "summary.txt");
        f << summary.str();
    }
    out << summary.str();
    return kOk;
}

struct EvalOptions {
    std::string manifest;
    std::string telemetry;
    int n = 72;
    std::size_t start = 0;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
};

int cmd_eval(const EvalOptions& o, std::ostream& out) {
    BuildingConfig cfg = load_manifest(o.manifest);
    apply_seed(cfg, o.seed);
    const TelemetrySeries telemetry = load_telemetry(o.telemetry);
    const NStepRun run = n_step_run(cfg, cfg.theta, telemetry, o.n, o.start);
    const FidelityReport& rep = run.report;

    ensure_dir(o.out_dir);
    const fs::path dir(o.out_dir);
    std::ostringstream report;
    report << "n " << rep.n << '\n'
           << "start " << o.start << '\n'
           << "failed " << (rep.failed ? 1 : 0) << '\n'
           << "mae_K " << (rep.failed ? std::string("inf") : fixed(rep.mae, 6)) << '\n'
           << "median_K " << (rep.failed ? std::string("inf") : fixed(rep.median, 6)) << '\n';
    {
        auto f = open_out(dir / "report.txt");
        f << report.str();
    }
    out << report.str();
    if (rep.failed) {
        throw Error(ErrorCode::NonFiniteTemperature, rep.failure);
    }
    {
        auto f = open_out(dir / "zone_errors.csv");
        f << "zone,real_K,sim_K,abs_error_K\n";
        const auto& real = telemetry.records[o.start + static_cast<std::size_t>(o.n) - 1].zone_temperatures;
        const auto& sim = run.sim_zone_temperatures.back();
        for (const auto& [zone, err] : rep.zone_errors) {
            f << zone << ',' << fixed(real.at(zone), 6) << ',' << fixed(sim.at(zone), 6) << ',' << fixed(err, 6)
              << '\n';
        }
    }
    {
        auto f = open_out(dir / "drift.csv");
        write_drift_csv(f, drift_series(telemetry, run, o.start));
    }
    const Simulator& sim = *run.final_state;
    const auto& real = telemetry.records[o.start + static_cast<std::size_t>(o.n) - 1].zone_temperatures;
    for (std::size_t f = 0; f < sim.grids().size(); ++f) {
        std::vector<std::string> names;
        for (std::size_t z = 0; z < sim.zone_refs().size(); ++z) {
            if (sim.zone_refs()[z].floor == static_cast<int>(f)) names.push_back(sim.zone_ids()[z]);
        }
        const Heatmap map = difference_heatmap(sim.grids()[f], names, real);
        const std::string stem = "heatmap_" + cfg.floors[f].floor_id;
        auto csv = open_out(dir / (stem + ".csv"));
        write_heatmap_csv(csv, map);
        auto ppm = open_out(dir / (stem + ".ppm"));
        write_heatmap_ppm(ppm, map);
    }
    return kOk;
}

struct CalibrateOptions {
    std::string manifest;
    std::string telemetry;
    std::string spec;
    int jobs = 1;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
};

int cmd_calibrate(const CalibrateOptions& o, std::ostream& out, std::ostream& err) {
    BuildingConfig cfg = load_manifest(o.manifest);
    apply_seed(cfg, o.seed);
    const CalibrationSpec spec = load_calibration_spec(o.spec);
    const TelemetrySeries telemetry = load_telemetry(o.telemetry);
    if (o.jobs < 1) throw Error(ErrorCode::ConfigError, "--jobs must be at least 1");

    const CalibrationResult result = calibrate(cfg, spec, telemetry, o.jobs);
    ensure_dir(o.out_dir);
    const fs::path dir(o.out_dir);
    {
        auto f = open_out(dir / "calibration_log.csv");
        write_calibration_log_csv(f, result);
    }
    {
        auto f = open_out(dir / "best_theta.patch");
        f << "# best parameters from " << to_string(spec.strategy) << " search, budget " << spec.budget << ", seed "
          << spec.seed << "\n"
          << theta_patch(result.best_theta);
    }

    auto mae_text = [](const FidelityReport& r) { return r.failed ? std::string("inf") : fixed(r.mae, 6); };
    const Theta midpoint = spec.midpoint(cfg.theta);
    std::ostringstream cmp;
    cmp << "strategy " << to_string(spec.strategy) << '\n'
        << "budget " << spec.budget << '\n'
        << "best_index " << (result.degenerate ? std::string("none") : std::to_string(result.best_index)) << '\n'
        << "degenerate " << (result.degenerate ? 1 : 0) << '\n';
    auto compare = [&](const char* label, const Interval& iv) {
        const FidelityReport before = n_step_eval(cfg, midpoint, telemetry, iv.n, iv.start);
        cmp << label << " start " << iv.start << " n " << iv.n << " midpoint_mae_K " << mae_text(before);
        if (!result.degenerate) {
            const FidelityReport after = n_step_eval(cfg, result.best_theta, telemetry, iv.n, iv.start);
            cmp << " best_mae_K " << mae_text(after) << " best_median_K "
                << (after.failed ? std::string("inf") : fixed(after.median, 6));
        }
        cmp << '\n';
    };
    compare("objective", spec.objective);
    for (const auto& v : spec.validation) compare("validation", v);
    {
        auto f = open_out(dir / "comparison.txt");
        f << cmp.str();
    }
    out << cmp.str();
    err << "calibration wall time " << fixed(result.wall_seconds, 2) << " s, mean evaluation "
        << fixed(result.mean_evaluation_seconds, 3) << " s\n";
    return result.degenerate ? kDegenerate : kOk;
}

struct SynthOptions {
    std::string manifest;
    std::string out_file;
    int records = 72;
    std::string start;
    double ambient_mean = 288.15;
    double ambient_amplitude = 5.0;
    double water_swing = 0.0;
    std::vector<std::string> policy;
    std::vector<std::string> initial;
    std::optional<std::uint64_t> seed;
};

int cmd_synth(const SynthOptions& o, std::ostream& out) {
    BuildingConfig cfg = load_manifest(o.manifest);
    apply_seed(cfg, o.seed);
    SyntheticScenario sc;
    sc.records = o.records;
    sc.start = o.start.empty() ? cfg.start_time : parse_iso8601(o.start);
    sc.ambient_mean = o.ambient_mean;
    sc.ambient_amplitude = o.ambient_amplitude;
    sc.supply_water_swing = o.water_swing;
    const Policy policy = parse_policy(o.policy);
    if (!policy.constant) throw Error(ErrorCode::ConfigError, "synth supports only a constant policy");
    sc.policy = *policy.constant;
    for (const auto& kv : o.initial) {
        const auto eq = kv.find('=');
        char* end = nullptr;
        const double v = eq == std::string::npos ? 0.0 : std::strtod(kv.c_str() + eq + 1, &end);
        if (eq == std::string::npos || *end != '\0') throw Error(ErrorCode::ConfigError, "--initial expects zone=K");
        sc.initial_zone_temperatures[kv.substr(0, eq)] = v;
    }
    const TelemetrySeries series = generate_synthetic_telemetry(cfg, cfg.theta, sc);
    auto f = open_out(o.out_file);
    write_telemetry_csv(f, series);
    out << "wrote " << series.size() << " records for " << series.zones.size() << " zone(s) to " << o.out_file << '\n';
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"sbsim: calibratable building thermal simulator"};
    app.require_subcommand(1);

    std::string validate_manifest;
    auto* validate = app.add_subcommand("validate", "Check a manifest and everything it references");
    validate->add_option("manifest", validate_manifest, "Manifest path")->required();

    RunOptions run_opts;
    std::uint64_t run_seed = 0;
    auto* run_cmd = app.add_subcommand("run", "Roll the simulator forward under a fixed policy");
    run_cmd->add_option("manifest", run_opts.manifest, "Manifest path")->required();
    run_cmd->add_option("--steps", run_opts.steps, "Number of 5-minute steps");
    auto* run_seed_opt = run_cmd->add_option("--seed", run_seed, "Shuffle RNG seed (overrides SBSIM_SEED)");
    run_cmd->add_option("--ambient", run_opts.ambient, "CSV timestamp,ambient_temperature");
    run_cmd->add_option("--policy", run_opts.policy, "constant <T_b> <T_s> | schedule <file>")->expected(2, 3);
    run_cmd->add_option("--out", run_opts.out_dir, "Output directory");

    EvalOptions eval_opts;
    std::uint64_t eval_seed = 0;
    auto* eval_cmd = app.add_subcommand("eval", "N-step fidelity against telemetry");
    eval_cmd->add_option("manifest", eval_opts.manifest, "Manifest path")->required();
    eval_cmd->add_option("--telemetry", eval_opts.telemetry, "Telemetry CSV")->required();
    eval_cmd->add_option("--n", eval_opts.n, "Prediction window N");
    eval_cmd->add_option("--start", eval_opts.start, "First telemetry record of the window");
    auto* eval_seed_opt = eval_cmd->add_option("--seed", eval_seed, "Shuffle RNG seed");
    eval_cmd->add_option("--out", eval_opts.out_dir, "Output directory");

    CalibrateOptions cal_opts;
    std::uint64_t cal_seed = 0;
    auto* cal_cmd = app.add_subcommand("calibrate", "Search the physical parameters against telemetry");
    cal_cmd->add_option("manifest", cal_opts.manifest, "Manifest path")->required();
    cal_cmd->add_option("--telemetry", cal_opts.telemetry, "Telemetry CSV")->required();
    cal_cmd->add_option("--spec", cal_opts.spec, "Calibration spec file")->required();
    cal_cmd->add_option("--jobs", cal_opts.jobs, "Parallel evaluations");
    auto* cal_seed_opt = cal_cmd->add_option("--seed", cal_seed, "Shuffle RNG seed");
    cal_cmd->add_option("--out", cal_opts.out_dir, "Output directory");

    SynthOptions synth_opts;
    std::uint64_t synth_seed = 0;
    auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic telemetry from the manifest's parameters");
    synth_cmd->add_option("manifest", synth_opts.manifest, "Manifest path")->required();
    synth_cmd->add_option("--out", synth_opts.out_file, "Telemetry CSV to write")->required();
    synth_cmd->add_option("--records", synth_opts.records, "Number of 5-minute records");
    synth_cmd->add_option("--start", synth_opts.start, "ISO-8601 start (defaults to the manifest start_time)");
    synth_cmd->add_option("--ambient-mean", synth_opts.ambient_mean, "Mean ambient temperature, K");
    synth_cmd->add_option("--ambient-amplitude", synth_opts.ambient_amplitude, "Diurnal amplitude, K");
    synth_cmd->add_option("--water-swing", synth_opts.water_swing, "Hourly supply-water setpoint swing, K");
    synth_cmd->add_option("--policy", synth_opts.policy, "constant <T_b> <T_s>")->expected(3);
    synth_cmd->add_option("--initial", synth_opts.initial, "zone=K initial zone temperature")->expected(1, -1);
    auto* synth_seed_opt = synth_cmd->add_option("--seed", synth_seed, "Shuffle RNG seed");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    auto seed_of = [](CLI::Option* opt, std::uint64_t v) {
        return opt->count() ? std::optional<std::uint64_t>(v) : std::nullopt;
    };
    try {
        if (*validate) return cmd_validate(validate_manifest, out);
        if (*run_cmd) {
            run_opts.seed = seed_of(run_seed_opt, run_seed);
            return cmd_run(run_opts, out);
        }
        if (*eval_cmd) {
            eval_opts.seed = seed_of(eval_seed_opt, eval_seed);
            return cmd_eval(eval_opts, out);
        }
        if (*cal_cmd) {
            cal_opts.seed = seed_of(cal_seed_opt, cal_seed);
            return cmd_calibrate(cal_opts, out, err);
        }
        if (*synth_cmd) {
            synth_opts.seed = seed_of(synth_seed_opt, synth_seed);
            return cmd_synth(synth_opts, out);
        }
    } catch (const Error& e) {
        return report_error(e, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kConfigError;
}

}  // namespace sbsim::cli
