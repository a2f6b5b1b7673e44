// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "sbsim/building.hpp"
#include "sbsim/calib.hpp"
#include "sbsim/engine.hpp"
#include "sbsim/grid.hpp"
#include "sbsim/rng.hpp"
#include "support.hpp"

using namespace sbsim;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

// 1 ------------------------------------------------------------------------

Verdict conservation() {
    const auto t0 = Clock::now();
    const int n = 50;
    const Material brick{0.7, 1900.0, 840.0};
    const Material gypsum{0.17, 800.0, 1090.0};
    std::vector<CellSpec> cells;
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            CellSpec s;
            if (r == 0 || c == 0 || r == n - 1 || c == n - 1) {
                s.kind = CellKind::ExteriorWall;
                s.material = brick;
            } else if (c == n / 2 && r != n / 2) {
                s.kind = CellKind::InteriorWall;
                s.material = gypsum;
            } else {
                s.kind = CellKind::InteriorAir;
                s.zone = c < n / 2 ? 0 : 1;
                s.material = kInteriorAir;
            }
            cells.push_back(s);
        }
    }
    ThermalGrid::Params p;
    p.rows = p.cols = n;
    p.convection_coefficient = 10.0;
    p.shuffle_probability = 0.5;
    ThermalGrid g(p, cells, 290.0);
    Rng rng(42);
    for (std::size_t i = 0; i < g.size(); ++i) g.set_temperature(i, 280.0 + 30.0 * rng.uniform());

    const long double e0 = g.total_internal_energy();
    long double prev = e0;
    double worst_step = 0.0;
    for (int s = 0; s < 72; ++s) {
        g.step_energy_balance(300.0, {}, 260.0);
        g.shuffle_air(rng);
        const long double e = g.total_internal_energy();
        worst_step = std::max(worst_step, std::fabs(static_cast<double>((e - prev) / prev)));
        prev = e;
    }
    const double total = std::fabs(static_cast<double>((prev - e0) / e0));
    const double secs = seconds_since(t0);
    return {worst_step <= 1e-9 && total <= 1e-7 && secs < 5.0,
            "max step drift " + fmt("%.2e", worst_step) + ", 72-step drift " + fmt("%.2e", total) + ", " +
                fmt("%.2f", secs) + " s"};
}

// 2 ------------------------------------------------------------------------

Verdict lumped_decay() {
    ThermalGrid::Params p;
    p.rows = 1;
    p.cols = 2;
    p.dx = 4.0;
    p.convection_coefficient = 5.0;
    std::vector<CellSpec> cells(2);
    cells[0].kind = CellKind::OutsideAir;
    cells[1] = CellSpec{CellKind::InteriorAir, 0, kInteriorAir, false};
    const double t0 = 300.0;
    const double ta = 280.0;
    ThermalGrid g(p, cells, t0);
    const double mc = kInteriorAir.density * kInteriorAir.heat_capacity * p.dx * p.dx * p.floor_height;
    const double ha = p.convection_coefficient * p.dx * p.floor_height;
    double worst = 0.0;
    for (int s = 1; s <= 72; ++s) {
        g.step_energy_balance(300.0, {}, ta);
        const double exact = ta + (t0 - ta) * std::exp(-ha * 300.0 * s / mc);
        worst = std::max(worst, std::fabs(g.temperatures()[1] - exact));
    }
    const double rel = worst / (t0 - ta);
    return {rel <= 0.01, "max deviation " + fmt("%.3e", rel) + " of the initial gap over 6 h"};
}

// 3 ------------------------------------------------------------------------

Verdict metric_oracle() {
    Rng rng(1234);
    int mismatches = 0;
    for (int k = 0; k < 1000; ++k) {
        const int z = 1 + static_cast<int>(rng.below(20));
        std::map<std::string, double> real;
        std::map<std::string, double> sim;
        std::vector<double> errs;
        for (int i = 0; i < z; ++i) {
            const std::string id = "z" + std::to_string(i);
            real[id] = 285.0 + 20.0 * rng.uniform();
            sim[id] = 285.0 + 20.0 * rng.uniform();
            errs.push_back(std::fabs(real[id] - sim[id]));
        }
        double sum = 0.0;
        for (double e : errs) sum += e;
        std::sort(errs.begin(), errs.end());
        const double mae = sum / z;
        const double median = z % 2 ? errs[z / 2] : 0.5 * (errs[z / 2 - 1] + errs[z / 2]);
        const auto se = spatial_error(real, sim);
        if (fmt("%.6f", se.mae) != fmt("%.6f", mae) || fmt("%.6f", se.median) != fmt("%.6f", median)) ++mismatches;
    }
    return {mismatches == 0, std::to_string(mismatches) + " mismatches in 1000 cases"};
}

// 4 and 5 ------------------------------------------------------------------

Theta hidden_theta() {
    Theta t = Theta::midpoint();
    t[ThetaParam::ExteriorConvection] = 250.0;
    t[ThetaParam::ExteriorWallConductivity] = 0.3;
    t[ThetaParam::ExteriorWallDensity] = 1900.0;
    t[ThetaParam::ExteriorWallHeatCapacity] = 900.0;
    t[ThetaParam::InteriorWallConductivity] = 550.0;
    t[ThetaParam::InteriorWallDensity] = 400.0;
    t[ThetaParam::InteriorWallHeatCapacity] = 1200.0;
    t[ThetaParam::ShuffleProbability] = 0.7;
    return t;
}

SyntheticScenario winter_scenario(Timestamp start, double north, double south) {
    SyntheticScenario sc;
    sc.start = start;
    sc.records = 72;
    sc.ambient_mean = 275.15;
    sc.ambient_amplitude = 4.0;
    sc.supply_water_swing = 10.0;
    sc.initial_zone_temperatures = {{"north_wing", north}, {"south_wing", south}};
    return sc;
}

struct Recovery {
    Verdict tuning;
    Verdict generalization;
};

Recovery self_calibration() {
    const auto cfg = load_manifest(testing::fixture("twozone/manifest.txt"));
    const Theta star = hidden_theta();
    const auto tuning = generate_synthetic_telemetry(cfg, star, winter_scenario(cfg.start_time, 294.5, 291.0));

    CalibrationSpec spec = CalibrationSpec::full_box();
    spec.budget = 100;
    spec.seed = 5;
    spec.strategy = SearchStrategy::Quasirandom;
    spec.objective = {0, 72};

    const auto t0 = Clock::now();
    const auto result = calibrate(cfg, spec, tuning, 8);
    const double secs = seconds_since(t0);
    const double mid = n_step_eval(cfg, spec.midpoint(cfg.theta), tuning, 72, 0).mae;
    const double best = result.best_objective;

    Recovery out;
    out.tuning = {!result.degenerate && best < 0.3 && best < 0.5 * mid && secs < 600.0,
                  "best MAE " + fmt("%.4f", best) + " K, midpoint MAE " + fmt("%.4f", mid) + " K, " +
                      fmt("%.1f", secs) + " s with 8 jobs"};

    const auto second =
        generate_synthetic_telemetry(cfg, star, winter_scenario(parse_iso8601("2023-01-11T09:00:00Z"), 292.0, 295.2));
    const double val = n_step_eval(cfg, result.best_theta, second, 72, 0).mae;
    out.generalization = {std::isfinite(val) && val <= 2.0 * best,
                          "validation MAE " + fmt("%.4f", val) + " K vs tuning " + fmt("%.4f", best) + " K (ratio " +
                              fmt("%.2f", val / best) + ")"};
    return out;
}

// 6 ------------------------------------------------------------------------

/// 57 x 57 non-outside cells per floor, four zones split by interior walls.
std::string big_floor(const std::string& id, char z0) {
    const int inner = 57;
    const int n = inner + 2;
    std::ostringstream out;
    out << "floor " << id << " dx_m 1.0 height_m 3.0\n";
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            char g;
            if (r == 0 || c == 0 || r == n - 1 || c == n - 1) g = 'O';
            else if (r == 1 || c == 1 || r == n - 2 || c == n - 2) g = 'X';
            else if (r == n / 2 || c == n / 2) g = 'x';
            else g = static_cast<char>(z0 + (r > n / 2 ? 2 : 0) + (c > n / 2 ? 1 : 0));
            out << g;
        }
        out << '\n';
    }
    return out.str();
}

Verdict performance() {
    const auto dir = testing::scratch_dir("acceptance_perf");
    testing::write_file(dir / "ground.txt", big_floor("ground", 'A'));
    testing::write_file(dir / "upper.txt", big_floor("upper", 'E'));
    std::string devices = "device ahu type ahu\ndevice hws type boiler\ndevice chw type chiller\n";
    const std::pair<int, int> centers[4] = {{15, 15}, {15, 44}, {44, 15}, {44, 44}};
    for (int f = 0; f < 2; ++f) {
        for (int q = 0; q < 4; ++q) {
            const char zone = static_cast<char>((f ? 'E' : 'A') + q);
            const auto [r, c] = centers[q];
            devices += "device vav_" + std::string(1, zone) + " type vav zone " + std::string(1, zone) +
                       " diffuser " + std::to_string(r) + "," + std::to_string(c) + " design_flow=1.0\n";
        }
    }
    testing::write_file(dir / "devices.txt", devices);
    testing::write_file(dir / "manifest.txt", "floorplan ground.txt\nfloorplan upper.txt\ndevices devices.txt\n");
    const auto cfg = load_manifest(dir / "manifest.txt");
    Simulator sim(cfg);

    std::size_t cells = 0;
    for (const auto& g : sim.grids()) {
        for (std::size_t i = 0; i < g.size(); ++i) cells += g.kind(i) != CellKind::OutsideAir;
    }
    double worst = 0.0;
    int substeps = 0;
    for (int k = 0; k < 3; ++k) {
        const auto t0 = Clock::now();
        const auto r = sim.step(HvacAction{}, {sim.time(), 276.15});
        worst = std::max(worst, seconds_since(t0));
        substeps = r.diagnostics[0].substeps_used;
    }
    return {cells >= 6000 && cells <= 7000 && worst <= 1.5,
            std::to_string(cells) + " cells, " + std::to_string(substeps) + " substeps, slowest step " +
                fmt("%.3f", worst) + " s"};
}

// 7 and 8 ------------------------------------------------------------------

struct Outcome {
    int code;
    std::string err;
};

Outcome cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, err.str()};
}

Verdict determinism() {
    const std::string manifest = testing::fixture("small/manifest.txt").string();
    auto pipeline = [&](const fs::path& dir) {
        testing::write_file(dir / "spec.txt", "budget 16\nseed 3\nobjective_interval 0 24\nvalidation_interval 24 12\n");
        const std::vector<std::vector<std::string>> steps{
            {"validate", manifest},
            {"synth", manifest, "--out", (dir / "telemetry.csv").string(), "--records", "36", "--water-swing", "10",
             "--initial", "east=295.5", "west=292.0"},
            {"run", manifest, "--steps", "72", "--out", (dir / "run").string()},
            {"eval", manifest, "--telemetry", (dir / "telemetry.csv").string(), "--n", "24", "--start", "6", "--out",
             (dir / "eval").string()},
            {"calibrate", manifest, "--telemetry", (dir / "telemetry.csv").string(), "--spec",
             (dir / "spec.txt").string(), "--jobs", "4", "--out", (dir / "calibrate").string()},
        };
        for (const auto& s : steps) {
            if (cli(s).code != 0) return false;
        }
        return true;
    };
    const auto a = testing::scratch_dir("acceptance_det_a");
    const auto b = testing::scratch_dir("acceptance_det_b");
    if (!pipeline(a) || !pipeline(b)) return {false, "a pipeline command failed"};

    int files = 0;
    int differing = 0;
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
        if (!entry.is_regular_file()) continue;
        ++files;
        const auto rel = fs::relative(entry.path(), a);
        if (testing::slurp(entry.path()) != testing::slurp(b / rel)) ++differing;
    }
    return {files > 10 && differing == 0,
            std::to_string(files) + " files compared, " + std::to_string(differing) + " differ"};
}

Verdict diagnostics() {
    struct Case {
        std::vector<std::string> args;
        int code;
        std::string needle;
    };
    const auto bad = [](const char* f) { return testing::fixture(std::string("bad/") + f).string(); };
    const auto out = testing::scratch_dir("acceptance_diag");
    const std::vector<Case> cases{
        {{"validate", bad("manifest_ragged.txt")}, 2, "RaggedGrid"},
        {{"validate", bad("manifest_glyph.txt")}, 2, "UnknownGlyph"},
        {{"validate", bad("manifest_disconnected.txt")}, 2, "DisconnectedZone"},
        {{"validate", bad("manifest_diffuser_wall.txt")}, 2, "DiffuserOutsideZone"},
        {{"validate", bad("manifest_duplicate_device.txt")}, 2, "DuplicateDeviceId"},
        {{"eval", bad("manifest_good.txt"), "--telemetry", bad("telemetry_misaligned.csv"), "--n", "1", "--out",
          out.string()},
         3, "MisalignedTimestamp"},
        {{"validate", bad("manifest_good.txt")}, 0, ""},
    };
    std::string failures;
    for (const auto& c : cases) {
        const auto r = cli(c.args);
        if (r.code != c.code || r.err.find(c.needle) == std::string::npos) {
            failures += " " + c.args[1] + "(exit " + std::to_string(r.code) + ")";
        }
    }
    return {failures.empty(), failures.empty() ? std::to_string(cases.size()) + " cases" : "failed:" + failures};
}

}  // namespace

int main() {
    int failed = 0;
    auto report = [&](int id, const char* name, const std::function<Verdict()>& fn) {
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s %d %s: %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
        std::fflush(stdout);
        failed += !v.pass;
    };

    report(1, "conservation", conservation);
    report(2, "lumped decay", lumped_decay);
    report(3, "metric oracle", metric_oracle);
    Recovery rec;
    try {
        rec = self_calibration();
    } catch (const std::exception& e) {
        rec.tuning = rec.generalization = {false, std::string("exception: ") + e.what()};
    }
    report(4, "self-calibration recovery", [&] { return rec.tuning; });
    report(5, "generalization", [&] { return rec.generalization; });
    report(6, "performance", performance);
    report(7, "determinism", determinism);
    report(8, "format robustness", diagnostics);
    return failed == 0 ? 0 : 1;
}
