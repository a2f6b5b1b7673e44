#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "sbsim/calib.hpp"
#include "sbsim/error.hpp"
#include "sbsim/rng.hpp"
#include "text_util.hpp"

namespace sbsim {

const char* to_string(SearchStrategy s) {
    switch (s) {
        case SearchStrategy::CoordinateDescent: return "coordinate-descent";
        case SearchStrategy::NelderMeadBoxed: return "nelder-mead-boxed";
        case SearchStrategy::Quasirandom: break;
    }
    return "quasirandom";
}

bool Interval::overlaps(const Interval& other) const {
    const std::size_t a_end = start + static_cast<std::size_t>(n);
    const std::size_t b_end = other.start + static_cast<std::size_t>(other.n);
    return start < b_end && other.start < a_end;
}

CalibrationSpec CalibrationSpec::full_box() {
    CalibrationSpec spec;
    for (std::size_t i = 0; i < kThetaSize; ++i) {
        spec.params.push_back({static_cast<ThetaParam>(i), theta_bounds()[i].min, theta_bounds()[i].max});
    }
    return spec;
}

void CalibrationSpec::validate() const {
    if (params.empty()) throw Error(ErrorCode::ConfigError, "calibration spec searches no parameters");
    std::set<int> seen;
    for (const auto& p : params) {
        const auto& b = theta_bounds()[static_cast<std::size_t>(p.param)];
        if (!seen.insert(static_cast<int>(p.param)).second) {
            throw Error(ErrorCode::ConfigError, std::string("parameter ") + b.name + " listed twice");
        }
        if (!std::isfinite(p.min) || !std::isfinite(p.max) || !(p.min < p.max)) {
            throw Error(ErrorCode::ConfigError, std::string("bounds for ") + b.name + " need finite min < max");
        }
        if (p.min < b.min || p.max > b.max) {
            throw Error(ErrorCode::BoundsViolation, std::string("search range for ") + b.name +
                                                        " exceeds the admissible box [" +
                                                        detail::format_double(b.min) + ", " +
                                                        detail::format_double(b.max) + "]");
        }
    }
    if (budget < 1) throw Error(ErrorCode::ConfigError, "budget must be at least 1");
    if (objective.n < 1) throw Error(ErrorCode::ConfigError, "objective interval needs N >= 1");
    for (const auto& v : validation) {
        if (v.n < 1) throw Error(ErrorCode::ConfigError, "validation interval needs N >= 1");
        if (v.overlaps(objective)) {
            throw Error(ErrorCode::ConfigError, "validation interval at " + std::to_string(v.start) +
                                                    " overlaps the objective interval");
        }
    }
}

Theta CalibrationSpec::midpoint(const Theta& base) const {
    Theta t = base;
    for (const auto& p : params) t[p.param] = 0.5 * (p.min + p.max);
    return t;
}

CalibrationSpec parse_calibration_spec(std::string_view text, const std::string& source) {
    CalibrationSpec spec;
    spec.params.clear();
    for (const auto& line : detail::split_lines(text)) {
        if (detail::is_blank_or_comment(line.text)) continue;
        const auto tok = detail::tokens(line.text);
        const std::string_view key = tok[0];
        auto need = [&](std::size_t n, const char* usage) {
            if (tok.size() != n) {
                throw Error(ErrorCode::ConfigError, std::string("expected '") + usage + "'", source, line.number);
            }
        };
        auto interval = [&]() {
            need(3, "<objective|validation>_interval <start> <N>");
            const long long s = detail::parse_int(tok[1], "start", source, line.number);
            const long long n = detail::parse_int(tok[2], "N", source, line.number);
            if (s < 0 || n < 1) throw Error(ErrorCode::ConfigError, "interval needs start >= 0, N >= 1", source, line.number);
            return Interval{static_cast<std::size_t>(s), static_cast<int>(n)};
        };
        if (key == "param") {
            need(4, "param <name> <min> <max>");
            const auto p = theta_param_from_name(tok[1]);
            if (!p) throw Error(ErrorCode::ConfigError, "unknown parameter '" + std::string(tok[1]) + "'", source, line.number);
            spec.params.push_back({*p, detail::parse_double(tok[2], "min", source, line.number),
                                   detail::parse_double(tok[3], "max", source, line.number)});
        } else if (key == "budget") {
            need(2, "budget <n>");
            spec.budget = static_cast<int>(detail::parse_int(tok[1], "budget", source, line.number));
        } else if (key == "seed") {
            need(2, "seed <n>");
            spec.seed = static_cast<std::uint64_t>(detail::parse_int(tok[1], "seed", source, line.number));
        } else if (key == "strategy") {
            need(2, "strategy <name>");
            if (tok[1] == "quasirandom") spec.strategy = SearchStrategy::Quasirandom;
            else if (tok[1] == "coordinate-descent") spec.strategy = SearchStrategy::CoordinateDescent;
            else if (tok[1] == "nelder-mead-boxed") spec.strategy = SearchStrategy::NelderMeadBoxed;
            else throw Error(ErrorCode::ConfigError, "unknown strategy '" + std::string(tok[1]) + "'", source, line.number);
        } else if (key == "objective_interval") {
            spec.objective = interval();
        } else if (key == "validation_interval") {
            spec.validation.push_back(interval());
        } else {
            throw Error(ErrorCode::ConfigError, "unknown calibration key '" + std::string(key) + "'", source, line.number);
        }
    }
    if (spec.params.empty()) spec.params = CalibrationSpec::full_box().params;
    try {
        spec.validate();
    } catch (const Error& e) {
        throw e.with_file(source);
    }
    return spec;
}

CalibrationSpec load_calibration_spec(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_calibration_spec(ss.str(), path.string());
}

std::vector<double> halton_point(std::size_t index, std::size_t dims, const std::vector<double>& shift) {
    static constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    if (dims > std::size(kPrimes)) throw Error(ErrorCode::InvalidArgument, "too many Halton dimensions");
    std::vector<double> x(dims);
    for (std::size_t d = 0; d < dims; ++d) {
        const unsigned base = kPrimes[d];
        double f = 1.0;
        double r = 0.0;
        std::size_t i = index + 1;  // skip the all-zero point
        while (i > 0) {
            f /= base;
            r += f * static_cast<double>(i % base);
            i /= base;
        }
        if (d < shift.size()) {
            r += shift[d];
            r -= std::floor(r);
        }
        x[d] = r;
    }
    return x;
}

namespace {

using Clock = std::chrono::steady_clock;

class Objective {
public:
    Objective(const BuildingConfig& config, const CalibrationSpec& spec, const TelemetrySeries& telemetry)
        : config_(config), spec_(spec), telemetry_(telemetry) {}

    Theta decode(const std::vector<double>& unit) const {
        Theta t = config_.theta;
        for (std::size_t d = 0; d < spec_.params.size(); ++d) {
            const auto& p = spec_.params[d];
            const double u = std::clamp(unit[d], 0.0, 1.0);
            t[p.param] = std::clamp(p.min + u * (p.max - p.min), p.min, p.max);
        }
        return t;
    }

    double operator()(const Theta& theta) const {
        try {
            const FidelityReport r = n_step_eval(config_, theta, telemetry_, spec_.objective.n, spec_.objective.start);
            return r.failed || !std::isfinite(r.mae) ? std::numeric_limits<double>::infinity() : r.mae;
        } catch (const Error& e) {
            if (e.code() == ErrorCode::NonFiniteTemperature) return std::numeric_limits<double>::infinity();
            throw;
        }
    }

private:
    const BuildingConfig& config_;
    const CalibrationSpec& spec_;
    const TelemetrySeries& telemetry_;
};

// Sequential strategies evaluate through this budgeted recorder.
class Recorder {
public:
    Recorder(const Objective& objective, int budget, std::vector<EvaluationRecord>& log)
        : objective_(objective), budget_(budget), log_(log) {}

    bool exhausted() const { return static_cast<int>(log_.size()) >= budget_; }

    double eval(const std::vector<double>& unit) {
        if (exhausted()) return std::numeric_limits<double>::infinity();
        EvaluationRecord rec;
        rec.index = static_cast<int>(log_.size());
        rec.theta = objective_.decode(unit);
        rec.objective = objective_(rec.theta);
        log_.push_back(rec);
        return rec.objective;
    }

private:
    const Objective& objective_;
    int budget_;
    std::vector<EvaluationRecord>& log_;
};

void run_quasirandom(const Objective& objective, const CalibrationSpec& spec, int jobs,
                     std::vector<EvaluationRecord>& log) {
    const std::size_t dims = spec.params.size();
    Rng rng(spec.seed);
    std::vector<double> shift(dims);
    for (auto& s : shift) s = rng.uniform();

    log.assign(static_cast<std::size_t>(spec.budget), EvaluationRecord{});
    for (int i = 0; i < spec.budget; ++i) {
        log[static_cast<std::size_t>(i)].index = i;
        log[static_cast<std::size_t>(i)].theta = objective.decode(halton_point(static_cast<std::size_t>(i), dims, shift));
    }

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= spec.budget) return;
            try {
                log[static_cast<std::size_t>(i)].objective = objective(log[static_cast<std::size_t>(i)].theta);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(spec.budget);
                return;
            }
        }
    };
    const int threads = std::clamp(jobs, 1, spec.budget);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
}

void run_coordinate_descent(const Objective& objective, const CalibrationSpec& spec,
                            std::vector<EvaluationRecord>& log) {
    const std::size_t dims = spec.params.size();
    Recorder rec(objective, spec.budget, log);
    Rng rng(spec.seed);
    std::vector<double> x(dims, 0.5);
    double fx = rec.eval(x);
    double step = 0.25;
    std::vector<std::size_t> order(dims);
    std::iota(order.begin(), order.end(), 0);
    while (!rec.exhausted()) {
        for (std::size_t k = dims; k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
        bool improved = false;
        for (std::size_t d : order) {
            for (double dir : {1.0, -1.0}) {
                if (rec.exhausted()) break;
                std::vector<double> y = x;
                y[d] = std::clamp(x[d] + dir * step, 0.0, 1.0);
                if (y[d] == x[d]) continue;
                const double fy = rec.eval(y);
                if (fy < fx) {
                    x = std::move(y);
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) {
            step *= 0.5;
            if (step < 1e-6) step = 0.25;  // restart the pattern rather than stall on a flat objective
        }
    }
}

void run_nelder_mead(const Objective& objective, const CalibrationSpec& spec, std::vector<EvaluationRecord>& log) {
    const std::size_t dims = spec.params.size();
    Recorder rec(objective, spec.budget, log);
    Rng rng(spec.seed);
    auto clamp01 = [](std::vector<double> v) {
        for (auto& x : v) x = std::clamp(x, 0.0, 1.0);
        return v;
    };
    std::vector<std::vector<double>> simplex;
    std::vector<double> values;
    std::vector<double> x0(dims);
    for (auto& x : x0) x = 0.5 + 0.1 * (rng.uniform() - 0.5);
    simplex.push_back(x0);
    for (std::size_t d = 0; d < dims; ++d) {
        auto v = x0;
        v[d] += v[d] < 0.5 ? 0.25 : -0.25;
        simplex.push_back(v);
    }
    for (const auto& v : simplex) values.push_back(rec.eval(v));

    auto combine = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
        std::vector<double> out(dims);
        for (std::size_t d = 0; d < dims; ++d) out[d] = a[d] + t * (b[d] - a[d]);
        return clamp01(out);
    };
    while (!rec.exhausted()) {
        std::vector<std::size_t> idx(simplex.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<std::vector<double>> s;
        std::vector<double> v;
        for (std::size_t i : idx) {
            s.push_back(simplex[i]);
            v.push_back(values[i]);
        }
        simplex = std::move(s);
        values = std::move(v);

        std::vector<double> centroid(dims, 0.0);
        for (std::size_t i = 0; i < dims; ++i) {
            for (std::size_t d = 0; d < dims; ++d) centroid[d] += simplex[i][d] / static_cast<double>(dims);
        }
        const auto& worst = simplex.back();
        const auto reflected = combine(centroid, worst, -1.0);
        const double fr = rec.eval(reflected);
        if (fr < values.front()) {
            const auto expanded = combine(centroid, worst, -2.0);
            const double fe = rec.eval(expanded);
            if (fe < fr) {
                simplex.back() = expanded;
                values.back() = fe;
            } else {
                simplex.back() = reflected;
                values.back() = fr;
            }
        } else if (fr < values[dims - 1]) {
            simplex.back() = reflected;
            values.back() = fr;
        } else {
            const auto contracted = combine(centroid, worst, 0.5);
            const double fc = rec.eval(contracted);
            if (fc < values.back()) {
                simplex.back() = contracted;
                values.back() = fc;
            } else {
                for (std::size_t i = 1; i < simplex.size() && !rec.exhausted(); ++i) {
                    simplex[i] = combine(simplex.front(), simplex[i], 0.5);
                    values[i] = rec.eval(simplex[i]);
                }
            }
        }
    }
}

}  // namespace

CalibrationResult calibrate(const BuildingConfig& config, const CalibrationSpec& spec,
                            const TelemetrySeries& telemetry, int jobs) {
    spec.validate();
    config.theta.check_bounds();
    for (const Interval& iv : spec.validation) {
        if (iv.start + static_cast<std::size_t>(iv.n) > telemetry.size()) {
            throw Error(ErrorCode::SeriesGap, "validation interval exceeds the telemetry length");
        }
    }
    const auto t0 = Clock::now();
    const Objective objective(config, spec, telemetry);
    if (spec.objective.start + static_cast<std::size_t>(spec.objective.n) > telemetry.size()) {
        throw Error(ErrorCode::SeriesGap, "objective interval exceeds the telemetry length");
    }
    // Zone-set and reset problems surface here instead of inside the workers.
    (void)n_step_run(config, spec.midpoint(config.theta), telemetry, 1, spec.objective.start);

    CalibrationResult result;
    switch (spec.strategy) {
        case SearchStrategy::Quasirandom: run_quasirandom(objective, spec, jobs, result.log); break;
        case SearchStrategy::CoordinateDescent: run_coordinate_descent(objective, spec, result.log); break;
        case SearchStrategy::NelderMeadBoxed: run_nelder_mead(objective, spec, result.log); break;
    }

    double best = std::numeric_limits<double>::infinity();
    for (auto& rec : result.log) {
        if (rec.objective < best) {
            best = rec.objective;
            result.best_index = rec.index;
        }
        rec.running_best = best;
    }
    result.degenerate = result.best_index < 0;
    if (result.degenerate) result.best_index = 0;
    result.best_theta = result.log[static_cast<std::size_t>(result.best_index)].theta;
    result.best_objective = result.log[static_cast<std::size_t>(result.best_index)].objective;
    result.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    const int workers = spec.strategy == SearchStrategy::Quasirandom ? std::clamp(jobs, 1, spec.budget) : 1;
    result.mean_evaluation_seconds = result.wall_seconds * workers / static_cast<double>(result.log.size());
    return result;
}

void write_calibration_log_csv(std::ostream& out, const CalibrationResult& result) {
    out << "index";
    for (const auto& b : theta_bounds()) out << ',' << b.name;
    out << ",objective_mae,running_best\n";
    for (const auto& rec : result.log) {
        out << rec.index;
        for (double v : rec.theta.values) out << ',' << detail::format_double(v);
        out << ',' << detail::format_double(rec.objective) << ',' << detail::format_double(rec.running_best) << '\n';
    }
}

}  // namespace sbsim
