#include "sbsim/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "sbsim/error.hpp"
#include "text_util.hpp"

namespace sbsim {

namespace {

double quantile_sorted(const std::vector<double>& v, double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace

Quartiles quartiles(std::vector<double> values) {
    if (values.empty()) throw Error(ErrorCode::InvalidArgument, "quartiles of an empty set");
    std::sort(values.begin(), values.end());
    return {values.front(), quantile_sorted(values, 0.25), quantile_sorted(values, 0.5), quantile_sorted(values, 0.75),
            values.back()};
}

std::vector<DriftRow> drift_series(const TelemetrySeries& telemetry, const NStepRun& run, std::size_t start) {
    std::vector<DriftRow> rows;
    for (std::size_t t = 0; t < run.sim_zone_temperatures.size(); ++t) {
        const TelemetryRecord& rec = telemetry.records.at(start + t);
        std::vector<double> real;
        std::vector<double> sim;
        for (const auto& [zone, v] : rec.zone_temperatures) real.push_back(v);
        for (const auto& [zone, v] : run.sim_zone_temperatures[t]) sim.push_back(v);
        rows.push_back({static_cast<int>(t), rec.timestamp, quartiles(real), quartiles(sim), run.report.epsilon[t]});
    }
    return rows;
}

void write_drift_csv(std::ostream& out, const std::vector<DriftRow>& rows) {
    out << "step,timestamp,real_min,real_q1,real_median,real_q3,real_max,"
           "sim_min,sim_q1,sim_median,sim_q3,sim_max,epsilon\n";
    auto q = [&](const Quartiles& x) {
        out << ',' << detail::fixed(x.min, 4) << ',' << detail::fixed(x.q1, 4) << ',' << detail::fixed(x.median, 4)
            << ',' << detail::fixed(x.q3, 4) << ',' << detail::fixed(x.max, 4);
    };
    for (const auto& r : rows) {
        out << r.step << ',' << format_iso8601(r.timestamp);
        q(r.real);
        q(r.sim);
        out << ',' << detail::fixed(r.epsilon, 6) << '\n';
    }
}

Heatmap difference_heatmap(const ThermalGrid& grid, const std::vector<std::string>& zone_names,
                           const std::map<std::string, double>& real) {
    Heatmap map;
    map.rows = grid.rows();
    map.cols = grid.cols();
    map.kinds.resize(grid.size());
    map.level.assign(grid.size(), 0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        map.kinds[i] = grid.kind(i);
        if (grid.kind(i) != CellKind::InteriorAir) continue;
        const std::string& zone = zone_names.at(static_cast<std::size_t>(grid.zone(i)));
        const auto it = real.find(zone);
        if (it == real.end()) throw Error(ErrorCode::ZoneSetMismatch, "no real temperature for zone '" + zone + "'");
        map.level[i] = std::llround(100.0 * (grid.temperatures()[i] - it->second));
    }
    return map;
}

void write_heatmap_csv(std::ostream& out, const Heatmap& map) {
    for (int r = 0; r < map.rows; ++r) {
        for (int c = 0; c < map.cols; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * map.cols + c;
            if (c) out << ',';
            if (map.kinds[i] != CellKind::InteriorAir) continue;
            const std::int64_t l = map.level[i];
            const std::int64_t a = l < 0 ? -l : l;
            char buf[48];
            std::snprintf(buf, sizeof buf, "%s%lld.%02lld", l < 0 ? "-" : "", static_cast<long long>(a / 100),
                          static_cast<long long>(a % 100));
            out << buf;
        }
        out << '\n';
    }
}

void write_heatmap_ppm(std::ostream& out, const Heatmap& map) {
    std::int64_t peak = 2;
    for (std::size_t i = 0; i < map.level.size(); ++i) {
        if (map.kinds[i] == CellKind::InteriorAir) peak = std::max<std::int64_t>(peak, std::llabs(map.level[i]));
    }
    const std::int64_t m = std::min<std::int64_t>(peak, 65535);
    out << "P3\n# sbsim difference heatmap: one level = 0.01 K, red = simulator warmer, blue = colder\n"
        << map.cols << ' ' << map.rows << '\n'
        << m << '\n';
    for (int r = 0; r < map.rows; ++r) {
        for (int c = 0; c < map.cols; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * map.cols + c;
            std::int64_t px[3];
            switch (map.kinds[i]) {
                case CellKind::OutsideAir: px[0] = px[1] = px[2] = m / 2; break;
                case CellKind::ExteriorWall:
                case CellKind::InteriorWall: px[0] = px[1] = px[2] = 0; break;
                case CellKind::InteriorAir: {
                    const std::int64_t l = std::clamp<std::int64_t>(map.level[i], -m, m);
                    if (l >= 0) {
                        px[0] = m;
                        px[1] = px[2] = m - l;
                    } else {
                        px[0] = px[1] = m + l;
                        px[2] = m;
                    }
                    break;
                }
            }
            out << (c ? " " : "") << px[0] << ' ' << px[1] << ' ' << px[2];
        }
        out << '\n';
    }
}

}  // namespace sbsim
