#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "sbsim/calib.hpp"
#include "sbsim/error.hpp"
#include "text_util.hpp"

namespace sbsim {

namespace {

constexpr std::string_view kZoneField = "zone_air_temperature";
constexpr std::string_view kAmbientField = "ambient_temperature";
constexpr std::string_view kWaterSetpointField = "supply_water_setpoint";
constexpr std::string_view kAirSetpointField = "supply_air_setpoint";
constexpr std::string_view kWaterTempField = "supply_water_temperature";
constexpr std::string_view kAirTempField = "supply_air_temperature";

struct Partial {
    TelemetryRecord record;
    bool has_ambient = false;
    bool has_water_setpoint = false;
    bool has_air_setpoint = false;
    int first_line = 0;
};

}  // namespace

ObservedState TelemetrySeries::observed(std::size_t index) const {
    const TelemetryRecord& r = records.at(index);
    ObservedState s;
    s.timestamp = r.timestamp;
    s.zone_temperatures = r.zone_temperatures;
    s.ambient_temperature = r.ambient_temperature;
    s.setpoints = r.setpoints;
    s.supply_air_temperature = r.supply_air_temperature;
    s.supply_water_temperature = r.supply_water_temperature;
    return s;
}

TimedAction TelemetrySeries::action(std::size_t index) const {
    const TelemetryRecord& r = records.at(index);
    return {r.timestamp, r.setpoints};
}

AmbientInput TelemetrySeries::ambient(std::size_t index) const {
    const TelemetryRecord& r = records.at(index);
    return {r.timestamp, r.ambient_temperature};
}

TelemetrySeries parse_telemetry(std::string_view text, const std::string& source) {
    const auto lines = detail::split_lines(text);
    std::size_t first = 0;
    while (first < lines.size() && detail::trim(lines[first].text).empty()) ++first;
    if (first == lines.size() || detail::trim(lines[first].text) != "timestamp,device_id,field,value") {
        throw Error(ErrorCode::DataError, "expected header 'timestamp,device_id,field,value'", source,
                    first < lines.size() ? lines[first].number : 0);
    }

    std::map<Timestamp, Partial> by_time;
    std::set<std::tuple<Timestamp, std::string, std::string>> seen;
    std::set<std::string> zones;
    for (std::size_t li = first + 1; li < lines.size(); ++li) {
        const auto& line = lines[li];
        if (detail::trim(line.text).empty()) continue;
        const auto cols = detail::split(line.text, ',');
        if (cols.size() != 4) {
            throw Error(ErrorCode::DataError, "expected 4 comma-separated columns", source, line.number);
        }
        Timestamp ts;
        try {
            ts = parse_iso8601(detail::trim(cols[0]));
        } catch (const Error& e) {
            throw Error(e.code(), e.message(), source, line.number);
        }
        if (!on_step_lattice(ts)) {
            throw Error(ErrorCode::MisalignedTimestamp,
                        "timestamp " + std::string(cols[0]) + " is not on the 5-minute lattice", source, line.number);
        }
        const std::string device(detail::trim(cols[1]));
        const std::string field(detail::trim(cols[2]));
        const double value = detail::parse_double(detail::trim(cols[3]), field, source, line.number,
                                                  ErrorCode::DataError);
        if (!std::isfinite(value)) throw Error(ErrorCode::DataError, "non-finite value", source, line.number);
        if (device.empty() || field.empty()) {
            throw Error(ErrorCode::DataError, "empty device_id or field", source, line.number);
        }
        // Non-zone fields are singular per timestamp regardless of reporting device.
        const std::string key_device = field == kZoneField ? device : std::string{};
        if (!seen.emplace(ts, key_device, field).second) {
            throw Error(ErrorCode::DuplicateRecord,
                        "duplicate " + field + " for '" + device + "' at " + format_iso8601(ts), source, line.number);
        }
        Partial& p = by_time[ts];
        if (p.first_line == 0) p.first_line = line.number;
        p.record.timestamp = ts;
        if (field == kZoneField) {
            p.record.zone_temperatures[device] = value;
            zones.insert(device);
        } else if (field == kAmbientField) {
            p.record.ambient_temperature = value;
            p.has_ambient = true;
        } else if (field == kWaterSetpointField) {
            p.record.setpoints.supply_water_setpoint = value;
            p.has_water_setpoint = true;
        } else if (field == kAirSetpointField) {
            p.record.setpoints.supply_air_setpoint = value;
            p.has_air_setpoint = true;
        } else if (field == kWaterTempField) {
            p.record.supply_water_temperature = value;
        } else if (field == kAirTempField) {
            p.record.supply_air_temperature = value;
        } else {
            p.record.extra[device + "/" + field] = value;
        }
    }
    if (by_time.empty()) throw Error(ErrorCode::DataError, "telemetry has no records", source);
    if (zones.empty()) throw Error(ErrorCode::MissingZoneReading, "telemetry has no zone_air_temperature rows", source);

    TelemetrySeries series;
    series.zones.assign(zones.begin(), zones.end());
    Timestamp previous = 0;
    bool have_previous = false;
    for (auto& [ts, p] : by_time) {
        if (have_previous && ts - previous != kStepSeconds) {
            throw Error(ErrorCode::SeriesGap,
                        "no records between " + format_iso8601(previous) + " and " + format_iso8601(ts), source,
                        p.first_line);
        }
        for (const auto& z : series.zones) {
            if (!p.record.zone_temperatures.count(z)) {
                throw Error(ErrorCode::MissingZoneReading,
                            "record at " + format_iso8601(ts) + " has no reading for zone '" + z + "'", source,
                            p.first_line);
            }
        }
        if (!p.has_ambient || !p.has_water_setpoint || !p.has_air_setpoint) {
            throw Error(ErrorCode::DataError,
                        "record at " + format_iso8601(ts) +
                            " needs ambient_temperature, supply_water_setpoint and supply_air_setpoint",
                        source, p.first_line);
        }
        series.records.push_back(std::move(p.record));
        previous = ts;
        have_previous = true;
    }
    return series;
}

TelemetrySeries load_telemetry(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::DataError, "cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_telemetry(ss.str(), path.string());
}

void write_telemetry_csv(std::ostream& out, const TelemetrySeries& series) {
    out << "timestamp,device_id,field,value\n";
    for (const auto& r : series.records) {
        const std::string ts = format_iso8601(r.timestamp);
        for (const auto& [zone, t] : r.zone_temperatures) {
            out << ts << ',' << zone << ',' << kZoneField << ',' << detail::format_double(t) << '\n';
        }
        out << ts << ",weather," << kAmbientField << ',' << detail::format_double(r.ambient_temperature) << '\n';
        out << ts << ",boiler," << kWaterSetpointField << ','
            << detail::format_double(r.setpoints.supply_water_setpoint) << '\n';
        out << ts << ",ahu," << kAirSetpointField << ',' << detail::format_double(r.setpoints.supply_air_setpoint)
            << '\n';
        if (r.supply_water_temperature) {
            out << ts << ",boiler," << kWaterTempField << ',' << detail::format_double(*r.supply_water_temperature)
                << '\n';
        }
        if (r.supply_air_temperature) {
            out << ts << ",ahu," << kAirTempField << ',' << detail::format_double(*r.supply_air_temperature) << '\n';
        }
        for (const auto& [key, v] : r.extra) {
            const auto slash = key.find('/');
            out << ts << ',' << key.substr(0, slash) << ',' << key.substr(slash + 1) << ','
                << detail::format_double(v) << '\n';
        }
    }
}

}  // namespace sbsim
