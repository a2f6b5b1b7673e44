#include "sbsim/building.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "sbsim/error.hpp"
#include "text_util.hpp"

namespace sbsim {

using detail::format_double;
using detail::is_blank_or_comment;
using detail::parse_double;
using detail::split_lines;
using detail::tokens;

bool is_zone_glyph(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) && c != kOutsideGlyph && c != kExteriorWallGlyph &&
           c != kInteriorWallGlyph;
}

std::vector<char> FloorplanDoc::zone_glyphs() const {
    std::vector<char> out;
    for (const auto& row : rows) {
        for (char c : row) {
            if (is_zone_glyph(c) && std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
        }
    }
    return out;
}

std::string FloorplanDoc::zone_name(char glyph) const {
    const auto it = aliases.find(glyph);
    return it == aliases.end() ? std::string(1, glyph) : it->second;
}

namespace {

void check_zone_connectivity(const FloorplanDoc& doc, const std::string& source, int first_row_line) {
    const int rows = doc.row_count();
    const int cols = doc.col_count();
    std::vector<char> visited(static_cast<std::size_t>(rows * cols), 0);
    std::set<char> done;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const char g = doc.glyph(r, c);
            if (!is_zone_glyph(g) || visited[static_cast<std::size_t>(r * cols + c)]) continue;
            if (!done.insert(g).second) {
                throw Error(ErrorCode::DisconnectedZone,
                            "zone '" + doc.zone_name(g) + "' is split into more than one 4-connected region (cell " +
                                std::to_string(r) + "," + std::to_string(c) + ")",
                            source, first_row_line + r);
            }
            std::vector<std::pair<int, int>> stack{{r, c}};
            visited[static_cast<std::size_t>(r * cols + c)] = 1;
            while (!stack.empty()) {
                const auto [cr, cc] = stack.back();
                stack.pop_back();
                const int dr[4] = {-1, 1, 0, 0};
                const int dc[4] = {0, 0, -1, 1};
                for (int d = 0; d < 4; ++d) {
                    const int nr = cr + dr[d];
                    const int nc = cc + dc[d];
                    if (nr < 0 || nc < 0 || nr >= rows || nc >= cols) continue;
                    auto& v = visited[static_cast<std::size_t>(nr * cols + nc)];
                    if (!v && doc.glyph(nr, nc) == g) {
                        v = 1;
                        stack.emplace_back(nr, nc);
                    }
                }
            }
        }
    }
}

}  // namespace

FloorplanDoc parse_floorplan(std::string_view text, const std::string& source) {
    FloorplanDoc doc;
    bool have_header = false;
    int first_row_line = 0;
    for (const auto& line : split_lines(text)) {
        if (!have_header || doc.rows.empty()) {
            if (is_blank_or_comment(line.text)) continue;
            const auto tok = tokens(line.text);
            if (!have_header) {
                if (tok.size() != 6 || tok[0] != "floor" || tok[2] != "dx_m" || tok[4] != "height_m") {
                    throw Error(ErrorCode::ConfigError, "expected header 'floor <id> dx_m <v> height_m <v>'",
                                source, line.number);
                }
                doc.floor_id = std::string(tok[1]);
                doc.dx = parse_double(tok[3], "dx_m", source, line.number);
                doc.floor_height = parse_double(tok[5], "height_m", source, line.number);
                if (!(doc.dx > 0.0) || !std::isfinite(doc.dx) || !(doc.floor_height > 0.0) ||
                    !std::isfinite(doc.floor_height)) {
                    throw Error(ErrorCode::ConfigError, "dx_m and height_m must be positive", source, line.number);
                }
                have_header = true;
                continue;
            }
            if (tok[0] == "zone-alias") {
                if (tok.size() != 3 || tok[1].size() != 1 || !is_zone_glyph(tok[1][0])) {
                    throw Error(ErrorCode::ConfigError, "expected 'zone-alias <glyph> <name>'", source, line.number);
                }
                doc.aliases[tok[1][0]] = std::string(tok[2]);
                continue;
            }
            first_row_line = line.number;
        } else if (line.text.empty()) {
            continue;  // trailing blank lines
        }
        const std::string_view row = line.text;
        for (std::size_t c = 0; c < row.size(); ++c) {
            const char g = row[c];
            if (g != kOutsideGlyph && g != kExteriorWallGlyph && g != kInteriorWallGlyph && !is_zone_glyph(g)) {
                throw Error(ErrorCode::UnknownGlyph,
                            "unknown glyph '" + std::string(1, g) + "' at row " +
                                std::to_string(doc.rows.size()) + ", column " + std::to_string(c),
                            source, line.number);
            }
        }
        if (!doc.rows.empty() && row.size() != doc.rows.front().size()) {
            throw Error(ErrorCode::RaggedGrid,
                        "row " + std::to_string(doc.rows.size()) + " has length " + std::to_string(row.size()) +
                            ", expected " + std::to_string(doc.rows.front().size()),
                        source, line.number);
        }
        doc.rows.emplace_back(row);
    }
    if (!have_header) throw Error(ErrorCode::ConfigError, "missing floor header", source);
    if (doc.rows.empty() || doc.zone_glyphs().empty()) {
        throw Error(ErrorCode::NoInterior, "floor '" + doc.floor_id + "' has no interior air cells", source);
    }
    for (const auto& [glyph, name] : doc.aliases) {
        const auto zones = doc.zone_glyphs();
        if (std::find(zones.begin(), zones.end(), glyph) == zones.end()) {
            throw Error(ErrorCode::ConfigError, "zone-alias for glyph '" + std::string(1, glyph) + "' not on grid",
                        source);
        }
    }
    check_zone_connectivity(doc, source, first_row_line);
    return doc;
}

std::string serialize_floorplan(const FloorplanDoc& doc) {
    std::ostringstream out;
    out << "floor " << doc.floor_id << " dx_m " << format_double(doc.dx) << " height_m "
        << format_double(doc.floor_height) << "\n";
    for (const auto& [glyph, name] : doc.aliases) out << "zone-alias " << glyph << " " << name << "\n";
    for (const auto& row : doc.rows) out << row << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------

const char* to_string(DeviceType type) {
    switch (type) {
        case DeviceType::Vav: return "vav";
        case DeviceType::Ahu: return "ahu";
        case DeviceType::Boiler: return "boiler";
        case DeviceType::Chiller: return "chiller";
    }
    return "?";
}

const std::map<std::string, double>& device_defaults(DeviceType type) {
    static const std::map<std::string, double> vav{
        {"design_flow", 0.5}, {"reheat_effectiveness", 0.8}, {"min_damper", 0.2}};
    static const std::map<std::string, double> ahu{
        {"intake_fan_power", 500.0}, {"exhaust_fan_power", 500.0}, {"recirc_fraction", 0.3},
        {"time_constant", 900.0},    {"supply_air_min", 285.15},   {"supply_air_max", 300.15}};
    static const std::map<std::string, double> boiler{
        {"efficiency", 0.9},          {"pump_power", 300.0},        {"time_constant", 900.0},
        {"loop_loss_fraction", 0.05}, {"supply_water_min", 310.15}, {"supply_water_max", 355.15}};
    static const std::map<std::string, double> chiller{{"cop", 3.5}, {"pump_power", 300.0}};
    switch (type) {
        case DeviceType::Vav: return vav;
        case DeviceType::Ahu: return ahu;
        case DeviceType::Boiler: return boiler;
        case DeviceType::Chiller: break;
    }
    return chiller;
}

std::vector<DevicePlacement> parse_devices(std::string_view text, const std::string& source) {
    std::vector<DevicePlacement> devices;
    std::set<std::string> ids;
    std::map<DeviceType, int> singleton_line;
    for (const auto& line : split_lines(text)) {
        if (is_blank_or_comment(line.text)) continue;
        const auto tok = tokens(line.text);
        if (tok.size() < 4 || tok[0] != "device" || tok[2] != "type") {
            throw Error(ErrorCode::ConfigError, "expected 'device <id> type <type> ...'", source, line.number);
        }
        DevicePlacement dev;
        dev.device_id = std::string(tok[1]);
        dev.line = line.number;
        const std::string_view type = tok[3];
        if (type == "vav") dev.type = DeviceType::Vav;
        else if (type == "ahu") dev.type = DeviceType::Ahu;
        else if (type == "boiler") dev.type = DeviceType::Boiler;
        else if (type == "chiller") dev.type = DeviceType::Chiller;
        else {
            throw Error(ErrorCode::UnknownDeviceType,
                        "device '" + dev.device_id + "' has unknown type '" + std::string(type) + "'", source,
                        line.number);
        }
        if (!ids.insert(dev.device_id).second) {
            throw Error(ErrorCode::DuplicateDeviceId, "device id '" + dev.device_id + "' declared twice", source,
                        line.number);
        }
        if (dev.type != DeviceType::Vav) {
            if (singleton_line.count(dev.type)) {
                throw Error(ErrorCode::MissingSingleton,
                            std::string("duplicate ") + to_string(dev.type) + " (first declared on line " +
                                std::to_string(singleton_line[dev.type]) + ")",
                            source, line.number);
            }
            singleton_line[dev.type] = line.number;
        }

        const auto& defaults = device_defaults(dev.type);
        dev.constants = defaults;
        bool have_zone = false;
        bool have_diffuser = false;
        for (std::size_t i = 4; i < tok.size(); ++i) {
            if (tok[i] == "zone" || tok[i] == "diffuser") {
                if (dev.type != DeviceType::Vav) {
                    throw Error(ErrorCode::ConfigError, "'" + std::string(tok[i]) + "' is only valid for vav devices",
                                source, line.number);
                }
                if (i + 1 >= tok.size()) {
                    throw Error(ErrorCode::ConfigError, "missing value after '" + std::string(tok[i]) + "'", source,
                                line.number);
                }
                if (tok[i] == "zone") {
                    dev.zone = std::string(tok[++i]);
                    have_zone = true;
                } else {
                    for (auto cell : detail::split(tok[++i], ';')) {
                        if (cell.empty()) continue;
                        const auto rc = detail::split(cell, ',');
                        if (rc.size() != 2) {
                            throw Error(ErrorCode::ConfigError, "diffuser cell must be 'row,col'", source,
                                        line.number);
                        }
                        dev.diffusers.emplace_back(
                            static_cast<int>(detail::parse_int(rc[0], "diffuser row", source, line.number)),
                            static_cast<int>(detail::parse_int(rc[1], "diffuser col", source, line.number)));
                    }
                    have_diffuser = true;
                }
                continue;
            }
            const auto eq = tok[i].find('=');
            if (eq == std::string_view::npos) {
                throw Error(ErrorCode::ConfigError, "unexpected token '" + std::string(tok[i]) + "'", source,
                            line.number);
            }
            const std::string key(tok[i].substr(0, eq));
            if (!defaults.count(key)) {
                throw Error(ErrorCode::ConfigError,
                            "unknown constant '" + key + "' for " + to_string(dev.type) + " device", source,
                            line.number);
            }
            const double value = parse_double(tok[i].substr(eq + 1), key, source, line.number);
            if (!std::isfinite(value)) {
                throw Error(ErrorCode::ConfigError, "constant '" + key + "' must be finite", source, line.number);
            }
            dev.constants[key] = value;
        }
        if (dev.type == DeviceType::Vav && (!have_zone || !have_diffuser || dev.diffusers.empty())) {
            throw Error(ErrorCode::ConfigError, "vav '" + dev.device_id + "' needs a zone and at least one diffuser",
                        source, line.number);
        }
        devices.push_back(std::move(dev));
    }
    for (DeviceType t : {DeviceType::Ahu, DeviceType::Boiler, DeviceType::Chiller}) {
        if (!singleton_line.count(t)) {
            throw Error(ErrorCode::MissingSingleton, std::string("no ") + to_string(t) + " device declared", source);
        }
    }
    return devices;
}

void validate_devices(const std::vector<DevicePlacement>& devices, std::span<const FloorplanDoc> floors,
                      const std::string& source) {
    std::map<std::string, std::pair<int, char>> zones;  // name -> (floor, glyph)
    for (std::size_t f = 0; f < floors.size(); ++f) {
        for (char g : floors[f].zone_glyphs()) zones[floors[f].zone_name(g)] = {static_cast<int>(f), g};
    }
    std::set<std::string> served;
    for (const auto& dev : devices) {
        if (dev.type != DeviceType::Vav) continue;
        const auto it = zones.find(dev.zone);
        if (it == zones.end()) {
            throw Error(ErrorCode::ConfigError, "vav '" + dev.device_id + "' references unknown zone '" + dev.zone + "'",
                        source, dev.line);
        }
        const FloorplanDoc& floor = floors[static_cast<std::size_t>(it->second.first)];
        for (const auto& [r, c] : dev.diffusers) {
            if (r < 0 || c < 0 || r >= floor.row_count() || c >= floor.col_count() ||
                floor.glyph(r, c) != it->second.second) {
                throw Error(ErrorCode::DiffuserOutsideZone,
                            "diffuser " + std::to_string(r) + "," + std::to_string(c) + " of '" + dev.device_id +
                                "' is not an air cell of zone '" + dev.zone + "'",
                            source, dev.line);
            }
        }
        served.insert(dev.zone);
    }
    for (const auto& [name, where] : zones) {
        if (!served.count(name)) {
            throw Error(ErrorCode::ConfigError, "zone '" + name + "' has no vav", source);
        }
    }
}

std::vector<DevicePlacement> parse_devices(std::string_view text, std::span<const FloorplanDoc> floors,
                                           const std::string& source) {
    auto devices = parse_devices(text, source);
    validate_devices(devices, floors, source);
    return devices;
}

std::string serialize_devices(const std::vector<DevicePlacement>& devices) {
    std::ostringstream out;
    for (const auto& dev : devices) {
        out << "device " << dev.device_id << " type " << to_string(dev.type);
        if (dev.type == DeviceType::Vav) {
            out << " zone " << dev.zone << " diffuser ";
            for (std::size_t i = 0; i < dev.diffusers.size(); ++i) {
                if (i) out << ';';
                out << dev.diffusers[i].first << ',' << dev.diffusers[i].second;
            }
        }
        for (const auto& [key, value] : dev.constants) out << ' ' << key << '=' << format_double(value);
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------

const std::array<ParamBounds, kThetaSize>& theta_bounds() {
    static const std::array<ParamBounds, kThetaSize> bounds{{
        {"exterior_convection_coefficient", 5.0, 800.0, 800.0},
        {"exterior_wall_conductivity", 0.01, 1.0, 0.01},
        {"exterior_wall_density", 1.0, 3000.0, 2748.0},
        {"exterior_wall_heat_capacity", 100.0, 2500.0, 2500.0},
        {"interior_wall_conductivity", 5.0, 800.0, 780.0},
        {"interior_wall_density", 0.5, 1500.0, 0.5},
        {"interior_wall_heat_capacity", 500.0, 1500.0, 500.0},
        {"shuffle_probability", 0.0, 1.0, 1.0},
    }};
    return bounds;
}

std::optional<ThetaParam> theta_param_from_name(std::string_view name) {
    const auto& b = theta_bounds();
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (name == b[i].name) return static_cast<ThetaParam>(i);
    }
    return std::nullopt;
}

Material Theta::exterior_wall() const {
    return {(*this)[ThetaParam::ExteriorWallConductivity], (*this)[ThetaParam::ExteriorWallDensity],
            (*this)[ThetaParam::ExteriorWallHeatCapacity]};
}

Material Theta::interior_wall() const {
    return {(*this)[ThetaParam::InteriorWallConductivity], (*this)[ThetaParam::InteriorWallDensity],
            (*this)[ThetaParam::InteriorWallHeatCapacity]};
}

Theta Theta::defaults() {
    Theta t;
    for (std::size_t i = 0; i < kThetaSize; ++i) t.values[i] = theta_bounds()[i].best;
    return t;
}

Theta Theta::midpoint() {
    Theta t;
    for (std::size_t i = 0; i < kThetaSize; ++i) t.values[i] = 0.5 * (theta_bounds()[i].min + theta_bounds()[i].max);
    return t;
}

void Theta::check_bounds() const {
    for (std::size_t i = 0; i < kThetaSize; ++i) {
        const auto& b = theta_bounds()[i];
        if (!std::isfinite(values[i]) || values[i] < b.min || values[i] > b.max) {
            throw Error(ErrorCode::BoundsViolation, std::string(b.name) + " = " + format_double(values[i]) +
                                                        " outside [" + format_double(b.min) + ", " +
                                                        format_double(b.max) + "]");
        }
    }
}

std::string theta_patch(const Theta& theta) {
    std::ostringstream out;
    for (std::size_t i = 0; i < kThetaSize; ++i) {
        out << "theta " << theta_bounds()[i].name << ' ' << format_double(theta.values[i]) << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------

std::vector<std::string> BuildingConfig::zone_ids() const {
    std::vector<std::string> ids;
    for (const auto& floor : floors) {
        for (char g : floor.zone_glyphs()) ids.push_back(floor.zone_name(g));
    }
    return ids;
}

std::vector<ZoneRef> BuildingConfig::zone_refs() const {
    std::vector<ZoneRef> refs;
    for (std::size_t f = 0; f < floors.size(); ++f) {
        const auto glyphs = floors[f].zone_glyphs();
        for (std::size_t z = 0; z < glyphs.size(); ++z) refs.push_back({static_cast<int>(f), static_cast<int>(z)});
    }
    return refs;
}

int BuildingConfig::zone_index(const std::string& zone_id) const {
    const auto ids = zone_ids();
    const auto it = std::find(ids.begin(), ids.end(), zone_id);
    return it == ids.end() ? -1 : static_cast<int>(it - ids.begin());
}

ZoneComfortSpec BuildingConfig::comfort_for(const std::string& zone_id) const {
    if (auto it = comfort.find(zone_id); it != comfort.end()) return it->second;
    if (auto it = comfort.find("*"); it != comfort.end()) return it->second;
    return ZoneComfortSpec{};
}

namespace {

double device_constant(const BuildingConfig& cfg, DeviceType type, const std::string& key) {
    const std::string override_key = std::string(to_string(type)) + "." + key;
    if (auto it = cfg.plant_overrides.find(override_key); it != cfg.plant_overrides.end()) return it->second;
    for (const auto& dev : cfg.devices) {
        if (dev.type == type) {
            if (auto it = dev.constants.find(key); it != dev.constants.end()) return it->second;
        }
    }
    return device_defaults(type).at(key);
}

}  // namespace

PlantConfig BuildingConfig::plant_config() const {
    PlantConfig p;
    auto ahu = [&](const char* k) { return device_constant(*this, DeviceType::Ahu, k); };
    auto boiler = [&](const char* k) { return device_constant(*this, DeviceType::Boiler, k); };
    auto chiller = [&](const char* k) { return device_constant(*this, DeviceType::Chiller, k); };
    p.air_handler.intake_fan_power = ahu("intake_fan_power");
    p.air_handler.exhaust_fan_power = ahu("exhaust_fan_power");
    p.air_handler.recirc_fraction = ahu("recirc_fraction");
    p.air_handler.time_constant = ahu("time_constant");
    p.air_handler.supply_air_min = ahu("supply_air_min");
    p.air_handler.supply_air_max = ahu("supply_air_max");
    p.boiler.efficiency = boiler("efficiency");
    p.boiler.pump_power = boiler("pump_power");
    p.boiler.time_constant = boiler("time_constant");
    p.boiler.loop_loss_fraction = boiler("loop_loss_fraction");
    p.boiler.supply_water_min = boiler("supply_water_min");
    p.boiler.supply_water_max = boiler("supply_water_max");
    p.chiller.cop = chiller("cop");
    p.chiller.pump_power = chiller("pump_power");
    p.emissions = emissions;
    return p;
}

std::vector<VavConfig> BuildingConfig::vav_configs() const {
    std::vector<VavConfig> out;
    for (const auto& dev : devices) {
        if (dev.type != DeviceType::Vav) continue;
        VavConfig v;
        v.device_id = dev.device_id;
        v.zone = zone_index(dev.zone);
        if (v.zone < 0) throw Error(ErrorCode::ConfigError, "vav '" + dev.device_id + "' has unknown zone");
        v.design_flow = dev.constants.at("design_flow");
        v.reheat_effectiveness = dev.constants.at("reheat_effectiveness");
        v.min_damper = dev.constants.at("min_damper");
        const int floor = zone_refs()[static_cast<std::size_t>(v.zone)].floor;
        const int cols = floors[static_cast<std::size_t>(floor)].col_count();
        for (const auto& [r, c] : dev.diffusers) {
            v.diffusers.push_back({floor, static_cast<std::size_t>(r) * cols + c});
        }
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<ThermalGrid> BuildingConfig::build_grids(double initial) const {
    std::vector<ThermalGrid> grids;
    const Material exterior = theta.exterior_wall();
    const Material interior = theta.interior_wall();
    const auto vavs = vav_configs();
    for (std::size_t f = 0; f < floors.size(); ++f) {
        const FloorplanDoc& doc = floors[f];
        const auto glyphs = doc.zone_glyphs();
        std::vector<CellSpec> cells;
        cells.reserve(static_cast<std::size_t>(doc.row_count() * doc.col_count()));
        for (int r = 0; r < doc.row_count(); ++r) {
            for (int c = 0; c < doc.col_count(); ++c) {
                CellSpec spec;
                const char g = doc.glyph(r, c);
                if (g == kOutsideGlyph) {
                    spec.kind = CellKind::OutsideAir;
                    spec.material = kInteriorAir;
                } else if (g == kExteriorWallGlyph) {
                    spec.kind = CellKind::ExteriorWall;
                    spec.material = exterior;
                } else if (g == kInteriorWallGlyph) {
                    spec.kind = CellKind::InteriorWall;
                    spec.material = interior;
                } else {
                    spec.kind = CellKind::InteriorAir;
                    spec.material = kInteriorAir;
                    spec.zone = static_cast<int>(std::find(glyphs.begin(), glyphs.end(), g) - glyphs.begin());
                }
                cells.push_back(spec);
            }
        }
        for (const auto& v : vavs) {
            for (const auto& d : v.diffusers) {
                if (d.floor == static_cast<int>(f)) cells[d.cell].has_diffuser = true;
            }
        }
        ThermalGrid::Params params;
        params.rows = doc.row_count();
        params.cols = doc.col_count();
        params.dx = doc.dx;
        params.floor_height = doc.floor_height;
        params.convection_coefficient = theta.convection();
        params.shuffle_probability = theta.shuffle_probability();
        params.max_fourier = max_fourier;
        grids.emplace_back(params, std::move(cells), initial);
    }
    return grids;
}

void BuildingConfig::validate() const {
    if (floors.empty()) throw Error(ErrorCode::ConfigError, "manifest lists no floorplans");
    std::set<std::string> ids;
    std::set<std::string> floor_ids;
    for (const auto& floor : floors) {
        if (!floor_ids.insert(floor.floor_id).second) {
            throw Error(ErrorCode::ConfigError, "duplicate floor id '" + floor.floor_id + "'");
        }
        for (char g : floor.zone_glyphs()) {
            if (!ids.insert(floor.zone_name(g)).second) {
                throw Error(ErrorCode::ConfigError, "zone id '" + floor.zone_name(g) +
                                                        "' appears on more than one floor; use zone-alias");
            }
        }
    }
    validate_devices(devices, floors);
    theta.check_bounds();
    for (const auto& [zone, spec] : comfort) {
        if (zone != "*" && !ids.count(zone)) {
            throw Error(ErrorCode::ConfigError, "comfort spec for unknown zone '" + zone + "'");
        }
        if (!spec.valid()) {
            throw Error(ErrorCode::ConfigError, "comfort spec for '" + zone + "' needs heating + deadband < cooling");
        }
    }
    for (const auto& [zone, t] : initial_zone_temperature) {
        if (!ids.count(zone)) throw Error(ErrorCode::ConfigError, "initial temperature for unknown zone '" + zone + "'");
        if (!std::isfinite(t) || t <= 0.0) throw Error(ErrorCode::ConfigError, "initial temperature must be > 0 K");
    }
    if (!(initial_temperature > 0.0) || !(ambient_temperature > 0.0) || !std::isfinite(initial_temperature) ||
        !std::isfinite(ambient_temperature)) {
        throw Error(ErrorCode::ConfigError, "temperatures must be finite and positive (K)");
    }
    if (reward.w_carbon < 0.0 || reward.w_energy < 0.0 || reward.w_comfort < 0.0 || !(reward.carbon_scale > 0.0) ||
        !(reward.energy_scale > 0.0) || !(reward.comfort_scale > 0.0)) {
        throw Error(ErrorCode::ConfigError, "reward weights must be >= 0 and scales > 0");
    }
    if (!(max_fourier > 0.0 && max_fourier <= 0.25)) {
        throw Error(ErrorCode::ConfigError, "max_fourier must lie in (0, 0.25]");
    }
    if (!on_step_lattice(start_time)) {
        throw Error(ErrorCode::ConfigError, "start_time must lie on the 5-minute lattice");
    }
    // Plant constants go through the plant's own checks.
    HvacPlant plant(plant_config(), vav_configs(), static_cast<int>(ids.size()));
    (void)plant;
}

namespace {

std::string read_file(const std::filesystem::path& path, const std::string& source, int line) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read '" + path.string() + "'", source, line);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

BuildingConfig parse_manifest(std::string_view text, const std::filesystem::path& base_dir, const std::string& source) {
    BuildingConfig cfg;
    std::string devices_path;
    int devices_line = 0;
    auto resolve = [&](std::string_view p) {
        std::filesystem::path path{std::string(p)};
        return path.is_absolute() ? path : base_dir / path;
    };
    auto expect = [&](const std::vector<std::string_view>& tok, std::size_t n, const detail::Line& line,
                      const char* usage) {
        if (tok.size() != n) throw Error(ErrorCode::ConfigError, std::string("expected '") + usage + "'", source, line.number);
    };
    for (const auto& line : split_lines(text)) {
        if (is_blank_or_comment(line.text)) continue;
        const auto tok = tokens(line.text);
        const std::string_view key = tok[0];
        auto num = [&](std::size_t i) { return parse_double(tok[i], key, source, line.number); };
        if (key == "floorplan") {
            expect(tok, 2, line, "floorplan <path>");
            const auto path = resolve(tok[1]);
            cfg.floors.push_back(parse_floorplan(read_file(path, source, line.number), path.string()));
        } else if (key == "devices") {
            expect(tok, 2, line, "devices <path>");
            devices_path = resolve(tok[1]).string();
            devices_line = line.number;
        } else if (key == "theta") {
            expect(tok, 3, line, "theta <name> <value>");
            const auto param = theta_param_from_name(tok[1]);
            if (!param) {
                throw Error(ErrorCode::ConfigError, "unknown parameter '" + std::string(tok[1]) + "'", source,
                            line.number);
            }
            cfg.theta[*param] = num(2);
        } else if (key == "comfort") {
            expect(tok, 5, line, "comfort <zone|*> <heating_K> <cooling_K> <deadband_K>");
            cfg.comfort[std::string(tok[1])] = ZoneComfortSpec{num(2), num(3), num(4)};
        } else if (key == "reward_weights") {
            expect(tok, 4, line, "reward_weights <carbon> <energy> <comfort>");
            cfg.reward.w_carbon = num(1);
            cfg.reward.w_energy = num(2);
            cfg.reward.w_comfort = num(3);
        } else if (key == "reward_scales") {
            expect(tok, 4, line, "reward_scales <carbon_kg> <energy_J> <comfort_K>");
            cfg.reward.carbon_scale = num(1);
            cfg.reward.energy_scale = num(2);
            cfg.reward.comfort_scale = num(3);
        } else if (key == "emission_factors") {
            expect(tok, 3, line, "emission_factors <electricity_kg_per_J> <gas_kg_per_J>");
            cfg.emissions.electricity = num(1);
            cfg.emissions.natural_gas = num(2);
        } else if (key == "plant") {
            expect(tok, 3, line, "plant <device-type>.<key> <value>");
            const auto parts = detail::split(tok[1], '.');
            bool known = false;
            if (parts.size() == 2) {
                for (DeviceType t : {DeviceType::Ahu, DeviceType::Boiler, DeviceType::Chiller}) {
                    if (parts[0] == to_string(t)) known = device_defaults(t).count(std::string(parts[1])) > 0;
                }
            }
            if (!known) {
                throw Error(ErrorCode::ConfigError, "unknown plant constant '" + std::string(tok[1]) + "'", source,
                            line.number);
            }
            cfg.plant_overrides[std::string(tok[1])] = num(2);
        } else if (key == "seed") {
            expect(tok, 2, line, "seed <integer>");
            cfg.seed = static_cast<std::uint64_t>(detail::parse_int(tok[1], "seed", source, line.number));
        } else if (key == "max_fourier") {
            expect(tok, 2, line, "max_fourier <value>");
            cfg.max_fourier = num(1);
        } else if (key == "initial_temperature") {
            expect(tok, 2, line, "initial_temperature <K>");
            cfg.initial_temperature = num(1);
        } else if (key == "initial_zone") {
            expect(tok, 3, line, "initial_zone <zone> <K>");
            cfg.initial_zone_temperature[std::string(tok[1])] = num(2);
        } else if (key == "ambient_temperature") {
            expect(tok, 2, line, "ambient_temperature <K>");
            cfg.ambient_temperature = num(1);
        } else if (key == "start_time") {
            expect(tok, 2, line, "start_time <ISO-8601>");
            try {
                cfg.start_time = parse_iso8601(tok[1]);
            } catch (const Error& e) {
                throw Error(ErrorCode::ConfigError, e.message(), source, line.number);
            }
        } else {
            throw Error(ErrorCode::ConfigError, "unknown manifest key '" + std::string(key) + "'", source, line.number);
        }
    }
    if (devices_path.empty()) throw Error(ErrorCode::ConfigError, "manifest has no 'devices' line", source);
    cfg.devices = parse_devices(read_file(devices_path, source, devices_line), devices_path);
    validate_devices(cfg.devices, cfg.floors, devices_path);
    try {
        cfg.validate();
    } catch (const Error& e) {
        if (!e.file().empty()) throw;
        throw e.with_file(source);
    }
    return cfg;
}

BuildingConfig load_manifest(const std::filesystem::path& path) {
    const std::string text = read_file(path, {}, 0);
    return parse_manifest(text, path.parent_path(), path.string());
}

}  // namespace sbsim
