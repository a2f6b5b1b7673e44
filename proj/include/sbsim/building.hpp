#pragma once

// Building configuration: floorplan grids, device placement, the tunable
// physical parameter vector, and the manifest that ties them together.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sbsim/grid.hpp"
#include "sbsim/hvac.hpp"
#include "sbsim/timeutil.hpp"

namespace sbsim {

// ---------------------------------------------------------------------------
// Floorplans
// ---------------------------------------------------------------------------

// Glyphs: 'O' outside air, 'X' exterior wall, 'x' interior wall, any other
// ASCII letter or digit labels an interior-air zone.
inline constexpr char kOutsideGlyph = 'O';
inline constexpr char kExteriorWallGlyph = 'X';
inline constexpr char kInteriorWallGlyph = 'x';

bool is_zone_glyph(char c);

struct FloorplanDoc {
    std::string floor_id;
    double dx = 1.0;            // m
    double floor_height = 3.0;  // m
    std::vector<std::string> rows;
    std::map<char, std::string> aliases;  // zone-alias <glyph> <long-name>

    int row_count() const { return static_cast<int>(rows.size()); }
    int col_count() const { return rows.empty() ? 0 : static_cast<int>(rows.front().size()); }
    char glyph(int row, int col) const { return rows[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)]; }

    /// Zone glyphs in row-major order of first appearance.
    std::vector<char> zone_glyphs() const;
    std::string zone_name(char glyph) const;

    bool operator==(const FloorplanDoc&) const = default;
};

/// Text format: header `floor <id> dx_m <v> height_m <v>`, optional
/// `zone-alias <glyph> <name>` lines, then the glyph grid. Blank lines and
/// `#` comments are skipped. Throws RaggedGrid, UnknownGlyph,
/// DisconnectedZone, NoInterior or ConfigError.
FloorplanDoc parse_floorplan(std::string_view text, const std::string& source = {});
std::string serialize_floorplan(const FloorplanDoc& doc);

// ---------------------------------------------------------------------------
// Devices
// ---------------------------------------------------------------------------

enum class DeviceType { Vav, Ahu, Boiler, Chiller };

const char* to_string(DeviceType type);

struct DevicePlacement {
    std::string device_id;
    DeviceType type = DeviceType::Vav;
    std::string zone;                           // vav only
    std::vector<std::pair<int, int>> diffusers;  // (row, col), vav only
    std::map<std::string, double> constants;     // defaults filled in
    int line = 0;

    bool operator==(const DevicePlacement& o) const {
        return device_id == o.device_id && type == o.type && zone == o.zone && diffusers == o.diffusers &&
               constants == o.constants;
    }
};

/// Known constant keys and their defaults for a device type.
const std::map<std::string, double>& device_defaults(DeviceType type);

/// Line format `device <id> type <t> [zone <z>] [diffuser r,c;r,c] [key=value ...]`.
/// Checks syntax, duplicates and the ahu/boiler/chiller singletons.
std::vector<DevicePlacement> parse_devices(std::string_view text, const std::string& source = {});

/// As above, then checks placement against the floorplans: every diffuser on
/// an interior-air cell of its zone, every zone served by a vav.
std::vector<DevicePlacement> parse_devices(std::string_view text, std::span<const FloorplanDoc> floors,
                                           const std::string& source = {});

void validate_devices(const std::vector<DevicePlacement>& devices, std::span<const FloorplanDoc> floors,
                      const std::string& source = {});

std::string serialize_devices(const std::vector<DevicePlacement>& devices);

// ---------------------------------------------------------------------------
// Tunable physical parameters
// ---------------------------------------------------------------------------

enum class ThetaParam : int {
    ExteriorConvection = 0,
    ExteriorWallConductivity,
    ExteriorWallDensity,
    ExteriorWallHeatCapacity,
    InteriorWallConductivity,
    InteriorWallDensity,
    InteriorWallHeatCapacity,
    ShuffleProbability,
};

inline constexpr std::size_t kThetaSize = 8;

struct ParamBounds {
    const char* name;
    double min;
    double max;
    double best;  // calibrated value for the pilot building, used as default
};

/// Search box for the eight tunable parameters.
const std::array<ParamBounds, kThetaSize>& theta_bounds();
std::optional<ThetaParam> theta_param_from_name(std::string_view name);

struct Theta {
    std::array<double, kThetaSize> values{};

    double& operator[](ThetaParam p) { return values[static_cast<std::size_t>(p)]; }
    double operator[](ThetaParam p) const { return values[static_cast<std::size_t>(p)]; }

    Material exterior_wall() const;
    Material interior_wall() const;
    double convection() const { return (*this)[ThetaParam::ExteriorConvection]; }
    double shuffle_probability() const { return (*this)[ThetaParam::ShuffleProbability]; }

    static Theta defaults();
    static Theta midpoint();

    /// Throws BoundsViolation when any component is non-finite or outside its bounds.
    void check_bounds() const;

    bool operator==(const Theta&) const = default;
};

// ---------------------------------------------------------------------------
// Whole-building configuration
// ---------------------------------------------------------------------------

struct RewardConfig {
    double w_carbon = 1.0;
    double w_energy = 1.0;
    double w_comfort = 10.0;
    double carbon_scale = 1.0;     // kg CO2e per unit cost
    double energy_scale = 3.6e6;   // J per unit cost (1 kWh)
    double comfort_scale = 1.0;    // K per unit cost
};

struct ZoneRef {
    int floor = 0;
    int local = 0;  // zone index within the floor's ThermalGrid
};

struct BuildingConfig {
    std::vector<FloorplanDoc> floors;
    std::vector<DevicePlacement> devices;
    Theta theta = Theta::defaults();
    RewardConfig reward;
    EmissionFactors emissions;
    std::map<std::string, double> plant_overrides;  // "ahu.recirc_fraction" -> value
    std::map<std::string, ZoneComfortSpec> comfort;  // per zone; "*" is the default
    std::uint64_t seed = 0;
    double max_fourier = 0.25;
    double initial_temperature = 294.15;             // K
    std::map<std::string, double> initial_zone_temperature;
    double ambient_temperature = 290.15;             // K, used when no ambient series is given
    Timestamp start_time = 1688607600;               // 2023-07-06T01:40:00Z

    /// Building-wide zone ids in floor order, then row-major first appearance.
    std::vector<std::string> zone_ids() const;
    std::vector<ZoneRef> zone_refs() const;
    int zone_index(const std::string& zone_id) const;  // -1 when unknown
    ZoneComfortSpec comfort_for(const std::string& zone_id) const;

    PlantConfig plant_config() const;
    std::vector<VavConfig> vav_configs() const;
    std::vector<ThermalGrid> build_grids(double initial_temperature) const;

    /// Full consistency check: floors, devices, zone uniqueness, θ bounds,
    /// comfort specs. Throws sbsim::Error.
    void validate() const;
};

/// Line-based manifest; relative paths resolve against the manifest's
/// directory. Throws sbsim::Error carrying the offending file and line.
BuildingConfig load_manifest(const std::filesystem::path& path);
BuildingConfig parse_manifest(std::string_view text, const std::filesystem::path& base_dir,
                              const std::string& source = {});

/// Manifest fragment with one `theta <name> <value>` line per parameter.
std::string theta_patch(const Theta& theta);

}  // namespace sbsim
