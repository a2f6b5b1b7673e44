#pragma once

// Drift summaries and signed difference heatmaps for evaluation runs.
//
// Heatmap quantization: a cell's difference sim - real is rounded to whole
// centi-kelvin, level = round(100 * diff). The CSV prints level / 100 with two
// decimals. The PPM (plain P3) uses maxval M = max(2, max |level|) and encodes
//   level > 0  -> (M, M - level, M - level)   red, simulator warmer
//   level < 0  -> (M - |level|, M - |level|, M)  blue, simulator colder
//   level == 0 -> (M, M, M)                     white
//   wall       -> (0, 0, 0)
//   outside    -> (M / 2, M / 2, M / 2)
// so the level of every air cell is recoverable from the image exactly.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sbsim/calib.hpp"
#include "sbsim/grid.hpp"

namespace sbsim {

struct Quartiles {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

/// Linear-interpolation quantiles (position p * (n - 1)).
Quartiles quartiles(std::vector<double> values);

struct DriftRow {
    int step = 0;
    Timestamp timestamp = 0;
    Quartiles real;
    Quartiles sim;
    double epsilon = 0.0;
};

std::vector<DriftRow> drift_series(const TelemetrySeries& telemetry, const NStepRun& run, std::size_t start);
void write_drift_csv(std::ostream& out, const std::vector<DriftRow>& rows);

struct Heatmap {
    int rows = 0;
    int cols = 0;
    std::vector<CellKind> kinds;
    std::vector<std::int64_t> level;  // centi-kelvin, air cells only (0 elsewhere)
};

/// `zone_names[local]` names each zone of the grid; real temperatures are
/// broadcast over their zone's cells.
Heatmap difference_heatmap(const ThermalGrid& grid, const std::vector<std::string>& zone_names,
                           const std::map<std::string, double>& real);

void write_heatmap_csv(std::ostream& out, const Heatmap& map);
void write_heatmap_ppm(std::ostream& out, const Heatmap& map);

}  // namespace sbsim
