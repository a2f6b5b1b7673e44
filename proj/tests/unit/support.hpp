#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sbsim/error.hpp"
#include "sbsim/grid.hpp"

namespace testing {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(SBSIM_FIXTURES) / rel; }

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("sbsim_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Grid from glyph rows: O outside, X exterior wall, x interior wall,
/// digits 0-9 are air zones, '*' is zone 0 with a diffuser.
inline sbsim::ThermalGrid glyph_grid(const std::vector<std::string>& rows, double h, double p, double t0,
                                     sbsim::Material wall = {1.0, 1000.0, 1000.0}) {
    std::vector<sbsim::CellSpec> cells;
    for (const auto& row : rows) {
        for (char g : row) {
            sbsim::CellSpec s;
            switch (g) {
                case 'O': s.kind = sbsim::CellKind::OutsideAir; break;
                case 'X': s.kind = sbsim::CellKind::ExteriorWall; s.material = wall; break;
                case 'x': s.kind = sbsim::CellKind::InteriorWall; s.material = wall; break;
                case '*': s.kind = sbsim::CellKind::InteriorAir; s.zone = 0; s.material = sbsim::kInteriorAir;
                          s.has_diffuser = true; break;
                default: s.kind = sbsim::CellKind::InteriorAir; s.zone = g - '0'; s.material = sbsim::kInteriorAir;
            }
            cells.push_back(s);
        }
    }
    sbsim::ThermalGrid::Params params;
    params.rows = static_cast<int>(rows.size());
    params.cols = static_cast<int>(rows.front().size());
    params.convection_coefficient = h;
    params.shuffle_probability = p;
    return sbsim::ThermalGrid(params, std::move(cells), t0);
}

}  // namespace testing
