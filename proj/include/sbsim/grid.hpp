#pragma once

// Finite-difference thermal core. Each floor is a 2D lattice of control
// volumes of footprint dx*dx and height floor_height. Every non-boundary cell
// obeys Q_ext + Q_1 + Q_2 + Q_3 + Q_4 = M c dT/dt over its four faces.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sbsim/rng.hpp"

namespace sbsim {

struct Material {
    double conductivity = 0.0;   // W/m/K
    double density = 0.0;        // kg/m^3
    double heat_capacity = 0.0;  // J/kg/K

    bool valid() const;
    double diffusivity() const { return conductivity / (density * heat_capacity); }
};

/// Standard air properties used for every interior-air control volume.
inline constexpr Material kInteriorAir{0.026, 1.2, 1006.0};

enum class CellKind : std::uint8_t { OutsideAir, ExteriorWall, InteriorWall, InteriorAir };

struct CellSpec {
    CellKind kind = CellKind::OutsideAir;
    int zone = -1;  // InteriorAir only
    Material material{};
    bool has_diffuser = false;
};

/// Read-only snapshot of one cell.
struct ControlVolume {
    CellKind kind;
    int zone;
    double temperature;  // K
    Material material;
    double mass;  // kg
    bool has_diffuser;
};

struct StepDiagnostics {
    double total_internal_energy = 0.0;      // J, sum of M c T over non-boundary cells after the step
    double boundary_energy_exchanged = 0.0;  // J, positive into the grid
    double external_energy_injected = 0.0;   // J
    int substeps_used = 0;
};

/// Heat flow into `self` across one face by Fourier conduction, W.
double conduction_flux(double t_self, double t_neighbor, double k_interface, double face_area, double dx);

/// Heat flow into the surface from ambient by forced convection, W.
double convection_flux(double t_surface, double t_ambient, double h, double face_area);

/// Harmonic mean of two conductivities.
double interface_conductivity(double k_a, double k_b);

class ThermalGrid {
public:
    struct Params {
        int rows = 0;
        int cols = 0;
        double dx = 1.0;                      // m
        double floor_height = 3.0;            // m
        double convection_coefficient = 1.0;  // W/m^2/K
        double shuffle_probability = 0.0;
        double max_fourier = 0.25;            // per-substep stability target
    };

    /// Validates and builds the lattice. Zones must be numbered 0..Z-1 and each
    /// must be 4-connected. Throws sbsim::Error.
    ThermalGrid(const Params& params, std::vector<CellSpec> cells, double initial_temperature);

    int rows() const { return params_.rows; }
    int cols() const { return params_.cols; }
    std::size_t size() const { return kind_.size(); }
    std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * params_.cols + col; }
    const Params& params() const { return params_; }
    double dx() const { return params_.dx; }
    double floor_height() const { return params_.floor_height; }
    double face_area() const { return params_.dx * params_.floor_height; }

    ControlVolume cell(std::size_t i) const;
    ControlVolume cell(int row, int col) const { return cell(index(row, col)); }
    CellKind kind(std::size_t i) const { return kind_[i]; }
    int zone(std::size_t i) const { return zone_[i]; }
    bool has_diffuser(std::size_t i) const { return diffuser_[i] != 0; }
    double heat_capacity_of(std::size_t i) const { return capacity_[i]; }  // M c, J/K

    std::span<const double> temperatures() const { return temperature_; }
    std::span<double> temperatures() { return temperature_; }
    void set_temperature(std::size_t i, double t) { temperature_[i] = t; }

    int zone_count() const { return static_cast<int>(zone_cells_.size()); }
    std::span<const std::size_t> zone_cells(int zone) const;

    /// Arithmetic mean over the zone's air cells. Independent of the order in
    /// which the temperatures sit in the zone (bitwise). Throws UnknownZone.
    double zone_mean_temperature(int zone) const;

    /// Sum of M c T over non-boundary cells, extended precision.
    long double total_internal_energy() const;

    /// Smallest uniform substep count keeping the cell Fourier number
    /// dt_sub * sum(G_faces) / (4 M c) at or below max_fourier for every cell.
    int substeps_for(double dt) const;

    /// Advance dt seconds. `external_power` is W per cell (empty = none) and may
    /// be nonzero only on diffuser cells. OutsideAir cells are pinned to
    /// `ambient`. Throws NonFiniteTemperature on blow-up, InvalidArgument on
    /// bad inputs.
    StepDiagnostics step_energy_balance(double dt, std::span<const double> external_power, double ambient);

    /// Intra-zone air mixing: each air cell is selected with the shuffle
    /// probability and the selected temperatures of a zone are permuted
    /// uniformly among themselves. Consumes exactly one uniform per air cell
    /// plus the permutation draws.
    void shuffle_air(Rng& rng);

private:
    void check_connectivity() const;

    Params params_;
    std::vector<CellKind> kind_;
    std::vector<int> zone_;
    std::vector<Material> material_;
    std::vector<std::uint8_t> diffuser_;
    std::vector<double> temperature_;
    std::vector<double> mass_;
    std::vector<double> capacity_;
    std::vector<double> inv_capacity_;      // 0 for boundary cells
    std::vector<double> g_right_;           // W/K to (r, c+1); 0 if absent/boundary
    std::vector<double> g_down_;            // W/K to (r+1, c)
    std::vector<double> g_convection_;      // W/K to ambient
    std::vector<std::size_t> active_;       // non-boundary cells
    std::vector<std::size_t> boundary_;     // OutsideAir cells
    std::vector<std::size_t> convective_;   // cells with g_convection > 0
    std::vector<std::vector<std::size_t>> zone_cells_;
    double max_rate_ = 0.0;                 // max over cells of sum(G_cond)/(M c), 1/s
    std::vector<double> flux_scratch_;
};

}  // namespace sbsim
