#include "sbsim/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sbsim/error.hpp"

namespace sbsim {

bool Material::valid() const {
    return std::isfinite(conductivity) && std::isfinite(density) && std::isfinite(heat_capacity) &&
           conductivity > 0.0 && density > 0.0 && heat_capacity > 0.0;
}

double conduction_flux(double t_self, double t_neighbor, double k_interface, double face_area, double dx) {
    return k_interface * face_area * (t_neighbor - t_self) / dx;
}

double convection_flux(double t_surface, double t_ambient, double h, double face_area) {
    return h * face_area * (t_ambient - t_surface);
}

double interface_conductivity(double k_a, double k_b) {
    return 2.0 * k_a * k_b / (k_a + k_b);
}

ThermalGrid::ThermalGrid(const Params& params, std::vector<CellSpec> cells, double initial_temperature)
    : params_(params) {
    if (params.rows <= 0 || params.cols <= 0 ||
        static_cast<std::size_t>(params.rows) * params.cols != cells.size()) {
        throw Error(ErrorCode::InvalidArgument, "grid dimensions do not match cell count");
    }
    if (!(params.dx > 0.0) || !(params.floor_height > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "dx and floor height must be positive");
    }
    if (!(params.convection_coefficient > 0.0) || !std::isfinite(params.convection_coefficient)) {
        throw Error(ErrorCode::InvalidArgument, "convection coefficient must be positive");
    }
    if (!(params.shuffle_probability >= 0.0 && params.shuffle_probability <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "shuffle probability must lie in [0, 1]");
    }
    if (!(params.max_fourier > 0.0 && params.max_fourier <= 0.25)) {
        throw Error(ErrorCode::InvalidArgument, "max Fourier number must lie in (0, 0.25]");
    }
    if (!std::isfinite(initial_temperature)) {
        throw Error(ErrorCode::InvalidArgument, "initial temperature must be finite");
    }

    const std::size_t n = cells.size();
    kind_.resize(n);
    zone_.resize(n);
    material_.resize(n);
    diffuser_.resize(n);
    temperature_.assign(n, initial_temperature);
    mass_.assign(n, 0.0);
    capacity_.assign(n, 0.0);
    inv_capacity_.assign(n, 0.0);

    const double volume = params.dx * params.dx * params.floor_height;
    int max_zone = -1;
    for (std::size_t i = 0; i < n; ++i) {
        const CellSpec& spec = cells[i];
        kind_[i] = spec.kind;
        zone_[i] = spec.kind == CellKind::InteriorAir ? spec.zone : -1;
        material_[i] = spec.material;
        diffuser_[i] = spec.has_diffuser ? 1 : 0;
        if (spec.kind == CellKind::OutsideAir) {
            if (spec.has_diffuser) throw Error(ErrorCode::InvalidArgument, "diffuser on a non-air cell");
            boundary_.push_back(i);
            continue;
        }
        if (!spec.material.valid()) {
            throw Error(ErrorCode::InvalidArgument, "cell " + std::to_string(i) + " has an invalid material");
        }
        if (spec.kind == CellKind::InteriorAir) {
            if (spec.zone < 0) throw Error(ErrorCode::InvalidArgument, "interior air cell without a zone");
            max_zone = std::max(max_zone, spec.zone);
        } else if (spec.has_diffuser) {
            throw Error(ErrorCode::InvalidArgument, "diffuser on a non-air cell");
        }
        mass_[i] = spec.material.density * volume;
        capacity_[i] = mass_[i] * spec.material.heat_capacity;
        inv_capacity_[i] = 1.0 / capacity_[i];
        active_.push_back(i);
    }

    zone_cells_.resize(static_cast<std::size_t>(max_zone + 1));
    for (std::size_t i = 0; i < n; ++i) {
        if (kind_[i] == CellKind::InteriorAir) zone_cells_[static_cast<std::size_t>(zone_[i])].push_back(i);
    }
    for (std::size_t z = 0; z < zone_cells_.size(); ++z) {
        if (zone_cells_[z].empty()) {
            throw Error(ErrorCode::InvalidArgument, "zone " + std::to_string(z) + " has no cells");
        }
    }
    check_connectivity();

    // Face conductances. Conduction faces G = k_if * A / dx; faces against
    // OutsideAir convect with G = h * A; missing faces are adiabatic.
    const double area = face_area();
    g_right_.assign(n, 0.0);
    g_down_.assign(n, 0.0);
    g_convection_.assign(n, 0.0);
    std::vector<double> g_sum(n, 0.0);
    auto link = [&](std::size_t a, std::size_t b, std::vector<double>& slot) {
        const bool a_out = kind_[a] == CellKind::OutsideAir;
        const bool b_out = kind_[b] == CellKind::OutsideAir;
        if (a_out && b_out) return;
        if (a_out || b_out) {
            const std::size_t inner = a_out ? b : a;
            g_convection_[inner] += params.convection_coefficient * area;
            return;
        }
        const double g =
            interface_conductivity(material_[a].conductivity, material_[b].conductivity) * area / params.dx;
        slot[a] = g;
        g_sum[a] += g;
        g_sum[b] += g;
    };
    for (int r = 0; r < params.rows; ++r) {
        for (int c = 0; c < params.cols; ++c) {
            const std::size_t i = index(r, c);
            if (c + 1 < params.cols) link(i, i + 1, g_right_);
            if (r + 1 < params.rows) link(i, i + params.cols, g_down_);
        }
    }
    for (std::size_t i : active_) {
        max_rate_ = std::max(max_rate_, g_sum[i] * inv_capacity_[i]);
        if (g_convection_[i] > 0.0) convective_.push_back(i);
    }
    flux_scratch_.assign(n, 0.0);
}

void ThermalGrid::check_connectivity() const {
    std::vector<int> component(size(), -1);
    std::vector<std::size_t> stack;
    std::vector<int> seen(zone_cells_.size(), 0);
    for (std::size_t start = 0; start < size(); ++start) {
        if (kind_[start] != CellKind::InteriorAir || component[start] >= 0) continue;
        const int z = zone_[start];
        if (++seen[static_cast<std::size_t>(z)] > 1) {
            throw Error(ErrorCode::DisconnectedZone, "zone " + std::to_string(z) + " is not 4-connected");
        }
        stack.assign(1, start);
        component[start] = z;
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            const int r = static_cast<int>(i) / params_.cols;
            const int c = static_cast<int>(i) % params_.cols;
            const int dr[4] = {-1, 1, 0, 0};
            const int dc[4] = {0, 0, -1, 1};
            for (int d = 0; d < 4; ++d) {
                const int nr = r + dr[d];
                const int nc = c + dc[d];
                if (nr < 0 || nc < 0 || nr >= params_.rows || nc >= params_.cols) continue;
                const std::size_t j = index(nr, nc);
                if (component[j] < 0 && kind_[j] == CellKind::InteriorAir && zone_[j] == z) {
                    component[j] = z;
                    stack.push_back(j);
                }
            }
        }
    }
}

ControlVolume ThermalGrid::cell(std::size_t i) const {
    return ControlVolume{kind_[i], zone_[i], temperature_[i], material_[i], mass_[i], diffuser_[i] != 0};
}

std::span<const std::size_t> ThermalGrid::zone_cells(int zone) const {
    if (zone < 0 || zone >= zone_count()) {
        throw Error(ErrorCode::UnknownZone, "zone index " + std::to_string(zone) + " not in grid");
    }
    return zone_cells_[static_cast<std::size_t>(zone)];
}

double ThermalGrid::zone_mean_temperature(int zone) const {
    const auto cells = zone_cells(zone);
    std::vector<double> values;
    values.reserve(cells.size());
    for (std::size_t i : cells) values.push_back(temperature_[i]);
    std::sort(values.begin(), values.end());
    const long double base = values.front();
    long double offset = 0.0L;
    for (double v : values) offset += static_cast<long double>(v) - base;
    return static_cast<double>(base + offset / static_cast<long double>(values.size()));
}

long double ThermalGrid::total_internal_energy() const {
    long double sum = 0.0L;
    for (std::size_t i : active_) sum += static_cast<long double>(capacity_[i]) * temperature_[i];
    return sum;
}

int ThermalGrid::substeps_for(double dt) const {
    // rate * dt_sub / 4 <= max_fourier
    const double limit = 4.0 * params_.max_fourier;
    const double demand = dt * max_rate_ / limit;
    if (!(demand > 1.0)) return 1;
    auto count = static_cast<long long>(std::ceil(demand));
    while ((dt / static_cast<double>(count)) * max_rate_ > limit) ++count;
    if (count > 100'000'000LL) {
        throw Error(ErrorCode::NonFiniteTemperature, "substep count exceeds limit; material parameters too diffusive");
    }
    return static_cast<int>(count);
}

StepDiagnostics ThermalGrid::step_energy_balance(double dt, std::span<const double> external_power, double ambient) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
    if (!std::isfinite(ambient)) throw Error(ErrorCode::InvalidArgument, "ambient temperature must be finite");
    const bool has_power = !external_power.empty();
    if (has_power) {
        if (external_power.size() != size()) {
            throw Error(ErrorCode::InvalidArgument, "external power vector size mismatch");
        }
        for (std::size_t i = 0; i < size(); ++i) {
            if (external_power[i] != 0.0 && diffuser_[i] == 0) {
                throw Error(ErrorCode::InvalidArgument,
                            "external power applied to non-diffuser cell " + std::to_string(i));
            }
        }
    }

    StepDiagnostics diag;
    const int substeps = substeps_for(dt);
    const double h = dt / substeps;
    diag.substeps_used = substeps;

    for (std::size_t i : boundary_) temperature_[i] = ambient;

    std::vector<double> decay(convective_.size());
    for (std::size_t k = 0; k < convective_.size(); ++k) {
        const std::size_t i = convective_[k];
        decay[k] = std::exp(-h * g_convection_[i] * inv_capacity_[i]);
    }

    const int rows = params_.rows;
    const int cols = params_.cols;
    double* t = temperature_.data();
    double* q = flux_scratch_.data();
    const double* gr = g_right_.data();
    const double* gd = g_down_.data();
    long double boundary_energy = 0.0L;

    for (int s = 0; s < substeps; ++s) {
        std::fill(flux_scratch_.begin(), flux_scratch_.end(), 0.0);
        // Face-by-face accumulation: each face contributes +f and -f.
        for (int r = 0; r < rows; ++r) {
            const std::size_t row = static_cast<std::size_t>(r) * cols;
            for (int c = 0; c < cols; ++c) {
                const std::size_t i = row + c;
                if (gr[i] != 0.0) {
                    const double f = gr[i] * (t[i + 1] - t[i]);
                    q[i] += f;
                    q[i + 1] -= f;
                }
                if (gd[i] != 0.0) {
                    const double f = gd[i] * (t[i + cols] - t[i]);
                    q[i] += f;
                    q[i + cols] -= f;
                }
            }
        }
        if (has_power) {
            for (std::size_t i : active_) t[i] += h * (q[i] + external_power[i]) * inv_capacity_[i];
        } else {
            for (std::size_t i : active_) t[i] += h * q[i] * inv_capacity_[i];
        }
        // Convective exchange with the pinned ambient, integrated exactly over the substep.
        for (std::size_t k = 0; k < convective_.size(); ++k) {
            const std::size_t i = convective_[k];
            const double before = t[i];
            t[i] = ambient + (before - ambient) * decay[k];
            boundary_energy += static_cast<long double>(capacity_[i]) * (t[i] - before);
        }
    }

    for (std::size_t i : active_) {
        if (!std::isfinite(t[i])) {
            throw Error(ErrorCode::NonFiniteTemperature, "non-finite temperature at cell " + std::to_string(i));
        }
    }

    if (has_power) {
        long double injected = 0.0L;
        for (std::size_t i = 0; i < size(); ++i) injected += static_cast<long double>(external_power[i]) * dt;
        diag.external_energy_injected = static_cast<double>(injected);
    }
    diag.boundary_energy_exchanged = static_cast<double>(boundary_energy);
    diag.total_internal_energy = static_cast<double>(total_internal_energy());
    return diag;
}

void ThermalGrid::shuffle_air(Rng& rng) {
    const double p = params_.shuffle_probability;
    std::vector<std::size_t> selected;
    std::vector<double> values;
    for (const auto& cells : zone_cells_) {
        selected.clear();
        for (std::size_t i : cells) {
            if (rng.uniform() < p) selected.push_back(i);
        }
        if (selected.size() < 2) continue;
        values.clear();
        for (std::size_t i : selected) values.push_back(temperature_[i]);
        for (std::size_t k = values.size() - 1; k > 0; --k) {
            std::swap(values[k], values[rng.below(k + 1)]);
        }
        for (std::size_t k = 0; k < selected.size(); ++k) temperature_[selected[k]] = values[k];
    }
}

}  // namespace sbsim
