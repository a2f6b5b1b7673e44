#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "sbsim/grid.hpp"
#include "support.hpp"

using namespace sbsim;
using testing::glyph_grid;

namespace {

std::vector<CellSpec> closed_cells(int n) {
    std::vector<CellSpec> cells;
    const Material brick{0.7, 1900.0, 840.0};
    const Material gypsum{0.17, 800.0, 1090.0};
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
    return cells;
}

std::map<int, std::vector<double>> zone_multisets(const ThermalGrid& g) {
    std::map<int, std::vector<double>> out;
    for (int z = 0; z < g.zone_count(); ++z) {
        for (std::size_t i : g.zone_cells(z)) out[z].push_back(g.temperatures()[i]);
        std::sort(out[z].begin(), out[z].end());
    }
    return out;
}

}  // namespace

TEST_CASE("conduction flux follows Fourier's law") {
    CHECK(conduction_flux(293.15, 293.15, 1.0, 3.0, 1.0) == 0.0);
    CHECK(conduction_flux(290.0, 300.0, 1.0, 3.0, 1.0) == doctest::Approx(30.0).epsilon(1e-15));
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const double a = 250 + 100 * rng.uniform();
        const double b = 250 + 100 * rng.uniform();
        const double k = 0.01 + rng.uniform();
        CHECK(conduction_flux(a, b, k, 3.0, 1.0) == -conduction_flux(b, a, k, 3.0, 1.0));
    }
}

TEST_CASE("convection flux") {
    CHECK(convection_flux(280.0, 280.0, 800.0, 1.0) == 0.0);
    CHECK(convection_flux(280.0, 281.0, 800.0, 1.0) == doctest::Approx(800.0));
    CHECK(convection_flux(280.0, 283.0, 20.0, 2.0) == doctest::Approx(2.0 * convection_flux(280.0, 283.0, 20.0, 1.0)));
}

TEST_CASE("interface conductivity is the harmonic mean") {
    CHECK(interface_conductivity(2.0, 2.0) == doctest::Approx(2.0));
    CHECK(interface_conductivity(1.0, 3.0) == doctest::Approx(1.5));
    CHECK(interface_conductivity(0.026, 800.0) < 2 * 0.026);
}

TEST_CASE("uniform grid at ambient is a fixed point") {
    auto g = glyph_grid({"OOOOO", "OXXXO", "OX0XO", "OXXXO", "OOOOO"}, 800.0, 1.0, 293.15);
    const auto before = std::vector<double>(g.temperatures().begin(), g.temperatures().end());
    const auto d = g.step_energy_balance(300.0, {}, 293.15);
    CHECK(d.external_energy_injected == 0.0);
    CHECK(d.boundary_energy_exchanged == 0.0);
    CHECK(std::equal(before.begin(), before.end(), g.temperatures().begin()));
}

TEST_CASE("closed grid conserves energy and a hot cell cools") {
    auto g = glyph_grid({"XXXXX", "X000X", "X000X", "X000X", "XXXXX"}, 5.0, 0.0, 293.15);
    const std::size_t hot = g.index(2, 2);
    g.set_temperature(hot, 313.15);
    long double oracle = 0.0L;
    for (std::size_t i = 0; i < g.size(); ++i) {
        oracle += static_cast<long double>(g.heat_capacity_of(i)) * g.temperatures()[i];
    }
    CHECK(g.total_internal_energy() == oracle);
    g.step_energy_balance(300.0, {}, 250.0);
    long double after = 0.0L;
    for (std::size_t i = 0; i < g.size(); ++i) {
        after += static_cast<long double>(g.heat_capacity_of(i)) * g.temperatures()[i];
    }
    CHECK(std::fabs(static_cast<double>((after - oracle) / oracle)) <= 1e-9);
    CHECK(g.temperatures()[hot] < 313.15);
}

TEST_CASE("random closed 50x50 grid conserves energy over 72 steps") {
    Rng rng(42);
    ThermalGrid::Params p;
    p.rows = p.cols = 50;
    p.convection_coefficient = 10.0;
    ThermalGrid g(p, closed_cells(50), 290.0);
    for (std::size_t i = 0; i < g.size(); ++i) g.set_temperature(i, 280.0 + 30.0 * rng.uniform());
    const long double e0 = g.total_internal_energy();
    long double prev = e0;
    for (int s = 0; s < 72; ++s) {
        g.step_energy_balance(300.0, {}, 260.0);
        const long double e = g.total_internal_energy();
        CHECK(std::fabs(static_cast<double>((e - prev) / prev)) <= 1e-9);
        prev = e;
    }
    CHECK(std::fabs(static_cast<double>((prev - e0) / e0)) <= 1e-7);
}

TEST_CASE("single air cell follows lumped exponential decay") {
    // 4 m x 4 m x 3 m cell with one face against ambient, other faces adiabatic.
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
    const double mc = 1.2 * 1006.0 * 4.0 * 4.0 * 3.0;
    const double ha = 5.0 * 4.0 * 3.0;
    double worst = 0.0;
    for (int s = 1; s <= 72; ++s) {
        g.step_energy_balance(300.0, {}, ta);
        const double exact = ta + (t0 - ta) * std::exp(-ha * 300.0 * s / mc);
        worst = std::max(worst, std::fabs(g.temperatures()[1] - exact));
    }
    CHECK(worst <= 0.01 * (t0 - ta));
}

TEST_CASE("boundary energy accounting closes the balance") {
    auto g = glyph_grid({"OOOOOO", "OXXXXO", "OX00XO", "OX*0XO", "OXXXXO", "OOOOOO"}, 25.0, 0.0, 295.0);
    std::vector<double> power(g.size(), 0.0);
    power[g.index(3, 2)] = 400.0;
    const long double e0 = g.total_internal_energy();
    const auto d = g.step_energy_balance(300.0, power, 270.0);
    const long double e1 = g.total_internal_energy();
    const double residual = static_cast<double>(e1 - e0) - d.boundary_energy_exchanged - d.external_energy_injected;
    CHECK(std::fabs(residual) <= 1e-9 * static_cast<double>(e0));
    CHECK(d.external_energy_injected == doctest::Approx(400.0 * 300.0));
    CHECK(d.boundary_energy_exchanged < 0.0);
}

TEST_CASE("maximum principle without external power") {
    Rng rng(9);
    auto g = glyph_grid({"OOOOOOO", "OXXXXXO", "OX000XO", "OX0x1XO", "OX011XO", "OXXXXXO", "OOOOOOO"}, 800.0, 0.5,
                        290.0, {0.01, 1.0, 100.0});
    for (std::size_t i = 0; i < g.size(); ++i) g.set_temperature(i, 285.0 + 10.0 * rng.uniform());
    for (int s = 0; s < 20; ++s) {
        double lo = 287.0;
        double hi = 287.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (g.kind(i) == CellKind::OutsideAir) continue;
            lo = std::min(lo, g.temperatures()[i]);
            hi = std::max(hi, g.temperatures()[i]);
        }
        g.step_energy_balance(300.0, {}, 287.0);
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK(g.temperatures()[i] >= lo);
            CHECK(g.temperatures()[i] <= hi);
        }
    }
}

TEST_CASE("warmer ambient never cools any cell") {
    const std::vector<std::string> plan{"OOOOO", "OXXXO", "OX0XO", "OX0XO", "OXXXO", "OOOOO"};
    auto cold = glyph_grid(plan, 50.0, 0.0, 293.0);
    auto warm = glyph_grid(plan, 50.0, 0.0, 293.0);
    for (int s = 0; s < 10; ++s) {
        cold.step_energy_balance(300.0, {}, 280.0);
        warm.step_energy_balance(300.0, {}, 281.0);
        for (std::size_t i = 0; i < cold.size(); ++i) CHECK(warm.temperatures()[i] >= cold.temperatures()[i]);
    }
}

TEST_CASE("substep count keeps every cell under the Fourier limit") {
    auto g = glyph_grid({"OOOO", "OXXO", "OxxO", "O00O", "OOOO"}, 800.0, 0.0, 293.0, {800.0, 0.5, 500.0});
    const double dt = 300.0;
    const int n = g.substeps_for(dt);
    // Independent per-cell oracle over conduction faces.
    double worst = 0.0;
    for (int r = 0; r < g.rows(); ++r) {
        for (int c = 0; c < g.cols(); ++c) {
            const auto a = g.cell(r, c);
            if (a.kind == CellKind::OutsideAir) continue;
            double sum = 0.0;
            const int dr[4] = {-1, 1, 0, 0};
            const int dc[4] = {0, 0, -1, 1};
            for (int d = 0; d < 4; ++d) {
                const int nr = r + dr[d];
                const int nc = c + dc[d];
                if (nr < 0 || nc < 0 || nr >= g.rows() || nc >= g.cols()) continue;
                const auto b = g.cell(nr, nc);
                if (b.kind == CellKind::OutsideAir) continue;
                sum += interface_conductivity(a.material.conductivity, b.material.conductivity) * g.face_area() /
                       g.dx();
            }
            worst = std::max(worst, sum / (a.mass * a.material.heat_capacity));
        }
    }
    CHECK((dt / n) * worst / 4.0 <= 0.25);
    CHECK((dt / (n - 1)) * worst / 4.0 > 0.25);
}

TEST_CASE("step input validation") {
    auto g = glyph_grid({"OOOOO", "OXXXO", "OX*XO", "OX0XO", "OXXXO", "OOOOO"}, 10.0, 0.0, 293.0);
    std::vector<double> power(g.size(), 0.0);
    power[g.index(3, 2)] = 10.0;  // not a diffuser
    CHECK_THROWS_AS(g.step_energy_balance(300.0, power, 280.0), Error);
    power.assign(g.size(), 0.0);
    power[g.index(2, 2)] = std::numeric_limits<double>::infinity();
    try {
        g.step_energy_balance(300.0, power, 280.0);
        FAIL("expected NonFiniteTemperature");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonFiniteTemperature);
    }
}

TEST_CASE("disconnected zone is rejected") {
    try {
        glyph_grid({"OOOOO", "O0x0O", "OOOOO"}, 10.0, 0.0, 293.0);
        FAIL("expected DisconnectedZone");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DisconnectedZone);
    }
}

TEST_CASE("zone mean temperature") {
    auto g = glyph_grid({"OOOOO", "OX00O", "OOOOO"}, 10.0, 0.0, 295.15);
    CHECK(g.zone_mean_temperature(0) == 295.15);
    g.set_temperature(g.index(1, 2), 294.0);
    g.set_temperature(g.index(1, 3), 296.0);
    CHECK(g.zone_mean_temperature(0) == 295.0);
    CHECK_THROWS_AS(g.zone_mean_temperature(3), Error);
}

TEST_CASE("shuffle") {
    const std::vector<std::string> plan{"OOOOOOOO", "OXXXXXXO", "OX000x1O", "OX000x1O", "OX000x1O", "OXXXXXXO",
                                        "OOOOOOOO"};
    auto randomize = [](ThermalGrid& g, std::uint64_t seed) {
        Rng r(seed);
        for (std::size_t i = 0; i < g.size(); ++i) g.set_temperature(i, 290.0 + 8.0 * r.uniform());
    };

    SUBCASE("p = 0 leaves the grid and consumes one uniform per air cell") {
        auto g = glyph_grid(plan, 10.0, 0.0, 290.0);
        randomize(g, 1);
        const std::vector<double> before(g.temperatures().begin(), g.temperatures().end());
        Rng rng(77);
        g.shuffle_air(rng);
        CHECK(std::equal(before.begin(), before.end(), g.temperatures().begin()));
        Rng reference(77);
        std::size_t air = 0;
        for (int z = 0; z < g.zone_count(); ++z) air += g.zone_cells(z).size();
        for (std::size_t k = 0; k < air; ++k) reference.uniform();
        CHECK(rng.next() == reference.next());
    }

    SUBCASE("any p preserves each zone's multiset and mean exactly") {
        for (double p : {0.0, 0.3, 0.75, 1.0}) {
            auto g = glyph_grid(plan, 10.0, p, 290.0);
            randomize(g, 2);
            const auto sets = zone_multisets(g);
            std::vector<double> means;
            for (int z = 0; z < g.zone_count(); ++z) means.push_back(g.zone_mean_temperature(z));
            std::vector<double> walls;
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (g.kind(i) != CellKind::InteriorAir) walls.push_back(g.temperatures()[i]);
            }
            Rng rng(5);
            for (int round = 0; round < 10; ++round) g.shuffle_air(rng);
            CHECK(zone_multisets(g) == sets);
            for (int z = 0; z < g.zone_count(); ++z) CHECK(g.zone_mean_temperature(z) == means[z]);
            std::vector<double> walls_after;
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (g.kind(i) != CellKind::InteriorAir) walls_after.push_back(g.temperatures()[i]);
            }
            CHECK(walls_after == walls);
        }
    }

    SUBCASE("p = 1 actually moves temperatures") {
        auto g = glyph_grid(plan, 10.0, 1.0, 290.0);
        randomize(g, 3);
        const std::vector<double> before(g.temperatures().begin(), g.temperatures().end());
        Rng rng(11);
        g.shuffle_air(rng);
        CHECK_FALSE(std::equal(before.begin(), before.end(), g.temperatures().begin()));
    }

    SUBCASE("same seed, same permutation") {
        auto a = glyph_grid(plan, 10.0, 0.6, 290.0);
        auto b = glyph_grid(plan, 10.0, 0.6, 290.0);
        randomize(a, 4);
        randomize(b, 4);
        Rng ra(123);
        Rng rb(123);
        a.shuffle_air(ra);
        b.shuffle_air(rb);
        CHECK(std::equal(a.temperatures().begin(), a.temperatures().end(), b.temperatures().begin()));
    }
}
