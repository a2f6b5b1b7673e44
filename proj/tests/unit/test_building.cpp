#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "sbsim/building.hpp"
#include "sbsim/engine.hpp"
#include "sbsim/error.hpp"
#include "sbsim/rng.hpp"
#include "support.hpp"

using namespace sbsim;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::ConfigError;
}

const char* kMinimal =
    "floor f0 dx_m 1 height_m 3\n"
    "OOOOO\n"
    "OXXXO\n"
    "OXAXO\n"
    "OXXXO\n"
    "OOOOO\n";

/// Random floorplan: vertical zone stripes separated by interior walls.
FloorplanDoc random_floorplan(Rng& rng) {
    FloorplanDoc doc;
    doc.floor_id = "f" + std::to_string(rng.below(100));
    doc.dx = 0.5 + static_cast<double>(rng.below(4)) * 0.25;
    doc.floor_height = 2.5 + 0.1 * static_cast<double>(rng.below(10));
    const int height = 3 + static_cast<int>(rng.below(6));
    const std::string glyphs = "ABCDEFGHIJKLMNPQRSTUVWYZabcdefghij0123456789";
    std::string interior;
    const int stripes = 1 + static_cast<int>(rng.below(5));
    for (int s = 0; s < stripes; ++s) {
        if (s) interior += 'x';
        const char g = glyphs[static_cast<std::size_t>(s * 7 + static_cast<int>(rng.below(7))) % glyphs.size()];
        interior += std::string(1 + rng.below(4), g);
        if (rng.below(2)) doc.aliases[g] = std::string("zone_") + g;
    }
    const int width = static_cast<int>(interior.size()) + 4;
    doc.rows.push_back(std::string(static_cast<std::size_t>(width), 'O'));
    doc.rows.push_back("O" + std::string(static_cast<std::size_t>(width - 2), 'X') + "O");
    for (int r = 0; r < height; ++r) doc.rows.push_back("OX" + interior + "XO");
    doc.rows.push_back(doc.rows[1]);
    doc.rows.push_back(doc.rows[0]);
    return doc;
}

}  // namespace

TEST_CASE("minimal floorplan parses field by field") {
    const auto doc = parse_floorplan(kMinimal, "mini.txt");
    CHECK(doc.floor_id == "f0");
    CHECK(doc.dx == 1.0);
    CHECK(doc.floor_height == 3.0);
    CHECK(doc.row_count() == 5);
    CHECK(doc.col_count() == 5);
    CHECK(doc.glyph(2, 2) == 'A');
    CHECK(doc.glyph(1, 1) == 'X');
    CHECK(doc.glyph(0, 0) == 'O');
    REQUIRE(doc.zone_glyphs().size() == 1);
    CHECK(doc.zone_name('A') == "A");
}

TEST_CASE("floorplan errors carry code and line") {
    try {
        parse_floorplan("floor f dx_m 1 height_m 3\nOOOOO\nOXAX\n", "r.txt");
        FAIL("expected RaggedGrid");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RaggedGrid);
        CHECK(e.file() == "r.txt");
        CHECK(e.line() == 3);
    }
    CHECK(code_of([] { parse_floorplan("floor f dx_m 1 height_m 3\nOO?OO\n"); }) == ErrorCode::UnknownGlyph);
    CHECK(code_of([] { parse_floorplan("floor f dx_m 1 height_m 3\nOXAxAXO\n"); }) == ErrorCode::DisconnectedZone);
    CHECK(code_of([] { parse_floorplan("floor f dx_m 1 height_m 3\nOXXXO\n"); }) == ErrorCode::NoInterior);
    CHECK(code_of([] { parse_floorplan("OXAXO\n"); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { parse_floorplan("floor f dx_m -1 height_m 3\nOXAXO\n"); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { parse_floorplan("floor f dx_m 1 height_m 3\nzone-alias Q nowhere\nOXAXO\n"); }) ==
          ErrorCode::ConfigError);
}

TEST_CASE("floorplan serialize/parse round trip") {
    Rng rng(2024);
    for (int k = 0; k < 200; ++k) {
        const auto doc = random_floorplan(rng);
        const auto again = parse_floorplan(serialize_floorplan(doc));
        CHECK(again == doc);
        CHECK(serialize_floorplan(again) == serialize_floorplan(doc));
    }
}

TEST_CASE("device list parsing") {
    const auto floors = std::vector<FloorplanDoc>{parse_floorplan(kMinimal)};
    const auto devs = parse_devices(
        "device ahu type ahu\ndevice hws type boiler\ndevice chw type chiller\n"
        "device vav-1 type vav zone A diffuser 2,2\n",
        floors);
    REQUIRE(devs.size() == 4);
    const auto& v = devs[3];
    CHECK(v.device_id == "vav-1");
    CHECK(v.type == DeviceType::Vav);
    CHECK(v.zone == "A");
    CHECK(v.diffusers == std::vector<std::pair<int, int>>{{2, 2}});
    CHECK(v.constants == device_defaults(DeviceType::Vav));
    CHECK(parse_devices(serialize_devices(devs)) == devs);

    const std::string plant = "device ahu type ahu\ndevice hws type boiler\ndevice chw type chiller\n";
    CHECK(code_of([&] { parse_devices(plant + "device v type vav zone A diffuser 1,2\n", floors); }) ==
          ErrorCode::DiffuserOutsideZone);
    CHECK(code_of([&] { parse_devices(plant + "device hws2 type boiler\n"); }) == ErrorCode::MissingSingleton);
    CHECK(code_of([&] { parse_devices("device ahu type ahu\ndevice chw type chiller\n"); }) ==
          ErrorCode::MissingSingleton);
    CHECK(code_of([&] { parse_devices(plant + "device ahu type vav zone A diffuser 2,2\n"); }) ==
          ErrorCode::DuplicateDeviceId);
    CHECK(code_of([&] { parse_devices(plant + "device pump type heat-pump\n"); }) == ErrorCode::UnknownDeviceType);
    CHECK(code_of([&] { parse_devices(plant + "device v type vav zone A diffuser 2,2 bogus=1\n"); }) ==
          ErrorCode::ConfigError);
    CHECK(code_of([&] { parse_devices(plant, floors); }) == ErrorCode::ConfigError);  // zone A unserved
}

TEST_CASE("device constants override defaults") {
    const auto devs = parse_devices(
        "device a type ahu recirc_fraction=0.5\ndevice b type boiler efficiency=0.8\ndevice c type chiller\n"
        "device v type vav zone A diffuser 2,2 design_flow=0.2\n");
    CHECK(devs[0].constants.at("recirc_fraction") == 0.5);
    CHECK(devs[1].constants.at("efficiency") == 0.8);
    CHECK(devs[3].constants.at("design_flow") == 0.2);
    CHECK(devs[3].constants.at("min_damper") == device_defaults(DeviceType::Vav).at("min_damper"));
}

TEST_CASE("theta bounds and defaults") {
    const auto& b = theta_bounds();
    CHECK(std::string(b[0].name) == "exterior_convection_coefficient");
    CHECK(b[0].min == 5.0);
    CHECK(b[0].max == 800.0);
    CHECK(b[7].max == 1.0);
    const Theta d = Theta::defaults();
    for (std::size_t i = 0; i < kThetaSize; ++i) CHECK(d.values[i] == b[i].best);
    const Theta m = Theta::midpoint();
    for (std::size_t i = 0; i < kThetaSize; ++i) CHECK(m.values[i] == doctest::Approx(0.5 * (b[i].min + b[i].max)));
    CHECK_NOTHROW(m.check_bounds());
    Theta bad = m;
    bad[ThetaParam::InteriorWallDensity] = 2000.0;
    CHECK(code_of([&] { bad.check_bounds(); }) == ErrorCode::BoundsViolation);
    bad = m;
    bad[ThetaParam::ShuffleProbability] = std::nan("");
    CHECK(code_of([&] { bad.check_bounds(); }) == ErrorCode::BoundsViolation);
    CHECK(theta_param_from_name("shuffle_probability") == ThetaParam::ShuffleProbability);
    CHECK_FALSE(theta_param_from_name("nope").has_value());
}

TEST_CASE("two-floor manifest") {
    const auto cfg = load_manifest(testing::fixture("twofloor/manifest.txt"));
    CHECK(cfg.floors.size() == 2);
    CHECK(cfg.zone_ids() == std::vector<std::string>{"lobby", "office_g", "office_1"});
    const auto refs = cfg.zone_refs();
    CHECK(refs[2].floor == 1);
    CHECK(refs[2].local == 0);
    CHECK(cfg.comfort_for("lobby").deadband == 1.0);
    CHECK(cfg.comfort_for("office_1").heating_setpoint == 293.15);
    CHECK(cfg.plant_config().boiler.efficiency == 0.85);
    CHECK(cfg.plant_config().chiller.cop == 4.0);
    CHECK(cfg.plant_config().air_handler.recirc_fraction == 0.4);
    CHECK(cfg.initial_zone_temperature.at("office_1") == 296.0);
    CHECK(cfg.start_time == parse_iso8601("2023-02-01T08:00:00Z"));

    const auto grids = cfg.build_grids(294.0);
    REQUIRE(grids.size() == 2);
    CHECK(grids[0].zone_count() == 2);
    CHECK(grids[1].zone_count() == 1);
    CHECK(grids[0].floor_height() == 3.5);
    CHECK(grids[0].has_diffuser(grids[0].index(3, 3)));

    const auto vavs = cfg.vav_configs();
    REQUIRE(vavs.size() == 3);
    CHECK(vavs[1].diffusers.size() == 2);
    CHECK(vavs[2].diffusers[0].floor == 1);
}

TEST_CASE("theta midpoint builds a working simulator") {
    auto cfg = load_manifest(testing::fixture("twofloor/manifest.txt"));
    cfg.theta = Theta::midpoint();
    Simulator sim(cfg);
    for (int k = 0; k < 3; ++k) sim.step(HvacAction{}, {sim.time(), cfg.ambient_temperature});
    for (double t : sim.zone_temperatures()) CHECK(std::isfinite(t));
}

TEST_CASE("manifest errors") {
    CHECK(code_of([] { load_manifest(testing::fixture("bad/manifest_bounds.txt")); }) == ErrorCode::BoundsViolation);
    CHECK(code_of([] { load_manifest(testing::fixture("bad/manifest_ragged.txt")); }) == ErrorCode::RaggedGrid);
    CHECK(code_of([] { load_manifest(testing::fixture("bad/does_not_exist.txt")); }) == ErrorCode::ConfigError);
    const auto base = testing::fixture("bad");
    try {
        parse_manifest("floorplan good.txt\ndevices devices.txt\nfrobnicate 1\n", base, "m.txt");
        FAIL("expected ConfigError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConfigError);
        CHECK(e.line() == 3);
    }
    CHECK(code_of([&] { parse_manifest("floorplan good.txt\n", base); }) == ErrorCode::ConfigError);
    CHECK(code_of([&] { parse_manifest("floorplan good.txt\ndevices devices.txt\ncomfort * 300 290 1\n", base); }) ==
          ErrorCode::ConfigError);
}

TEST_CASE("theta patch feeds back into a manifest") {
    Theta t = Theta::midpoint();
    t[ThetaParam::ShuffleProbability] = 0.123456789012345;
    const std::string text = "floorplan good.txt\ndevices devices.txt\n" + theta_patch(t);
    const auto cfg = parse_manifest(text, testing::fixture("bad"));
    CHECK(cfg.theta == t);
}
