#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "wpt/errors.hpp"
#include "wpt/scenario.hpp"

using namespace wpt;

TEST_CASE("quantity parsing handles the unit suffix table") {
    CHECK(parse_quantity("47uH") == doctest::Approx(47e-6).epsilon(1e-12));
    CHECK(parse_quantity("33.42nF") == doctest::Approx(33.42e-9).epsilon(1e-12));
    CHECK(parse_quantity("127kHz") == doctest::Approx(127e3).epsilon(1e-12));
    CHECK(parse_quantity("5V") == 5.0);
    CHECK(parse_quantity("5 mA") == doctest::Approx(5e-3).epsilon(1e-12));
    CHECK(parse_quantity("6.25W") == 6.25);
    CHECK(parse_quantity("20mm") == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(parse_quantity("2.5cm") == doctest::Approx(0.025).epsilon(1e-12));
    CHECK(parse_quantity("30ns") == doctest::Approx(30e-9).epsilon(1e-12));
    CHECK(parse_quantity("0.1ohm") == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(parse_quantity("60degC") == 60.0);
    CHECK(parse_quantity("1e-3") == 1e-3);      // plain dimensionless
    CHECK(parse_quantity("-24uH") == doctest::Approx(-24e-6).epsilon(1e-12));
    CHECK_THROWS_AS(parse_quantity("12furlong"), std::invalid_argument);
    CHECK_THROWS_AS(parse_quantity("fast"), std::invalid_argument);
    CHECK_THROWS_AS(parse_quantity(""), std::invalid_argument);
}

TEST_CASE("bundled default scenario carries the reference constants") {
    const Scenario sc = load_scenario_file(SCENARIO_DIR "/default.scn");
    CHECK(sc.circuit.v_supply == 5.0);
    CHECK(sc.circuit.tx.inductance == doctest::Approx(24e-6));
    CHECK(sc.circuit.rx.inductance == doctest::Approx(47e-6));
    // series capacitors follow the resonance relation at 127 kHz
    CHECK(sc.circuit.c1 == doctest::Approx(65.4367e-9).epsilon(1e-4));
    CHECK(sc.circuit.c2 == doctest::Approx(33.4145e-9).epsilon(1e-4));
    CHECK(sc.controller.f_lo == doctest::Approx(119e3));
    CHECK(sc.controller.f_hi == doctest::Approx(135e3));
    CHECK(sc.controller.f_search == doctest::Approx(127e3));
    CHECK(sc.requirement.i_min == doctest::Approx(5e-3));
    CHECK(sc.requirement.v_min == doctest::Approx(7.0));
    REQUIRE(sc.distances.size() == 8);
    CHECK(sc.distances.front() == doctest::Approx(5e-3));
    CHECK(sc.distances.back() == doctest::Approx(20e-3));

    // the filament model is anchored to k = 0.20 at 6 mm
    const double m = coil_mutual(sc.circuit.tx, sc.circuit.rx, 6e-3, sc.coupling);
    CHECK(m / std::sqrt(24e-6 * 47e-6) == doctest::Approx(0.20).epsilon(1e-9));
}

TEST_CASE("empty document lists the required sections") {
    try {
        load_scenario("");
        FAIL("expected config_error");
    } catch (const config_error& e) {
        const std::string msg = e.what();
        for (const char* s : {"circuit", "controller", "coupling", "sweep", "sim", "requirement"}) {
            CHECK(msg.find(s) != std::string::npos);
        }
    }
}

TEST_CASE("negative inductance is a validation error naming the field") {
    const std::string text = R"(
[circuit]
v_supply = 5V
[circuit.tx]
inductance = -24uH
[controller]
[coupling]
[sweep]
distances = 6mm
[sim]
[requirement]
)";
    try {
        load_scenario(text);
        FAIL("expected validation_error");
    } catch (const validation_error& e) {
        bool named = false;
        for (const auto& f : e.fields()) named = named || f.find("inductance") != std::string::npos;
        CHECK(named);
    }
}

TEST_CASE("unknown keys and sections are rejected with line numbers") {
    const std::string bad_key = "[circuit]\nv_suply = 5V\n";
    try {
        load_scenario(bad_key);
        FAIL("expected config_error");
    } catch (const config_error& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(load_scenario("[warp_drive]\n"), config_error);
    CHECK_THROWS_AS(load_scenario("orphan = 1\n"), config_error);
}

TEST_CASE("tabulated coupling and load table parse") {
    const std::string text = R"(
[circuit]
[controller]
[coupling]
mode = tabulated
table = 5mm:0.22, 10mm:0.13, 20mm:0.07
[sweep]
distances = 5mm, 10mm, 20mm
load_table = 5mm:133ohm, 20mm:450ohm
[sim]
[requirement]
)";
    const Scenario sc = load_scenario(text);
    CHECK(sc.coupling.mode == CouplingMode::tabulated);
    REQUIRE(sc.coupling.table.size() == 3);
    CHECK(sc.coupling.table[1].first == doctest::Approx(0.010));
    CHECK(sc.coupling.table[1].second == doctest::Approx(0.13));
    REQUIRE(sc.load_table.size() == 2);
    CHECK(sc.load_table[1].second == doctest::Approx(450.0));
}

TEST_CASE("distances must be increasing and positive") {
    const std::string base = R"(
[circuit]
[controller]
[coupling]
[sim]
[requirement]
[sweep]
)";
    CHECK_THROWS_AS(load_scenario(base + "distances = 10mm, 5mm\n"), validation_error);
    CHECK_THROWS_AS(load_scenario(base + "distances = -1mm, 5mm\n"), validation_error);
}
