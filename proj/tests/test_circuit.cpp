#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "wpt/analysis.hpp"
#include "wpt/circuit.hpp"
#include "wpt/errors.hpp"
#include "wpt/magnetics.hpp"

using namespace wpt;

namespace {

LinkCircuit reference_link(double k = 0.18) {
    LinkCircuit cfg;
    cfg.tx = CoilSpec::uniform(24e-6, 1.0, 25e-3);
    cfg.rx = CoilSpec::uniform(47e-6, 0.3, 13.15e-3);
    cfg.c1 = resonance_capacitance(24e-6, 127e3);
    cfg.c2 = resonance_capacitance(47e-6, 127e3);
    cfg.lcl = {10e-6, 2.2e-6, 10e-6};
    cfg.load = LoadModel::resistor_load(133.0);
    cfg.m = k * std::sqrt(24e-6 * 47e-6);
    return cfg;
}

ControllerConfig reference_ctrl() {
    ControllerConfig ctrl;
    ctrl.f_search = 127e3;
    ctrl.search_duty = 0.1;
    ctrl.detect_threshold = 0.3;
    ctrl.p_max = 50.0;
    return ctrl;
}

struct EnergyBudget {
    double source, load, dissipated, stored_delta;
    double imbalance_fraction() const {
        return std::abs(source - load - dissipated - stored_delta) / std::abs(source);
    }
};

EnergyBudget budget_over_cycles(const LinkCircuit& cfg, const SimTrace& tr, int cycles,
                                double period) {
    const double t_end = tr.samples.back().state.t;
    auto at = [&](double t) {
        auto i = static_cast<size_t>(std::llround(t / tr.dt_out));
        i = std::min(i, tr.samples.size() - 1);
        return std::pair(tr.energy[i], tr.samples[i].state);
    };
    const auto [e0, s0] = at(t_end - cycles * period);
    const auto [e1, s1] = at(t_end);
    return {e1.e_source - e0.e_source, e1.e_load - e0.e_load,
            e1.e_dissipated - e0.e_dissipated,
            stored_energy(cfg, s1) - stored_energy(cfg, s0)};
}

} // namespace

TEST_CASE("validate_circuit accepts the reference design") {
    LinkCircuit cfg = reference_link();
    CHECK_NOTHROW(validate_circuit(cfg));
}

TEST_CASE("validate_circuit rejects boundary and broken configs") {
    SUBCASE("k = 1 boundary") {
        LinkCircuit cfg = reference_link();
        cfg.m = std::sqrt(cfg.tx.inductance * cfg.rx.inductance);
        CHECK_THROWS_AS(validate_circuit(cfg), validation_error);
    }
    SUBCASE("zero series capacitance") {
        LinkCircuit cfg = reference_link();
        cfg.c1 = 0.0;
        try {
            validate_circuit(cfg);
            FAIL("expected validation_error");
        } catch (const validation_error& e) {
            bool named = false;
            for (const auto& f : e.fields()) named = named || f.find("c1") != std::string::npos;
            CHECK(named);
        }
    }
    SUBCASE("negative supply") {
        LinkCircuit cfg = reference_link();
        cfg.v_supply = -5.0;
        CHECK_THROWS_AS(validate_circuit(cfg), validation_error);
    }
    SUBCASE("bypass requires a resistor load") {
        LinkCircuit cfg = reference_link();
        cfg.rectifier_bypassed = true;
        cfg.load = LoadModel::constant_current_load(0.05);
        CHECK_THROWS_AS(validate_circuit(cfg), validation_error);
    }
}

TEST_CASE("decoupled receiver stays at rest") {
    LinkCircuit cfg = reference_link();
    cfg.m = 0.0;
    SimState s;
    const double dt = 30e-9;
    for (int n = 0; n < 20000; ++n) {
        const int drive = (n / 131) % 2 == 0 ? 1 : -1; // ~127 kHz square
        s = step(cfg, s, drive, dt);
        REQUIRE(s.i2 == 0.0);
        REQUIRE(s.v_c2 == 0.0);
        REQUIRE(s.i_lout == 0.0);
        REQUIRE(s.v_cmid == 0.0);
    }
    CHECK(std::abs(s.i1) > 0.0); // the Tx side did run
}

TEST_CASE("zero drive and zero state stay identically zero") {
    LinkCircuit cfg = reference_link();
    SimState s;
    for (int n = 0; n < 5000; ++n) {
        s = step(cfg, s, 0, 30e-9);
        REQUIRE(s.i1 == 0.0);
        REQUIRE(s.i2 == 0.0);
        REQUIRE(s.v_c1 == 0.0);
        REQUIRE(s.v_load == 0.0);
    }
}

TEST_CASE("magnetic energy is positive definite for k < 1") {
    LinkCircuit cfg = reference_link(0.95);
    SimState s;
    s.i1 = 3.0;
    s.i2 = -2.9; // adversarial opposing currents
    CHECK(stored_energy(cfg, s) >= 0.0);
    s.i1 = -1.0;
    s.i2 = 1.0;
    CHECK(stored_energy(cfg, s) >= 0.0);
}

TEST_CASE("closed-loop run locks and reaches periodic steady state") {
    const LinkCircuit cfg = reference_link();
    const SimTrace tr = run_transient(cfg, reference_ctrl(), 4e-3, 30e-9, 150e-9);
    CHECK(tr.controller.final_mode == ControllerMode::lock);
    REQUIRE(tr.controller.lock_frequency.has_value());
    CHECK(*tr.controller.lock_frequency == doctest::Approx(127e3).epsilon(0.02));

    const double period = estimate_cycle_period(tr, 1.0 / 127e3);
    const int settled = detect_steady_state(tr, period, 1e-3);
    CHECK(settled * period < 2e-3); // settles well before 2 ms

    // trace sample spacing is uniform
    for (size_t i = 1; i < 50; ++i) {
        CHECK(tr.samples[i].state.t - tr.samples[i - 1].state.t ==
              doctest::Approx(tr.dt_out).epsilon(1e-9));
    }
}

TEST_CASE("energy balance over whole steady-state cycles") {
    const LinkCircuit cfg = reference_link();
    const SimTrace tr = run_transient(cfg, reference_ctrl(), 4e-3, 30e-9, 150e-9);
    const double period = estimate_cycle_period(tr, 1.0 / 127e3);
    for (int cycles : {1, 5, 20, 100}) {
        const EnergyBudget b = budget_over_cycles(cfg, tr, cycles, period);
        INFO("cycles = ", cycles);
        CHECK(b.imbalance_fraction() < 0.005);
    }
}

TEST_CASE("halving dt changes cycle-averaged load power by less than 0.1%") {
    const LinkCircuit cfg = reference_link();
    const ControllerConfig ctrl = reference_ctrl();
    auto p_load_at = [&](double dt) {
        const SimTrace tr = run_transient(cfg, ctrl, 4e-3, dt, 150e-9);
        const double period = estimate_cycle_period(tr, 1.0 / 127e3);
        const double t_end = tr.samples.back().state.t;
        CycleWindow w{t_end - 20 * period, t_end, period};
        return cycle_metrics(tr, w).p_load;
    };
    const double coarse = p_load_at(30e-9);
    const double fine = p_load_at(15e-9);
    CHECK(std::abs(fine - coarse) / coarse < 1e-3);
}

TEST_CASE("identical inputs give bit-identical traces") {
    const LinkCircuit cfg = reference_link();
    const ControllerConfig ctrl = reference_ctrl();
    const SimTrace a = run_transient(cfg, ctrl, 1e-3, 30e-9, 150e-9);
    const SimTrace b = run_transient(cfg, ctrl, 1e-3, 30e-9, 150e-9);
    REQUIRE(a.samples.size() == b.samples.size());
    for (size_t i = 0; i < a.samples.size(); ++i) {
        REQUIRE(a.samples[i].state.i1 == b.samples[i].state.i1);
        REQUIRE(a.samples[i].state.v_cmid == b.samples[i].state.v_cmid);
        REQUIRE(a.samples[i].drive == b.samples[i].drive);
    }
}

TEST_CASE("fault ends the run early and is recorded") {
    const LinkCircuit cfg = reference_link();
    ControllerConfig ctrl = reference_ctrl();
    ctrl.p_max = 0.5; // will trip once the link powers up
    const SimTrace tr = run_transient(cfg, ctrl, 4e-3, 30e-9, 150e-9);
    CHECK(tr.controller.final_mode == ControllerMode::fault);
    REQUIRE(tr.controller.fault.has_value());
    CHECK(*tr.controller.fault == FaultCode::overpower);
    CHECK(tr.samples.back().state.t < 4e-3);
}

TEST_CASE("square drive into a high-Q tank is fundamental-dominated") {
    // open-loop square wave at the tank resonance (search mode, full duty,
    // detection disabled by a huge threshold)
    LinkCircuit cfg = reference_link();
    cfg.m = 0.0;
    const double q = 10.0;
    const double w0 = 2.0 * std::numbers::pi * 127e3;
    cfg.tx.esr = w0 * cfg.tx.inductance / q - cfg.bridge_ron;

    ControllerConfig ctrl = reference_ctrl();
    ctrl.search_duty = 1.0;
    ctrl.detect_threshold = 1e9;
    ctrl.p_max = 1e9;

    const double period = 1.0 / ctrl.f_search;
    const double dt = period / 256.0;
    const SimTrace tr = run_transient(cfg, ctrl, 2e-3, dt, 4.0 * dt);
    const auto n_per = static_cast<size_t>(std::llround(period / tr.dt_out));
    const size_t count = 32 * n_per;
    std::vector<double> i1(count);
    std::vector<double> vsw(count);
    const size_t start = tr.samples.size() - count;
    for (size_t j = 0; j < count; ++j) {
        i1[j] = tr.samples[start + j].state.i1;
        vsw[j] = tr.samples[start + j].v_switch;
    }
    const auto ratios = harmonic_ratios(i1, tr.dt_out, ctrl.f_search, 3);
    // analytic: (1/3)/sqrt(1 + Q^2 (3 - 1/3)^2) = 1.2491% at Q = 10
    CHECK(ratios[2] == doctest::Approx(0.012491).epsilon(0.12));

    // the drive itself keeps its square-wave harmonic content
    const auto drive_ratios = harmonic_ratios(vsw, tr.dt_out, ctrl.f_search, 3);
    CHECK(drive_ratios[2] > 0.25);
}

TEST_CASE("linearized time-domain run matches the phasor oracle") {
    for (double k : {0.05, 0.2}) {
        LinkCircuit cfg = reference_link(k);
        cfg.rectifier_bypassed = true;
        cfg.load = LoadModel::resistor_load(20.0);
        cfg.tx.esr = 1.0;

        ControllerConfig ctrl = reference_ctrl();
        ctrl.search_duty = 1.0;
        ctrl.detect_threshold = 1e9;
        ctrl.p_max = 1e9;

        const double period = 1.0 / ctrl.f_search;
        const double dt = period / 256.0;
        const SimTrace tr = run_transient(cfg, ctrl, 2e-3, dt, 4.0 * dt);
        const double t_end = tr.samples.back().state.t;
        CycleWindow w{t_end - 40 * period, t_end, period};
        const PowerReport rep = cycle_metrics(tr, w);

        const PhasorLink link = linearize(cfg, cfg.load.resistance);
        const auto sol = phasor_solve(link, ctrl.f_search);
        const double i1_rms = std::abs(sol.i1) / std::numbers::sqrt2;
        INFO("k = ", k);
        CHECK(rep.i_tx_rms == doctest::Approx(i1_rms).epsilon(0.02));
    }
}

TEST_CASE("trace CSV carries the canonical columns") {
    const LinkCircuit cfg = reference_link();
    const SimTrace tr = run_transient(cfg, reference_ctrl(), 0.2e-3, 30e-9, 150e-9);
    const std::string csv = trace_to_csv(tr);
    CHECK(csv.rfind("t_s,i1_a,i2_a,v_c1_v,v_c2_v,v_load_v,i_load_a,drive,v_switch_v,i_supply_a\n",
                    0) == 0);
    // one line per sample plus header
    size_t lines = 0;
    for (char c : csv) lines += c == '\n' ? 1 : 0;
    CHECK(lines == tr.samples.size() + 1);
}

TEST_CASE("step rejects bad dt and run_transient rejects coarse grids") {
    const LinkCircuit cfg = reference_link();
    SimState s;
    CHECK_THROWS_AS(step(cfg, s, 1, 0.0), std::domain_error);
    CHECK_THROWS_AS(run_transient(cfg, reference_ctrl(), 1e-3, 50e-9, 100e-9),
                    std::domain_error); // fewer than 200 steps per cycle
    CHECK_THROWS_AS(run_transient(cfg, reference_ctrl(), 1e-3, 30e-9, 70e-9),
                    std::domain_error); // dt does not divide dt_out
}
