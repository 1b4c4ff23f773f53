#include "wpt/circuit.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "wpt/errors.hpp"

namespace wpt {

LoadModel LoadModel::resistor_load(double r) {
    LoadModel l;
    l.kind = LoadKind::resistor;
    l.resistance = r;
    return l;
}

LoadModel LoadModel::motor(double ke, double ra, double j, double b) {
    LoadModel l;
    l.kind = LoadKind::dc_motor;
    l.back_emf_const = ke;
    l.armature_r = ra;
    l.inertia = j;
    l.friction = b;
    return l;
}

LoadModel LoadModel::constant_current_load(double i) {
    LoadModel l;
    l.kind = LoadKind::constant_current;
    l.current = i;
    return l;
}

LinkCircuit validate_circuit(const LinkCircuit& cfg) {
    std::vector<std::string> bad;
    auto positive = [&bad](double v, const char* name) {
        if (!(v > 0.0)) bad.push_back(std::string(name) + ": must be > 0");
    };
    positive(cfg.v_supply, "v_supply");
    if (!(cfg.bridge_ron >= 0.0)) bad.push_back("bridge_ron: must be >= 0");
    positive(cfg.c1, "c1");
    positive(cfg.c2, "c2");
    try {
        cfg.tx.validate("tx");
    } catch (const validation_error& e) {
        bad.insert(bad.end(), e.fields().begin(), e.fields().end());
    }
    try {
        cfg.rx.validate("rx");
    } catch (const validation_error& e) {
        bad.insert(bad.end(), e.fields().begin(), e.fields().end());
    }
    if (!(cfg.m >= 0.0)) bad.push_back("m: must be >= 0");
    if (cfg.tx.inductance > 0.0 && cfg.rx.inductance > 0.0 &&
        !(cfg.m * cfg.m < cfg.tx.inductance * cfg.rx.inductance)) {
        bad.push_back("m: m^2 must be < tx.inductance*rx.inductance (k < 1)");
    }
    if (!(cfg.diode_vf >= 0.0)) bad.push_back("diode_vf: must be >= 0");
    if (!(cfg.diode_ron >= 0.0)) bad.push_back("diode_ron: must be >= 0");
    positive(cfg.lcl.l_in, "lcl.l_in");
    positive(cfg.lcl.c_mid, "lcl.c_mid");
    positive(cfg.lcl.l_out, "lcl.l_out");
    switch (cfg.load.kind) {
        case LoadKind::resistor:
            positive(cfg.load.resistance, "load.resistance");
            break;
        case LoadKind::dc_motor:
            positive(cfg.load.back_emf_const, "load.back_emf_const");
            positive(cfg.load.armature_r, "load.armature_r");
            positive(cfg.load.inertia, "load.inertia");
            positive(cfg.load.friction, "load.friction");
            break;
        case LoadKind::constant_current:
            positive(cfg.load.current, "load.current");
            break;
    }
    if (cfg.rectifier_bypassed && cfg.load.kind != LoadKind::resistor) {
        bad.push_back("rectifier_bypassed: requires a resistor load");
    }
    if (!bad.empty()) throw validation_error(std::move(bad));
    return cfg;
}

namespace {

// ODE state layout used by the integrator; i_lin and v_load are derived.
struct StateVec {
    double i1, v_c1, i2, v_c2, v_cmid, i_lout, w_motor;
};

StateVec pack(const SimState& s) {
    return {s.i1, s.v_c1, s.i2, s.v_c2, s.v_cmid, s.i_lout, s.motor_speed};
}

double load_voltage(const LinkCircuit& cfg, const StateVec& y) {
    switch (cfg.load.kind) {
        case LoadKind::resistor: return cfg.load.resistance * y.i_lout;
        case LoadKind::dc_motor:
            return cfg.load.back_emf_const * y.w_motor + cfg.load.armature_r * y.i_lout;
        case LoadKind::constant_current: return y.v_cmid;
    }
    return 0.0;
}

// Derivatives with the bridge conduction state s_cond frozen by the caller.
// During conduction the input choke carries |i2| and joins the Rx mesh, so
// the coupled branch solves [L1 M; M L2+l_in] d(i1,i2)/dt = (e1, e2).
StateVec derivatives(const LinkCircuit& cfg, const StateVec& y, int drive, int s_cond) {
    StateVec d{};
    const double v_drive = drive * cfg.v_supply;
    const double e1 = v_drive - (cfg.bridge_ron + cfg.tx.esr) * y.i1 - y.v_c1;
    const double l1 = cfg.tx.inductance;
    const double l2 = cfg.rx.inductance;

    if (cfg.rectifier_bypassed) {
        const double e2 = -(cfg.rx.esr + cfg.load.resistance) * y.i2 - y.v_c2;
        const double det = l1 * l2 - cfg.m * cfg.m;
        d.i1 = (l2 * e1 - cfg.m * e2) / det;
        d.i2 = (l1 * e2 - cfg.m * e1) / det;
        d.v_c1 = y.i1 / cfg.c1;
        d.v_c2 = y.i2 / cfg.c2;
        return d;
    }

    if (s_cond != 0) {
        const double l2_eff = l2 + cfg.lcl.l_in;
        const double e2 = -(cfg.rx.esr + 2.0 * cfg.diode_ron) * y.i2 - y.v_c2 -
                          s_cond * (2.0 * cfg.diode_vf + y.v_cmid);
        const double det = l1 * l2_eff - cfg.m * cfg.m;
        d.i1 = (l2_eff * e1 - cfg.m * e2) / det;
        d.i2 = (l1 * e2 - cfg.m * e1) / det;
    } else {
        d.i1 = e1 / l1;
        d.i2 = 0.0;
    }
    d.v_c1 = y.i1 / cfg.c1;
    d.v_c2 = y.i2 / cfg.c2;

    const double i_rect = s_cond * y.i2; // >= 0 while conducting
    const double v_load = load_voltage(cfg, y);
    switch (cfg.load.kind) {
        case LoadKind::resistor:
            d.i_lout = (y.v_cmid - v_load) / cfg.lcl.l_out;
            d.v_cmid = (i_rect - y.i_lout) / cfg.lcl.c_mid;
            break;
        case LoadKind::dc_motor:
            d.i_lout = (y.v_cmid - v_load) / cfg.lcl.l_out;
            d.v_cmid = (i_rect - y.i_lout) / cfg.lcl.c_mid;
            d.w_motor = (cfg.load.back_emf_const * y.i_lout -
                         cfg.load.friction * y.w_motor) /
                        cfg.load.inertia;
            break;
        case LoadKind::constant_current:
            d.v_cmid = (i_rect - cfg.load.current) / cfg.lcl.c_mid;
            break;
    }
    return d;
}

// Bridge conduction polarity at the start of a step: current keeps its own
// diode pair on; at zero current the pair turns on only once the mesh EMF
// beats the DC rail plus two forward drops.
int conduction_state(const LinkCircuit& cfg, const StateVec& y, int drive) {
    if (cfg.rectifier_bypassed) return 0;
    if (y.i2 > 0.0) return 1;
    if (y.i2 < 0.0) return -1;
    const double e1 = drive * cfg.v_supply - (cfg.bridge_ron + cfg.tx.esr) * y.i1 - y.v_c1;
    const double di1_blocked = e1 / cfg.tx.inductance;
    const double emf = -cfg.m * di1_blocked - y.v_c2;
    const double barrier = 2.0 * cfg.diode_vf + y.v_cmid;
    if (emf > barrier) return 1;
    if (emf < -barrier) return -1;
    return 0;
}

StateVec rk4(const LinkCircuit& cfg, const StateVec& y, int drive, int s_cond, double dt) {
    auto axpy = [](const StateVec& a, double h, const StateVec& b) {
        return StateVec{a.i1 + h * b.i1,       a.v_c1 + h * b.v_c1,
                        a.i2 + h * b.i2,       a.v_c2 + h * b.v_c2,
                        a.v_cmid + h * b.v_cmid, a.i_lout + h * b.i_lout,
                        a.w_motor + h * b.w_motor};
    };
    const StateVec k1 = derivatives(cfg, y, drive, s_cond);
    const StateVec k2 = derivatives(cfg, axpy(y, 0.5 * dt, k1), drive, s_cond);
    const StateVec k3 = derivatives(cfg, axpy(y, 0.5 * dt, k2), drive, s_cond);
    const StateVec k4 = derivatives(cfg, axpy(y, dt, k3), drive, s_cond);
    StateVec out = y;
    const double h6 = dt / 6.0;
    out.i1 += h6 * (k1.i1 + 2.0 * k2.i1 + 2.0 * k3.i1 + k4.i1);
    out.v_c1 += h6 * (k1.v_c1 + 2.0 * k2.v_c1 + 2.0 * k3.v_c1 + k4.v_c1);
    out.i2 += h6 * (k1.i2 + 2.0 * k2.i2 + 2.0 * k3.i2 + k4.i2);
    out.v_c2 += h6 * (k1.v_c2 + 2.0 * k2.v_c2 + 2.0 * k3.v_c2 + k4.v_c2);
    out.v_cmid += h6 * (k1.v_cmid + 2.0 * k2.v_cmid + 2.0 * k3.v_cmid + k4.v_cmid);
    out.i_lout += h6 * (k1.i_lout + 2.0 * k2.i_lout + 2.0 * k3.i_lout + k4.i_lout);
    out.w_motor += h6 * (k1.w_motor + 2.0 * k2.w_motor + 2.0 * k3.w_motor + k4.w_motor);
    return out;
}

bool finite(const StateVec& y) {
    return std::isfinite(y.i1) && std::isfinite(y.v_c1) && std::isfinite(y.i2) &&
           std::isfinite(y.v_c2) && std::isfinite(y.v_cmid) && std::isfinite(y.i_lout) &&
           std::isfinite(y.w_motor);
}

double load_current_of(const LinkCircuit& cfg, const StateVec& y) {
    if (cfg.rectifier_bypassed) return y.i2;
    if (cfg.load.kind == LoadKind::constant_current) return cfg.load.current;
    return y.i_lout;
}

double load_voltage_of(const LinkCircuit& cfg, const StateVec& y) {
    if (cfg.rectifier_bypassed) return cfg.load.resistance * y.i2;
    return load_voltage(cfg, y);
}

double dissipation_power(const LinkCircuit& cfg, const StateVec& y, int s_cond) {
    double p = (cfg.bridge_ron + cfg.tx.esr) * y.i1 * y.i1 + cfg.rx.esr * y.i2 * y.i2;
    if (!cfg.rectifier_bypassed && s_cond != 0) {
        p += 2.0 * cfg.diode_ron * y.i2 * y.i2 + 2.0 * cfg.diode_vf * std::abs(y.i2);
    }
    return p;
}

// Trapezoidal energy accounting over one constant-conduction segment.
void account(const LinkCircuit& cfg, const StateVec& y0, const StateVec& y1, int drive,
             int s_cond, double h, EnergySample* acc) {
    if (acc == nullptr) return;
    const double vd = drive * cfg.v_supply;
    acc->e_source += 0.5 * h * (vd * y0.i1 + vd * y1.i1);
    acc->e_load += 0.5 * h *
                   (load_voltage_of(cfg, y0) * load_current_of(cfg, y0) +
                    load_voltage_of(cfg, y1) * load_current_of(cfg, y1));
    acc->e_dissipated +=
        0.5 * h * (dissipation_power(cfg, y0, s_cond) + dissipation_power(cfg, y1, s_cond));
}

StateVec run_segment(const LinkCircuit& cfg, const StateVec& y, int drive, int s_cond,
                     double h, EnergySample* acc) {
    const StateVec y1 = rk4(cfg, y, drive, s_cond, h);
    account(cfg, y, y1, drive, s_cond, h, acc);
    return y1;
}

// signed clearance of the bridge turn-on condition at zero tank current
double turn_on_margin(const LinkCircuit& cfg, const StateVec& y, int drive, int direction) {
    const double e1 = drive * cfg.v_supply - (cfg.bridge_ron + cfg.tx.esr) * y.i1 - y.v_c1;
    const double emf = -cfg.m * (e1 / cfg.tx.inductance) - y.v_c2;
    const double barrier = 2.0 * cfg.diode_vf + y.v_cmid;
    return direction > 0 ? emf - barrier : -emf - barrier;
}

// Advances one solver step, splitting at diode events (commutation of the
// conducting pair, or turn-on from the blocked state) so the event timing is
// second-order accurate rather than snapped to the step grid.
StateVec advance(const LinkCircuit& cfg, const StateVec& y, int drive, double dt,
                 EnergySample* acc) {
    if (cfg.rectifier_bypassed) return run_segment(cfg, y, drive, 0, dt, acc);

    const int s = conduction_state(cfg, y, drive);
    const StateVec trial = rk4(cfg, y, drive, s, dt);

    if (s != 0 && trial.i2 * s < 0.0) {
        // conducting pair switches off inside the step
        const double denom = y.i2 - trial.i2;
        double theta = denom != 0.0 ? y.i2 / denom : 1.0;
        theta = std::clamp(theta, 0.0, 1.0);
        StateVec mid = run_segment(cfg, y, drive, s, theta * dt, acc);
        mid.i2 = 0.0;
        const int s2 = conduction_state(cfg, mid, drive);
        StateVec out = run_segment(cfg, mid, drive, s2, (1.0 - theta) * dt, acc);
        if (s2 != 0 && out.i2 * s2 < 0.0) out.i2 = 0.0; // rare double event
        return out;
    }
    if (s == 0) {
        const int s_end = conduction_state(cfg, trial, drive);
        if (s_end != 0) {
            // bridge becomes forward-biased inside the step
            const double m0 = turn_on_margin(cfg, y, drive, s_end);
            const double m1 = turn_on_margin(cfg, trial, drive, s_end);
            double theta = m1 - m0 != 0.0 ? -m0 / (m1 - m0) : 0.0;
            theta = std::clamp(theta, 0.0, 1.0);
            const StateVec mid = run_segment(cfg, y, drive, 0, theta * dt, acc);
            StateVec out = run_segment(cfg, mid, drive, s_end, (1.0 - theta) * dt, acc);
            if (out.i2 * s_end < 0.0) out.i2 = 0.0;
            return out;
        }
    }
    account(cfg, y, trial, drive, s, dt, acc);
    return trial;
}

SimState unpack(const LinkCircuit& cfg, const StateVec& y, int s_cond, double t) {
    SimState s;
    s.i1 = y.i1;
    s.i2 = y.i2;
    s.v_c1 = y.v_c1;
    s.v_c2 = y.v_c2;
    s.i_lin = cfg.rectifier_bypassed ? 0.0 : std::abs(s_cond * y.i2);
    s.i_lout = cfg.load.kind == LoadKind::constant_current && !cfg.rectifier_bypassed
                   ? cfg.load.current
                   : y.i_lout;
    s.v_cmid = y.v_cmid;
    s.v_load = cfg.rectifier_bypassed ? cfg.load.resistance * y.i2 : load_voltage(cfg, y);
    s.motor_speed = y.w_motor;
    s.t = t;
    return s;
}

} // namespace

double stored_energy(const LinkCircuit& cfg, const SimState& s) {
    const double magnetic = 0.5 * (cfg.tx.inductance * s.i1 * s.i1 +
                                   2.0 * cfg.m * s.i1 * s.i2 +
                                   cfg.rx.inductance * s.i2 * s.i2);
    double e = magnetic + 0.5 * cfg.c1 * s.v_c1 * s.v_c1 + 0.5 * cfg.c2 * s.v_c2 * s.v_c2;
    if (!cfg.rectifier_bypassed) {
        e += 0.5 * cfg.lcl.l_in * s.i_lin * s.i_lin +
             0.5 * cfg.lcl.c_mid * s.v_cmid * s.v_cmid +
             0.5 * cfg.lcl.l_out * s.i_lout * s.i_lout;
    }
    return e;
}

SimState step(const LinkCircuit& cfg, const SimState& s, int drive, double dt) {
    if (!(dt > 0.0)) throw std::domain_error("step: dt must be > 0");
    const StateVec out = advance(cfg, pack(s), drive, dt, nullptr);
    if (!finite(out)) {
        throw numerical_error("step: non-finite state", s.t + dt);
    }
    return unpack(cfg, out, conduction_state(cfg, out, drive), s.t + dt);
}

namespace {

// Steady-state estimate used to start the DC rail near its operating point,
// shortening the settling transient. Fundamental-frequency reflected-load
// arithmetic; exactness is not required, only a deterministic warm start.
StateVec warm_start(const LinkCircuit& cfg, const ControllerConfig& ctrl) {
    StateVec y{};
    if (cfg.rectifier_bypassed || cfg.m <= 0.0) return y;
    double r_dc = 0.0;
    switch (cfg.load.kind) {
        case LoadKind::resistor: r_dc = cfg.load.resistance; break;
        case LoadKind::dc_motor: r_dc = cfg.load.armature_r; break;
        case LoadKind::constant_current: return y;
    }
    const double w = 2.0 * std::numbers::pi * ctrl.f_search;
    const double r_ac = (8.0 / (std::numbers::pi * std::numbers::pi)) * r_dc;
    const double r2 = cfg.rx.esr + 2.0 * cfg.diode_ron + r_ac;
    const double reflected = w * w * cfg.m * cfg.m / r2;
    const double v1 = (4.0 / std::numbers::pi) * cfg.v_supply; // fundamental peak
    const double i1_pk = v1 / (cfg.bridge_ron + cfg.tx.esr + reflected);
    const double i2_pk = w * cfg.m * i1_pk / r2;
    const double i_dc = (2.0 / std::numbers::pi) * i2_pk;
    y.i_lout = i_dc;
    y.v_cmid = r_dc * i_dc;
    if (cfg.load.kind == LoadKind::dc_motor && cfg.load.back_emf_const > 0.0) {
        y.w_motor = cfg.load.back_emf_const * i_dc / cfg.load.friction;
        y.v_cmid = cfg.load.back_emf_const * y.w_motor + cfg.load.armature_r * i_dc;
    }
    return y;
}

} // namespace

SimTrace run_transient(const LinkCircuit& cfg_in, const ControllerConfig& ctrl,
                       double duration, double dt, double dt_out) {
    const LinkCircuit cfg = validate_circuit(cfg_in);
    ctrl.validate();
    if (!(duration > 0.0) || !(dt > 0.0)) {
        throw std::domain_error("run_transient: duration and dt must be > 0");
    }
    const double steps_out_f = dt_out / dt;
    const long steps_out = std::lround(steps_out_f);
    if (steps_out < 1 || std::abs(steps_out_f - static_cast<double>(steps_out)) > 1e-9 * steps_out_f) {
        throw std::domain_error("run_transient: dt must divide dt_out");
    }
    // keep at least 200 solver steps per drive cycle over the whole window
    if (dt > 1.0 / (200.0 * ctrl.f_hi)) {
        throw std::domain_error("run_transient: dt too coarse for the drive period");
    }

    SimTrace trace;
    trace.dt_out = dt_out;
    trace.v_supply = cfg.v_supply;

    StateVec y = warm_start(cfg, ctrl);
    ControllerState cs;
    cs.board_temp = ctrl.thermal.t_ambient;

    const long n_steps = std::lround(duration / dt);
    trace.samples.reserve(static_cast<size_t>(n_steps / steps_out) + 2);
    trace.energy.reserve(trace.samples.capacity());

    EnergySample acc;
    double p_tx_ema = 0.0;
    const double ema_alpha = dt * ctrl.f_search / 16.0; // ~16-cycle smoothing

    int drive = 0;
    int s_cond = conduction_state(cfg, y, drive);

    auto record = [&](double t) {
        TraceSample ts;
        ts.state = unpack(cfg, y, s_cond, t);
        ts.drive = drive;
        ts.v_switch = drive * cfg.v_supply - cfg.bridge_ron * y.i1;
        ts.i_supply = drive * y.i1;
        ts.i_load = load_current_of(cfg, y);
        trace.samples.push_back(ts);
        trace.energy.push_back(acc);
    };

    for (long n = 0; n <= n_steps; ++n) {
        const double t = n * dt;
        const double v_switch = drive * cfg.v_supply - cfg.bridge_ron * y.i1;
        auto [next_drive, next_cs] =
            controller_step(ctrl, cs, {t, y.i1, v_switch, p_tx_ema});
        cs = next_cs;
        drive = next_drive;
        s_cond = conduction_state(cfg, y, drive);

        if (n % steps_out == 0) record(t);
        if (n == n_steps) break;

        y = advance(cfg, y, drive, dt, &acc);
        if (!finite(y)) throw numerical_error("run_transient: non-finite state", t + dt);

        p_tx_ema += ema_alpha * (drive * cfg.v_supply * y.i1 - p_tx_ema);
        cs.board_temp = thermal_step(ctrl, cs.board_temp, cfg.bridge_ron * y.i1 * y.i1, dt);

        if (cs.mode != ControllerMode::fault) {
            std::optional<double> f_lock;
            if (cs.lock_frequency_valid()) f_lock = cs.lock_frequency();
            if (auto code = check_faults(ctrl, p_tx_ema, f_lock, cs.board_temp)) {
                cs = with_fault(cs, *code);
                trace.controller.fault = *code;
                trace.controller.fault_time = t + dt;
                break;
            }
        }
    }

    trace.controller.final_mode = cs.mode;
    trace.controller.locked = cs.mode == ControllerMode::lock ||
                              (cs.mode == ControllerMode::fault && cs.crossing_count > 0);
    trace.controller.t_lock = cs.t_lock;
    if (cs.lock_frequency_valid()) trace.controller.lock_frequency = cs.lock_frequency();
    trace.controller.board_temp = cs.board_temp;
    return trace;
}

std::string trace_to_csv(const SimTrace& trace) {
    std::string out = "t_s,i1_a,i2_a,v_c1_v,v_c2_v,v_load_v,i_load_a,drive,v_switch_v,i_supply_a\n";
    char line[320];
    for (const auto& s : trace.samples) {
        std::snprintf(line, sizeof(line),
                      "%.9e,%.9e,%.9e,%.9e,%.9e,%.9e,%.9e,%d,%.9e,%.9e\n",
                      s.state.t, s.state.i1, s.state.i2, s.state.v_c1, s.state.v_c2,
                      s.state.v_load, s.i_load, s.drive, s.v_switch, s.i_supply);
        out += line;
    }
    return out;
}

} // namespace wpt
