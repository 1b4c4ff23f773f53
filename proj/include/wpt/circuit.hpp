#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wpt/controller.hpp"
#include "wpt/magnetics.hpp"

namespace wpt {

enum class LoadKind { resistor, dc_motor, constant_current };

struct LoadModel {
    LoadKind kind = LoadKind::resistor;
    double resistance = 133.0;    // ohm (resistor)
    double back_emf_const = 0.02; // V*s/rad (dc_motor)
    double armature_r = 20.0;     // ohm
    double inertia = 2e-6;        // kg*m^2
    double friction = 1e-6;       // N*m*s/rad
    double current = 0.05;        // A (constant_current)

    static LoadModel resistor_load(double r);
    static LoadModel motor(double ke, double ra, double j, double b);
    static LoadModel constant_current_load(double i);
};

struct LclFilter {
    double l_in = 10e-6;  // H
    double c_mid = 10e-6; // F
    double l_out = 10e-6; // H
};

// Complete electrical model of the coupled link: DC supply and full bridge,
// two series-resonant tanks coupled by m, full-wave rectifier with
// piecewise-linear diodes, LCL smoothing filter, load. With
// rectifier_bypassed the resistor load sits directly in the Rx mesh and the
// DC side is inert (the linearized configuration the phasor oracle solves).
struct LinkCircuit {
    double v_supply = 5.0;   // V
    double bridge_ron = 0.1; // ohm
    double c1 = 0.0;         // F, Tx series capacitor
    CoilSpec tx;
    CoilSpec rx;
    double c2 = 0.0; // F, Rx series capacitor
    double m = 0.0;  // H, mutual inductance
    double diode_vf = 0.4;
    double diode_ron = 0.05;
    LclFilter lcl;
    LoadModel load;
    bool rectifier_bypassed = false;
};

// Returns the circuit unchanged iff every invariant holds; otherwise throws
// validation_error listing each violated field.
LinkCircuit validate_circuit(const LinkCircuit& cfg);

struct SimState {
    double i1 = 0.0;   // A, Tx tank current
    double i2 = 0.0;   // A, Rx tank current
    double v_c1 = 0.0; // V
    double v_c2 = 0.0; // V
    double i_lin = 0.0;  // A, rectified current through the input choke
    double i_lout = 0.0; // A, load-side choke current
    double v_cmid = 0.0; // V
    double v_load = 0.0; // V
    double motor_speed = 0.0; // rad/s
    double t = 0.0;
};

// Advances the coupled ODE system one explicit RK4 step. The bridge
// conduction state is resolved once per step from the entry state
// (conducting iff forward-biased beyond diode_vf) and held across the
// substeps; a sign change of i2 across the step commutates to exactly zero.
SimState step(const LinkCircuit& cfg, const SimState& s, int drive, double dt);

struct TraceSample {
    SimState state;
    int drive = 0;
    double v_switch = 0.0; // V, bridge output after the resistive drop
    double i_supply = 0.0; // A, drive*i1
    double i_load = 0.0;   // A
};

// Cumulative energy bookkeeping, integrated at the solver step and sampled
// on the output grid. e_dissipated includes every resistive element and the
// diode drops but not the load.
struct EnergySample {
    double e_source = 0.0;
    double e_load = 0.0;
    double e_dissipated = 0.0;
};

struct RunTelemetry {
    ControllerMode final_mode = ControllerMode::search;
    std::optional<FaultCode> fault;
    double fault_time = 0.0;
    std::optional<double> lock_frequency; // Hz, valid period estimate at end
    double t_lock = 0.0;                  // s, SEARCH -> LOCK transition
    bool locked = false;
    double board_temp = 0.0; // degC at end
};

struct SimTrace {
    double dt_out = 0.0;
    double v_supply = 0.0;
    std::vector<TraceSample> samples;
    std::vector<EnergySample> energy;
    RunTelemetry controller;
};

// Instantaneous energy stored in every reactive element (and the motor's
// rotating mass). The magnetic term is 0.5*(L1*i1^2 + 2*M*i1*i2 + L2*i2^2),
// positive definite for k < 1.
double stored_energy(const LinkCircuit& cfg, const SimState& s);

// Closed-loop run: the controller is consulted every solver step to set the
// bridge polarity, fault monitors are evaluated continuously and a fault
// ends the run early with the cause recorded. Deterministic: identical
// inputs produce bit-identical traces.
SimTrace run_transient(const LinkCircuit& cfg, const ControllerConfig& ctrl,
                       double duration, double dt, double dt_out);

// Trace CSV with the canonical column set
// (t_s,i1_a,i2_a,v_c1_v,v_c2_v,v_load_v,i_load_a,drive,v_switch_v,i_supply_a).
std::string trace_to_csv(const SimTrace& trace);

} // namespace wpt
