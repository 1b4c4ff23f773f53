#pragma once

#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "wpt/circuit.hpp"

namespace wpt {

// DC-terminal power metrics over a steady-state window, one Table-I-shaped
// row worth of numbers.
struct PowerReport {
    double i_tx_rms = 0.0;     // A
    double i_supply_avg = 0.0; // A
    double p_source = 0.0;     // W
    double i_load = 0.0;       // A, DC average
    double v_load = 0.0;       // V, DC average
    double p_load = 0.0;       // W
    double efficiency = 0.0;   // p_load / p_source, 0 when undriven
    double f_lock = 0.0;       // Hz
};

// Poincare-map steady-state detection: first 1-based cycle n with
// ||s(n+1) - s(n)|| / ||s(n)|| < tol at cycle boundaries, channels scaled by
// their trace-wide magnitude. Throws not_converged_error otherwise.
int detect_steady_state(const SimTrace& trace, double period, double tol);

struct CycleWindow {
    double t_start = 0.0;
    double t_end = 0.0;
    double period = 0.0;
};

// Metrics over a whole number of drive cycles; throws std::invalid_argument
// for a fractional-cycle window.
PowerReport cycle_metrics(const SimTrace& trace, const CycleWindow& window);

// Single-bin DFT projections at k*f0 for k = 1..n_harmonics, returned as
// |X_k| / |X_1| (first entry 1 by construction). The signal must span an
// integer number of fundamental periods.
std::vector<double> harmonic_ratios(std::span<const double> signal, double dt,
                                    double f0, int n_harmonics);

// Amplitude of the k-th harmonic projection (peak units).
double harmonic_amplitude(std::span<const double> signal, double dt, double f_k);

// Oscillation period averaged over the i1 upward zero crossings in the last
// half of the trace; falls back to `fallback` when fewer than two crossings
// are found. More accurate than a single controller period estimate.
double estimate_cycle_period(const SimTrace& trace, double fallback);

// Linearized two-mesh link driven at a single frequency; the load is the
// equivalent series AC resistance r_ac in the Rx mesh.
struct PhasorLink {
    double r1 = 0.0; // ohm, Tx mesh resistance (esr + bridge_ron)
    double l1 = 0.0;
    double c1 = 0.0;
    double r2 = 0.0; // ohm, Rx coil esr
    double l2 = 0.0;
    double c2 = 0.0;
    double m = 0.0;
    double r_ac = 0.0;
    double v1 = 1.0; // V, drive fundamental amplitude
};

struct PhasorSolution {
    std::complex<double> i1;
    std::complex<double> i2;
    std::complex<double> z_in;
    double eta_ac = 0.0;
};

// Two-mesh complex solve:
//   (R1 + j(wL1 - 1/(wC1))) I1 - jwM I2 = V1
//   -jwM I1 + (R2 + r_ac + j(wL2 - 1/(wC2))) I2 = 0
PhasorSolution phasor_solve(const PhasorLink& link, double f);

// Bisection root of Im(z_in(f)) = 0 inside [f_lo, f_hi] to 1e-6 relative.
// Throws std::domain_error when the phase does not change sign.
double zero_phase_frequency(const PhasorLink& link, double f_lo, double f_hi);

// Adapter from the transient model plus an AC-equivalent load resistance.
PhasorLink linearize(const LinkCircuit& cfg, double r_ac);

// Series AC resistance equivalent to a DC load r_dc behind the full-wave
// bridge feeding the mid capacitor: (8/pi^2) * r_dc.
double rectifier_ac_load(double r_dc);

struct Regression {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

// Ordinary least squares; throws std::invalid_argument with fewer than two
// distinct abscissae.
Regression linear_regression(std::span<const std::pair<double, double>> points);

} // namespace wpt
