#pragma once

#include <string>
#include <vector>

#include "wpt/analysis.hpp"
#include "wpt/scenario.hpp"

namespace wpt {

// One row of the embedded measured reference dataset (distance sweep of the
// prototype link, DC terminals both sides).
struct MeasuredRow {
    double distance;   // m
    double i_tx;       // A
    double p_tx;       // W
    double i_rx;       // A
    double v_rx;       // V
    double p_rx;       // W
    double efficiency; // fraction
};

// The eight published rows, 0.5 cm to 2.0 cm, exactly as measured.
const std::vector<MeasuredRow>& table_i_dataset();

enum class RowStatus { ok, fault, out_of_range };

const char* to_string(RowStatus status);

struct SweepRow {
    double distance = 0.0;
    RowStatus status = RowStatus::ok;
    PowerReport report;
    bool pass = false;
    std::string note;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    double largest_passing = 0.0; // m, 0 when nothing passes
};

// Closed-loop run at one separation; load_ohms > 0 overrides the scenario
// load with a resistor. Throws on simulation failure.
PowerReport simulate_distance(const Scenario& sc, double distance, double load_ohms = 0.0);

// Full distance sweep: per-distance mutual inductance, transient run,
// steady-state power metrics, requirement check. Rows run independently
// (parallel when OpenMP is enabled) and per-row failures are recorded
// without aborting the sweep.
SweepReport run_sweep(const Scenario& sc);

// Matches the reference-table layout byte-for-byte in the header.
std::string sweep_to_csv(const SweepReport& report);
std::string power_report_csv_row(double distance, const PowerReport& report);

struct CalibrationResult {
    std::vector<std::pair<std::string, double>> params;
    double rms_error_pp = 0.0;         // percentage points of efficiency
    std::vector<double> residuals_pp;  // simulated minus measured, per row
    bool converged = false;
    int evaluations = 0;
};

// Nelder-Mead fit of the free parameters (subset of tx.esr, rx.esr,
// diode_vf, k_scale) minimizing the RMS efficiency error against the
// measured rows. Deterministic for a fixed scenario and initial simplex;
// when the budget runs out the best point so far is returned with
// converged = false.
CalibrationResult calibrate(const Scenario& sc, const std::vector<MeasuredRow>& measured,
                            const std::vector<std::string>& free_params,
                            int max_evaluations = 150);

// Scenario with the fitted parameters applied.
Scenario apply_calibration(const Scenario& sc, const CalibrationResult& fit);

// Config fragment reproducing the fitted values.
std::string calibration_to_config(const CalibrationResult& fit);

} // namespace wpt
