#pragma once

#include <utility>
#include <vector>

namespace wpt {

constexpr double k_mu0 = 1.25663706212e-6; // H/m, vacuum permeability

// One equivalent circular filament of a wound coil.
struct Filament {
    double radius;       // m
    double axial_offset; // m, along the coil axis relative to the coil plane
};

// Electrical + geometric description of one coil. The filament set stands in
// for the unknown real winding; turns_scale calibrates the filament sums to
// measured coupling (the datasheets give inductance but not turn layout).
struct CoilSpec {
    double inductance = 0.0;   // H
    double esr = 0.0;          // ohm, series resistance at the working frequency
    double outer_radius = 0.0; // m
    std::vector<Filament> filaments;
    double turns_scale = 1.0;

    // n_filaments equivalent loops spread uniformly between 40% and 100% of
    // the outer radius, all in the coil plane.
    static CoilSpec uniform(double inductance, double esr, double outer_radius,
                            int n_filaments = 10);

    // Throws validation_error naming each violated invariant.
    void validate(const char* label) const;
};

enum class CouplingMode {
    analytic_filament, // filament-pair mutual inductance sums
    tabulated,         // measured/calibrated k(distance) table
};

// How coil-to-coil coupling is obtained. In tabulated mode k is interpolated
// linearly inside the table range and never extrapolated. k_scale multiplies
// the analytic result only; tables are taken as data.
struct CouplingModel {
    CouplingMode mode = CouplingMode::analytic_filament;
    std::vector<std::pair<double, double>> table; // (distance m, k), distances increasing
    double k_scale = 1.0;

    void validate() const;
};

// f0 = 1 / (2*pi*sqrt(L*C))
double resonant_frequency(double inductance, double capacitance);

// Series capacitance that tunes L to f_target.
double resonance_capacitance(double inductance, double f_target);

// Mutual inductance of two coaxial circular filaments (Maxwell's
// elliptic-integral formula). Symmetric in (a, b); throws on the coincident
// filament singularity (d = 0 with a = b).
double mutual_inductance_loops(double radius_a, double radius_b, double separation);

// Mutual inductance between two coils a distance d apart (coaxial).
// analytic_filament: turns_scale-weighted filament-pair sum; tabulated:
// M = k(d)*sqrt(L_tx*L_rx) with linear interpolation, std::out_of_range
// outside the table.
double coil_mutual(const CoilSpec& tx, const CoilSpec& rx, double distance,
                   const CouplingModel& model);

// k = M / sqrt(L1*L2); throws std::domain_error when k >= 1.
double coupling_coefficient(double mutual, double l1, double l2);

} // namespace wpt
