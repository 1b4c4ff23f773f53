#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wpt/circuit.hpp"
#include "wpt/controller.hpp"
#include "wpt/dosimetry.hpp"
#include "wpt/magnetics.hpp"

namespace wpt {

struct Requirement {
    double i_min = 5e-3; // A at the load
    double v_min = 7.0;  // V at the load
};

struct SimSettings {
    double duration = 4e-3;
    double dt = 30e-9;
    double dt_out = 150e-9;
    double steady_tol = 1e-3;
    double distance = 0.0; // m, single-run coil separation; 0 = first sweep distance
};

struct DosimetrySetup {
    TissuePhantom phantom;
    double surface_gap = 6e-3; // m, coil plane to phantom surface
    double current = 1.0;      // A peak in the Tx coil
    double frequency = 127e3;  // Hz
    double spacing = 2e-3;     // m grid pitch
    bool complex_admittivity = false;
};

struct Scenario {
    LinkCircuit circuit;
    ControllerConfig controller;
    CouplingModel coupling;
    std::vector<double> distances;                     // m, strictly increasing
    std::vector<std::pair<double, double>> load_table; // optional per-distance load ohms
    Requirement requirement;
    SimSettings sim;
    DosimetrySetup dosimetry;
};

// Scalar with an optional unit suffix (uH, nF, mm, kHz, V, A, W, ohm, ms, ...).
// Plain numbers pass through for dimensionless quantities.
double parse_quantity(const std::string& token);

// Parses the hierarchical key-value scenario document. Unknown sections or
// keys are rejected with their line number; circuit invariants are enforced
// through validate_circuit. Required sections: circuit, controller,
// coupling, sweep, sim, requirement.
Scenario load_scenario(const std::string& text);
Scenario load_scenario_file(const std::string& path);

} // namespace wpt
