#include "wpt/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "wpt/errors.hpp"

namespace wpt {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0;
    size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

const std::map<std::string, double>& unit_table() {
    static const std::map<std::string, double> units = {
        {"V", 1.0},     {"mV", 1e-3},  {"kV", 1e3},
        {"A", 1.0},     {"mA", 1e-3},  {"uA", 1e-6},
        {"W", 1.0},     {"mW", 1e-3},  {"kW", 1e3},
        {"ohm", 1.0},   {"mohm", 1e-3}, {"kohm", 1e3}, {"Mohm", 1e6},
        {"H", 1.0},     {"mH", 1e-3},  {"uH", 1e-6},  {"nH", 1e-9},
        {"F", 1.0},     {"mF", 1e-3},  {"uF", 1e-6},  {"nF", 1e-9}, {"pF", 1e-12},
        {"Hz", 1.0},    {"kHz", 1e3},  {"MHz", 1e6},
        {"m", 1.0},     {"cm", 1e-2},  {"mm", 1e-3},  {"um", 1e-6},
        {"s", 1.0},     {"ms", 1e-3},  {"us", 1e-6},  {"ns", 1e-9},
        {"degC", 1.0},
    };
    return units;
}

} // namespace

double parse_quantity(const std::string& token) {
    const std::string t = trim(token);
    if (t.empty()) throw std::invalid_argument("empty value");
    size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(t, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("not a number: '" + t + "'");
    }
    const std::string suffix = trim(t.substr(pos));
    if (suffix.empty()) return value;
    const auto& units = unit_table();
    auto it = units.find(suffix);
    if (it == units.end()) {
        throw std::invalid_argument("unknown unit suffix '" + suffix + "'");
    }
    return value * it->second;
}

namespace {

bool parse_bool(const std::string& v, int line) {
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw config_error("expected a boolean, got '" + v + "'", line);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

std::vector<std::pair<double, double>> parse_pair_list(const std::string& v, int line) {
    std::vector<std::pair<double, double>> out;
    for (const auto& item : split(v, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw config_error("expected 'x:y' pairs, got '" + item + "'", line);
        }
        try {
            out.emplace_back(parse_quantity(item.substr(0, colon)),
                             parse_quantity(item.substr(colon + 1)));
        } catch (const std::invalid_argument& e) {
            throw config_error(e.what(), line);
        }
    }
    return out;
}

struct ParseTracker {
    bool c1_set = false;
    bool c2_set = false;
    double tune = 0.0;
    int tx_filaments = 10;
    int rx_filaments = 10;
    double reference_k = 0.20;
    double reference_distance = 6e-3;
    bool anchor_requested = true;
    std::vector<std::string> sections_seen;
};

} // namespace

Scenario load_scenario(const std::string& text) {
    Scenario sc;
    ParseTracker tk;

    // spec defaults before overrides
    sc.circuit.tx = CoilSpec::uniform(24e-6, 0.15, 25e-3, 10);
    sc.circuit.rx = CoilSpec::uniform(47e-6, 0.30, 13.15e-3, 10);
    sc.circuit.lcl = {10e-6, 10e-6, 10e-6};
    sc.circuit.load = LoadModel::resistor_load(133.0);

    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string s = trim(raw);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw config_error("unterminated section header", line);
            section = trim(s.substr(1, s.size() - 2));
            static const std::vector<std::string> known = {
                "circuit", "circuit.tx", "circuit.rx", "circuit.lcl", "circuit.load",
                "controller", "controller.thermal", "coupling", "sweep", "sim",
                "requirement", "dosimetry"};
            if (std::find(known.begin(), known.end(), section) == known.end()) {
                throw config_error("unknown section [" + section + "]", line);
            }
            tk.sections_seen.push_back(section);
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw config_error("expected 'key = value'", line);
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty() || value.empty()) throw config_error("expected 'key = value'", line);

        auto num = [&]() {
            try {
                return parse_quantity(value);
            } catch (const std::invalid_argument& e) {
                throw config_error(e.what(), line);
            }
        };
        auto unknown_key = [&]() -> void {
            throw config_error("unknown key '" + key + "' in [" + section + "]", line);
        };

        if (section == "circuit") {
            if (key == "v_supply") sc.circuit.v_supply = num();
            else if (key == "bridge_ron") sc.circuit.bridge_ron = num();
            else if (key == "c1") { sc.circuit.c1 = num(); tk.c1_set = true; }
            else if (key == "c2") { sc.circuit.c2 = num(); tk.c2_set = true; }
            else if (key == "tune") tk.tune = num();
            else if (key == "diode_vf") sc.circuit.diode_vf = num();
            else if (key == "diode_ron") sc.circuit.diode_ron = num();
            else if (key == "rectifier_bypassed") sc.circuit.rectifier_bypassed = parse_bool(value, line);
            else unknown_key();
        } else if (section == "circuit.tx" || section == "circuit.rx") {
            const bool is_tx = section == "circuit.tx";
            CoilSpec& coil = is_tx ? sc.circuit.tx : sc.circuit.rx;
            int& nfil = is_tx ? tk.tx_filaments : tk.rx_filaments;
            if (key == "inductance") coil.inductance = num();
            else if (key == "esr") coil.esr = num();
            else if (key == "outer_radius") coil.outer_radius = num();
            else if (key == "filaments") nfil = static_cast<int>(num());
            else if (key == "turns_scale") { coil.turns_scale = num(); tk.anchor_requested = false; }
            else unknown_key();
        } else if (section == "circuit.lcl") {
            if (key == "l_in") sc.circuit.lcl.l_in = num();
            else if (key == "c_mid") sc.circuit.lcl.c_mid = num();
            else if (key == "l_out") sc.circuit.lcl.l_out = num();
            else unknown_key();
        } else if (section == "circuit.load") {
            if (key == "type") {
                if (value == "resistor") sc.circuit.load.kind = LoadKind::resistor;
                else if (value == "dc_motor") sc.circuit.load.kind = LoadKind::dc_motor;
                else if (value == "constant_current") sc.circuit.load.kind = LoadKind::constant_current;
                else throw config_error("unknown load type '" + value + "'", line);
            } else if (key == "resistance") sc.circuit.load.resistance = num();
            else if (key == "back_emf_const") sc.circuit.load.back_emf_const = num();
            else if (key == "armature_r") sc.circuit.load.armature_r = num();
            else if (key == "inertia") sc.circuit.load.inertia = num();
            else if (key == "friction") sc.circuit.load.friction = num();
            else if (key == "current") sc.circuit.load.current = num();
            else unknown_key();
        } else if (section == "controller") {
            if (key == "f_search") sc.controller.f_search = num();
            else if (key == "search_duty") sc.controller.search_duty = num();
            else if (key == "detect_threshold") sc.controller.detect_threshold = num();
            else if (key == "f_lo") sc.controller.f_lo = num();
            else if (key == "f_hi") sc.controller.f_hi = num();
            else if (key == "p_max") sc.controller.p_max = num();
            else if (key == "temp_max") sc.controller.temp_max = num();
            else unknown_key();
        } else if (section == "controller.thermal") {
            if (key == "r_th") sc.controller.thermal.r_th = num();
            else if (key == "c_th") sc.controller.thermal.c_th = num();
            else if (key == "t_ambient") sc.controller.thermal.t_ambient = num();
            else unknown_key();
        } else if (section == "coupling") {
            if (key == "mode") {
                if (value == "analytic") sc.coupling.mode = CouplingMode::analytic_filament;
                else if (value == "tabulated") sc.coupling.mode = CouplingMode::tabulated;
                else throw config_error("unknown coupling mode '" + value + "'", line);
            } else if (key == "k_scale") sc.coupling.k_scale = num();
            else if (key == "table") sc.coupling.table = parse_pair_list(value, line);
            else if (key == "reference_k") tk.reference_k = num();
            else if (key == "reference_distance") tk.reference_distance = num();
            else unknown_key();
        } else if (section == "sweep") {
            if (key == "distances") {
                sc.distances.clear();
                for (const auto& item : split(value, ',')) {
                    try {
                        sc.distances.push_back(parse_quantity(item));
                    } catch (const std::invalid_argument& e) {
                        throw config_error(e.what(), line);
                    }
                }
            } else if (key == "load_table") sc.load_table = parse_pair_list(value, line);
            else unknown_key();
        } else if (section == "sim") {
            if (key == "duration") sc.sim.duration = num();
            else if (key == "dt") sc.sim.dt = num();
            else if (key == "dt_out") sc.sim.dt_out = num();
            else if (key == "steady_tol") sc.sim.steady_tol = num();
            else if (key == "distance") sc.sim.distance = num();
            else unknown_key();
        } else if (section == "requirement") {
            if (key == "i_min") sc.requirement.i_min = num();
            else if (key == "v_min") sc.requirement.v_min = num();
            else unknown_key();
        } else if (section == "dosimetry") {
            if (key == "surface_gap") sc.dosimetry.surface_gap = num();
            else if (key == "current") sc.dosimetry.current = num();
            else if (key == "frequency") sc.dosimetry.frequency = num();
            else if (key == "spacing") sc.dosimetry.spacing = num();
            else if (key == "phantom_radius") sc.dosimetry.phantom.radius = num();
            else if (key == "phantom_length") sc.dosimetry.phantom.length = num();
            else if (key == "sigma") sc.dosimetry.phantom.sigma = num();
            else if (key == "eps_r") sc.dosimetry.phantom.eps_r = num();
            else if (key == "rho") sc.dosimetry.phantom.rho = num();
            else if (key == "complex_admittivity") sc.dosimetry.complex_admittivity = parse_bool(value, line);
            else unknown_key();
        } else {
            throw config_error("key outside any section", line);
        }
    }

    std::vector<std::string> missing;
    for (const char* needed : {"circuit", "controller", "coupling", "sweep", "sim", "requirement"}) {
        if (std::find(tk.sections_seen.begin(), tk.sections_seen.end(), needed) ==
            tk.sections_seen.end()) {
            missing.push_back(needed);
        }
    }
    if (!missing.empty()) {
        std::string msg = "missing required sections:";
        for (const auto& m : missing) msg += " [" + m + "]";
        throw config_error(msg, 0);
    }

    // rebuild filament sets if counts were overridden
    if (tk.tx_filaments != static_cast<int>(sc.circuit.tx.filaments.size())) {
        sc.circuit.tx = CoilSpec::uniform(sc.circuit.tx.inductance, sc.circuit.tx.esr,
                                          sc.circuit.tx.outer_radius, tk.tx_filaments);
    }
    if (tk.rx_filaments != static_cast<int>(sc.circuit.rx.filaments.size())) {
        sc.circuit.rx = CoilSpec::uniform(sc.circuit.rx.inductance, sc.circuit.rx.esr,
                                          sc.circuit.rx.outer_radius, tk.rx_filaments);
    }

    // series capacitors from the resonance relation unless given explicitly
    const double f_tune = tk.tune > 0.0 ? tk.tune : 127e3;
    if (!tk.c1_set) sc.circuit.c1 = resonance_capacitance(sc.circuit.tx.inductance, f_tune);
    if (!tk.c2_set) sc.circuit.c2 = resonance_capacitance(sc.circuit.rx.inductance, f_tune);

    // anchor the filament model to the reference coupling coefficient
    if (sc.coupling.mode == CouplingMode::analytic_filament && tk.anchor_requested) {
        CouplingModel raw;
        raw.mode = CouplingMode::analytic_filament;
        CoilSpec tx1 = sc.circuit.tx;
        CoilSpec rx1 = sc.circuit.rx;
        tx1.turns_scale = rx1.turns_scale = 1.0;
        const double m_raw = coil_mutual(tx1, rx1, tk.reference_distance, raw);
        const double m_target = tk.reference_k *
                                std::sqrt(sc.circuit.tx.inductance * sc.circuit.rx.inductance);
        const double ts = std::sqrt(m_target / m_raw);
        sc.circuit.tx.turns_scale = ts;
        sc.circuit.rx.turns_scale = ts;
    }

    std::vector<std::string> bad;
    if (sc.distances.empty()) bad.push_back("sweep.distances: must not be empty");
    for (size_t i = 0; i < sc.distances.size(); ++i) {
        if (!(sc.distances[i] > 0.0)) {
            bad.push_back("sweep.distances: all distances must be > 0");
            break;
        }
        if (i > 0 && !(sc.distances[i] > sc.distances[i - 1])) {
            bad.push_back("sweep.distances: must be strictly increasing");
            break;
        }
    }
    if (!bad.empty()) throw validation_error(std::move(bad));

    sc.controller.validate();
    sc.coupling.validate();
    // m is per-distance; validate the rest of the electrical model with a
    // placeholder well inside k < 1
    LinkCircuit probe = sc.circuit;
    probe.m = 0.0;
    validate_circuit(probe);
    return sc;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open scenario file '" + path + "'", 0);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_scenario(ss.str());
}

} // namespace wpt
