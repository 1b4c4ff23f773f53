#include "wpt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "wpt/errors.hpp"
#include "wpt/simplex.hpp"

namespace wpt {

const std::vector<MeasuredRow>& table_i_dataset() {
    static const std::vector<MeasuredRow> rows = {
        {0.5e-2, 1.25, 6.25, 143e-3, 19.0, 2.73, 0.435},
        {0.6e-2, 1.27, 6.35, 124e-3, 17.0, 2.11, 0.332},
        {0.7e-2, 1.30, 6.50, 131e-3, 18.0, 2.36, 0.363},
        {0.8e-2, 1.26, 6.30, 110e-3, 16.0, 1.76, 0.280},
        {0.9e-2, 1.28, 6.40, 108e-3, 17.0, 1.84, 0.287},
        {1.0e-2, 1.19, 5.95, 100e-3, 12.0, 1.20, 0.202},
        {1.5e-2, 1.35, 6.75, 71e-3, 9.0, 0.64, 0.095},
        {2.0e-2, 1.27, 6.35, 20e-3, 9.0, 0.18, 0.028},
    };
    return rows;
}

const char* to_string(RowStatus status) {
    switch (status) {
        case RowStatus::ok: return "ok";
        case RowStatus::fault: return "fault";
        case RowStatus::out_of_range: return "out_of_range";
    }
    return "?";
}

namespace {

double load_for_distance(const Scenario& sc, double distance) {
    if (sc.load_table.empty()) return 0.0;
    const auto& t = sc.load_table;
    if (distance <= t.front().first) return t.front().second;
    if (distance >= t.back().first) return t.back().second;
    for (size_t i = 1; i < t.size(); ++i) {
        if (distance <= t[i].first) {
            const double f = (distance - t[i - 1].first) / (t[i].first - t[i - 1].first);
            return t[i - 1].second + f * (t[i].second - t[i - 1].second);
        }
    }
    return t.back().second;
}

} // namespace

PowerReport simulate_distance(const Scenario& sc, double distance, double load_ohms) {
    LinkCircuit circuit = sc.circuit;
    circuit.m = coil_mutual(circuit.tx, circuit.rx, distance, sc.coupling);
    if (load_ohms > 0.0) circuit.load = LoadModel::resistor_load(load_ohms);

    const SimTrace trace = run_transient(circuit, sc.controller, sc.sim.duration,
                                         sc.sim.dt, sc.sim.dt_out);
    if (trace.controller.fault) {
        throw std::runtime_error(std::string("controller fault: ") +
                                 to_string(*trace.controller.fault));
    }
    const double period = estimate_cycle_period(trace, 1.0 / sc.controller.f_search);
    detect_steady_state(trace, period, sc.sim.steady_tol);

    const double t_end = trace.samples.back().state.t;
    const int cycles = std::min(20, static_cast<int>(std::floor(t_end / period)) - 1);
    if (cycles < 1) throw std::runtime_error("simulate_distance: trace too short");
    CycleWindow window;
    window.period = period;
    window.t_end = t_end;
    window.t_start = t_end - cycles * period;
    return cycle_metrics(trace, window);
}

SweepReport run_sweep(const Scenario& sc) {
    SweepReport report;
    report.rows.resize(sc.distances.size());

    const auto n = static_cast<long>(sc.distances.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (long i = 0; i < n; ++i) {
        SweepRow& row = report.rows[static_cast<size_t>(i)];
        row.distance = sc.distances[static_cast<size_t>(i)];
        try {
            const double load = load_for_distance(sc, row.distance);
            row.report = simulate_distance(sc, row.distance, load);
            row.status = RowStatus::ok;
            row.pass = row.report.v_load >= sc.requirement.v_min &&
                       row.report.i_load >= sc.requirement.i_min;
        } catch (const std::out_of_range&) {
            row.status = RowStatus::out_of_range;
            row.note = "no coupling: distance outside the coupling table";
        } catch (const std::exception& e) {
            row.status = RowStatus::fault;
            row.note = e.what();
        }
    }

    for (const auto& row : report.rows) {
        if (row.pass) report.largest_passing = std::max(report.largest_passing, row.distance);
    }
    return report;
}

std::string power_report_csv_row(double distance, const PowerReport& r) {
    char line[240];
    std::snprintf(line, sizeof(line), "%.2f,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g\n",
                  distance * 100.0, r.i_tx_rms, r.p_source, r.i_load * 1e3, r.v_load,
                  r.p_load, r.efficiency * 100.0);
    return line;
}

std::string sweep_to_csv(const SweepReport& report) {
    std::string out = "distance_cm,i_tx_a,p_tx_w,i_rx_ma,v_rx_v,p_rx_w,efficiency_pct\n";
    for (const auto& row : report.rows) {
        out += power_report_csv_row(row.distance, row.report);
    }
    return out;
}

namespace {

struct FreeParam {
    std::string name;
    double lo;
    double hi;
};

const std::vector<FreeParam>& known_params() {
    static const std::vector<FreeParam> params = {
        {"tx.esr", 0.02, 5.0},
        {"rx.esr", 0.02, 5.0},
        {"diode_vf", 0.05, 1.5},
        {"k_scale", 0.2, 3.0},
    };
    return params;
}

double get_param(const Scenario& sc, const std::string& name) {
    if (name == "tx.esr") return sc.circuit.tx.esr;
    if (name == "rx.esr") return sc.circuit.rx.esr;
    if (name == "diode_vf") return sc.circuit.diode_vf;
    if (name == "k_scale") return sc.coupling.k_scale;
    throw std::invalid_argument("calibrate: unknown parameter '" + name + "'");
}

void set_param(Scenario& sc, const std::string& name, double value) {
    if (name == "tx.esr") sc.circuit.tx.esr = value;
    else if (name == "rx.esr") sc.circuit.rx.esr = value;
    else if (name == "diode_vf") sc.circuit.diode_vf = value;
    else if (name == "k_scale") sc.coupling.k_scale = value;
    else throw std::invalid_argument("calibrate: unknown parameter '" + name + "'");
}

std::vector<double> efficiency_residuals_pp(const Scenario& sc,
                                            const std::vector<MeasuredRow>& measured) {
    std::vector<double> residuals(measured.size(), 0.0);
    const auto n = static_cast<long>(measured.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (long i = 0; i < n; ++i) {
        const auto& row = measured[static_cast<size_t>(i)];
        double load = load_for_distance(sc, row.distance);
        try {
            const PowerReport rep = simulate_distance(sc, row.distance, load);
            residuals[static_cast<size_t>(i)] =
                (rep.efficiency - row.efficiency) * 100.0;
        } catch (const std::exception&) {
            residuals[static_cast<size_t>(i)] = 1e3; // poisoned point
        }
    }
    return residuals;
}

double rms(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc / static_cast<double>(v.size()));
}

} // namespace

CalibrationResult calibrate(const Scenario& sc, const std::vector<MeasuredRow>& measured,
                            const std::vector<std::string>& free_params,
                            int max_evaluations) {
    if (measured.size() < 2) {
        throw std::invalid_argument("calibrate: need at least two measured rows");
    }
    if (free_params.size() > 4) {
        throw std::invalid_argument("calibrate: at most four free parameters");
    }
    std::vector<FreeParam> params;
    for (const auto& name : free_params) {
        const auto& known = known_params();
        auto it = std::find_if(known.begin(), known.end(),
                               [&](const FreeParam& p) { return p.name == name; });
        if (it == known.end()) {
            throw std::invalid_argument("calibrate: unknown parameter '" + name + "'");
        }
        if (std::find_if(params.begin(), params.end(), [&](const FreeParam& p) {
                return p.name == name;
            }) != params.end()) {
            throw std::invalid_argument("calibrate: duplicate parameter '" + name + "'");
        }
        params.push_back(*it);
    }

    CalibrationResult result;
    if (params.empty()) {
        result.residuals_pp = efficiency_residuals_pp(sc, measured);
        result.rms_error_pp = rms(result.residuals_pp);
        result.converged = true;
        result.evaluations = 1;
        return result;
    }

    auto objective = [&](const std::vector<double>& x) {
        Scenario trial = sc;
        for (size_t i = 0; i < params.size(); ++i) {
            if (x[i] < params[i].lo || x[i] > params[i].hi) return 1e6 + std::abs(x[i]);
            set_param(trial, params[i].name, x[i]);
        }
        return rms(efficiency_residuals_pp(trial, measured));
    };

    std::vector<double> x0;
    std::vector<double> steps;
    for (const auto& p : params) {
        double v = std::clamp(get_param(sc, p.name), p.lo, p.hi);
        x0.push_back(v);
        steps.push_back(std::min(0.5 * v, 0.25 * (p.hi - v)) + 1e-3);
    }

    SimplexOptions opts;
    opts.max_evaluations = max_evaluations;
    opts.f_tolerance = 1e-4;
    opts.x_tolerance = 1e-4;
    const SimplexResult fit = nelder_mead(objective, x0, steps, opts);

    Scenario fitted = sc;
    for (size_t i = 0; i < params.size(); ++i) {
        result.params.emplace_back(params[i].name, fit.x[i]);
        set_param(fitted, params[i].name, fit.x[i]);
    }
    result.residuals_pp = efficiency_residuals_pp(fitted, measured);
    result.rms_error_pp = rms(result.residuals_pp);
    result.converged = fit.converged;
    result.evaluations = fit.evaluations;
    return result;
}

Scenario apply_calibration(const Scenario& sc, const CalibrationResult& fit) {
    Scenario out = sc;
    for (const auto& [name, value] : fit.params) set_param(out, name, value);
    return out;
}

std::string calibration_to_config(const CalibrationResult& fit) {
    std::string tx;
    std::string rx;
    std::string circuit;
    std::string coupling;
    char buf[96];
    for (const auto& [name, value] : fit.params) {
        if (name == "tx.esr") {
            std::snprintf(buf, sizeof(buf), "esr = %.6gohm\n", value);
            tx += buf;
        } else if (name == "rx.esr") {
            std::snprintf(buf, sizeof(buf), "esr = %.6gohm\n", value);
            rx += buf;
        } else if (name == "diode_vf") {
            std::snprintf(buf, sizeof(buf), "diode_vf = %.6gV\n", value);
            circuit += buf;
        } else if (name == "k_scale") {
            std::snprintf(buf, sizeof(buf), "k_scale = %.6g\n", value);
            coupling += buf;
        }
    }
    std::string out = "# fitted parameters\n";
    if (!circuit.empty()) out += "[circuit]\n" + circuit;
    if (!tx.empty()) out += "[circuit.tx]\n" + tx;
    if (!rx.empty()) out += "[circuit.rx]\n" + rx;
    if (!coupling.empty()) out += "[coupling]\n" + coupling;
    return out;
}

} // namespace wpt
