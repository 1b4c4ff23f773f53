#include "wpt/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wpt/errors.hpp"

namespace wpt {

namespace {

constexpr int k_channels = 9;

std::array<double, k_channels> channel_values(const TraceSample& s) {
    return {s.state.i1,    s.state.i2,   s.state.v_c1, s.state.v_c2, s.state.i_lin,
            s.state.i_lout, s.state.v_cmid, s.state.v_load, s.state.motor_speed};
}

// Linear interpolation of the state channels at time t.
std::array<double, k_channels> sample_at(const SimTrace& trace, double t) {
    const double x = t / trace.dt_out;
    const auto n = static_cast<long>(trace.samples.size());
    long i = static_cast<long>(std::floor(x));
    i = std::clamp<long>(i, 0, n - 2);
    const double f = std::clamp(x - static_cast<double>(i), 0.0, 1.0);
    const auto a = channel_values(trace.samples[static_cast<size_t>(i)]);
    const auto b = channel_values(trace.samples[static_cast<size_t>(i + 1)]);
    std::array<double, k_channels> out{};
    for (int c = 0; c < k_channels; ++c) out[c] = a[c] + f * (b[c] - a[c]);
    return out;
}

} // namespace

int detect_steady_state(const SimTrace& trace, double period, double tol) {
    if (trace.samples.size() < 2 || !(period > 0.0)) {
        throw std::invalid_argument("detect_steady_state: empty trace or bad period");
    }
    const double t_end = trace.samples.back().state.t;
    const int n_cycles = static_cast<int>(std::floor(t_end / period));
    if (n_cycles < 3) {
        throw std::invalid_argument("detect_steady_state: trace must span >= 3 periods");
    }

    std::array<double, k_channels> scale{};
    for (const auto& s : trace.samples) {
        const auto v = channel_values(s);
        for (int c = 0; c < k_channels; ++c) scale[c] = std::max(scale[c], std::abs(v[c]));
    }
    for (auto& v : scale) v = std::max(v, 1e-12);

    double residual = 0.0;
    for (int n = 1; n + 1 <= n_cycles; ++n) {
        const auto a = sample_at(trace, n * period);
        const auto b = sample_at(trace, (n + 1) * period);
        double diff2 = 0.0;
        double base2 = 0.0;
        for (int c = 0; c < k_channels; ++c) {
            const double d = (b[c] - a[c]) / scale[c];
            const double v = a[c] / scale[c];
            diff2 += d * d;
            base2 += v * v;
        }
        const double diff = std::sqrt(diff2);
        const double base = std::sqrt(base2);
        residual = base > 1e-12 ? diff / base : diff;
        if ((base <= 1e-12 && diff <= 1e-12) || (base > 1e-12 && diff / base < tol)) {
            return n;
        }
    }
    throw not_converged_error("detect_steady_state: no periodic fixed point", residual);
}

namespace {

// Trapezoidal mean of f(sample) over [t0, t1] with interpolated end points.
template <typename F>
double window_mean(const SimTrace& trace, double t0, double t1, F&& f) {
    const double dt = trace.dt_out;
    const auto n = static_cast<long>(trace.samples.size());
    auto value_at = [&](double t) {
        const double x = t / dt;
        long i = std::clamp<long>(static_cast<long>(std::floor(x)), 0, n - 2);
        const double fr = std::clamp(x - static_cast<double>(i), 0.0, 1.0);
        const double a = f(trace.samples[static_cast<size_t>(i)]);
        const double b = f(trace.samples[static_cast<size_t>(i + 1)]);
        return a + fr * (b - a);
    };
    const long i0 = static_cast<long>(std::ceil(t0 / dt - 1e-9));
    const long i1 = static_cast<long>(std::floor(t1 / dt + 1e-9));
    double acc = 0.0;
    double prev_t = t0;
    double prev_v = value_at(t0);
    for (long i = std::max<long>(i0, 0); i <= std::min<long>(i1, n - 1); ++i) {
        const double t = i * dt;
        if (t <= prev_t + 1e-15 * dt) continue;
        const double v = f(trace.samples[static_cast<size_t>(i)]);
        acc += 0.5 * (prev_v + v) * (t - prev_t);
        prev_t = t;
        prev_v = v;
    }
    if (t1 > prev_t) {
        const double v = value_at(t1);
        acc += 0.5 * (prev_v + v) * (t1 - prev_t);
    }
    return acc / (t1 - t0);
}

} // namespace

PowerReport cycle_metrics(const SimTrace& trace, const CycleWindow& window) {
    if (trace.samples.size() < 2) throw std::invalid_argument("cycle_metrics: empty trace");
    if (!(window.period > 0.0) || !(window.t_end > window.t_start)) {
        throw std::invalid_argument("cycle_metrics: bad window");
    }
    const double cycles = (window.t_end - window.t_start) / window.period;
    if (std::abs(cycles - std::round(cycles)) > 1e-6 * cycles) {
        throw std::invalid_argument("cycle_metrics: window must span whole cycles");
    }
    const double t_last = trace.samples.back().state.t;
    if (window.t_start < 0.0 || window.t_end > t_last + 1e-12) {
        throw std::invalid_argument("cycle_metrics: window outside trace");
    }

    PowerReport rep;
    const double t0 = window.t_start;
    const double t1 = window.t_end;
    rep.i_tx_rms = std::sqrt(
        window_mean(trace, t0, t1, [](const TraceSample& s) { return s.state.i1 * s.state.i1; }));
    rep.i_supply_avg =
        window_mean(trace, t0, t1, [](const TraceSample& s) { return s.i_supply; });
    rep.p_source = trace.v_supply * rep.i_supply_avg;
    rep.i_load = window_mean(trace, t0, t1, [](const TraceSample& s) { return s.i_load; });
    rep.v_load =
        window_mean(trace, t0, t1, [](const TraceSample& s) { return s.state.v_load; });
    rep.p_load = window_mean(
        trace, t0, t1, [](const TraceSample& s) { return s.state.v_load * s.i_load; });
    rep.efficiency = rep.p_source > 1e-15 ? std::max(rep.p_load, 0.0) / rep.p_source : 0.0;
    rep.f_lock = trace.controller.lock_frequency.value_or(0.0);
    return rep;
}

double harmonic_amplitude(std::span<const double> signal, double dt, double f_k) {
    const auto n = static_cast<long>(signal.size());
    double re = 0.0;
    double im = 0.0;
    const double w = 2.0 * std::numbers::pi * f_k * dt;
    for (long j = 0; j < n; ++j) {
        re += signal[static_cast<size_t>(j)] * std::cos(w * j);
        im -= signal[static_cast<size_t>(j)] * std::sin(w * j);
    }
    return 2.0 * std::hypot(re, im) / static_cast<double>(n);
}

double estimate_cycle_period(const SimTrace& trace, double fallback) {
    const auto n = trace.samples.size();
    if (n < 4) return fallback;
    double first = 0.0;
    double last = 0.0;
    int count = 0;
    for (size_t i = n / 2 + 1; i < n; ++i) {
        const double a = trace.samples[i - 1].state.i1;
        const double b = trace.samples[i].state.i1;
        if (a < 0.0 && b >= 0.0 && b != a) {
            const double ta = trace.samples[i - 1].state.t;
            const double tb = trace.samples[i].state.t;
            const double t_zc = ta - a * (tb - ta) / (b - a);
            if (count == 0) first = t_zc;
            last = t_zc;
            ++count;
        }
    }
    if (count < 2) return fallback;
    return (last - first) / static_cast<double>(count - 1);
}

std::vector<double> harmonic_ratios(std::span<const double> signal, double dt,
                                    double f0, int n_harmonics) {
    if (signal.size() < 4 || !(dt > 0.0) || !(f0 > 0.0) || n_harmonics < 1) {
        throw std::invalid_argument("harmonic_ratios: bad arguments");
    }
    const double span_periods = static_cast<double>(signal.size()) * dt * f0;
    if (std::abs(span_periods - std::round(span_periods)) > 1e-6 * span_periods ||
        span_periods < 0.5) {
        throw std::invalid_argument(
            "harmonic_ratios: signal must span an integer number of periods");
    }
    const double x1 = harmonic_amplitude(signal, dt, f0);
    if (!(x1 > 0.0)) throw std::invalid_argument("harmonic_ratios: zero fundamental");
    std::vector<double> out;
    out.reserve(static_cast<size_t>(n_harmonics));
    out.push_back(1.0);
    for (int k = 2; k <= n_harmonics; ++k) {
        out.push_back(harmonic_amplitude(signal, dt, k * f0) / x1);
    }
    return out;
}

PhasorSolution phasor_solve(const PhasorLink& link, double f) {
    if (!(f > 0.0)) throw std::domain_error("phasor_solve: f must be > 0");
    const double w = 2.0 * std::numbers::pi * f;
    using cd = std::complex<double>;
    const cd z1(link.r1, w * link.l1 - 1.0 / (w * link.c1));
    const cd z2(link.r2 + link.r_ac, w * link.l2 - 1.0 / (w * link.c2));
    const cd zm(0.0, w * link.m);
    const cd det = z1 * z2 - zm * zm; // = z1*z2 + w^2 M^2
    if (std::abs(det) < 1e-30) {
        throw std::domain_error("phasor_solve: singular mesh system");
    }
    PhasorSolution sol;
    const cd v1(link.v1, 0.0);
    sol.i1 = v1 * z2 / det;
    sol.i2 = v1 * zm / det;
    if (std::abs(sol.i1) < 1e-30) throw std::domain_error("phasor_solve: open Tx mesh");
    sol.z_in = v1 / sol.i1;
    const double p_in = 0.5 * std::real(v1 * std::conj(sol.i1));
    const double p_out = 0.5 * std::norm(sol.i2) * link.r_ac;
    sol.eta_ac = p_in > 0.0 ? p_out / p_in : 0.0;
    return sol;
}

double zero_phase_frequency(const PhasorLink& link, double f_lo, double f_hi) {
    if (!(f_lo > 0.0) || !(f_hi > f_lo)) {
        throw std::domain_error("zero_phase_frequency: bad bracket");
    }
    auto phase = [&](double f) { return std::imag(phasor_solve(link, f).z_in); };
    double a = f_lo;
    double b = f_hi;
    double fa = phase(a);
    double fb = phase(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) {
        throw std::domain_error("zero_phase_frequency: no sign change over bracket");
    }
    while ((b - a) > 1e-6 * a) {
        const double mid = 0.5 * (a + b);
        const double fm = phase(mid);
        if (fm == 0.0) return mid;
        if (fa * fm < 0.0) {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    return 0.5 * (a + b);
}

PhasorLink linearize(const LinkCircuit& cfg, double r_ac) {
    PhasorLink link;
    link.r1 = cfg.tx.esr + cfg.bridge_ron;
    link.l1 = cfg.tx.inductance;
    link.c1 = cfg.c1;
    link.r2 = cfg.rx.esr;
    link.l2 = cfg.rx.inductance;
    link.c2 = cfg.c2;
    link.m = cfg.m;
    link.r_ac = r_ac;
    link.v1 = (4.0 / std::numbers::pi) * cfg.v_supply;
    return link;
}

double rectifier_ac_load(double r_dc) {
    return (8.0 / (std::numbers::pi * std::numbers::pi)) * r_dc;
}

Regression linear_regression(std::span<const std::pair<double, double>> points) {
    const auto n = static_cast<double>(points.size());
    if (points.size() < 2) throw std::invalid_argument("linear_regression: need >= 2 points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : points) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) <= 1e-12 * std::max(1.0, n * sxx)) {
        throw std::invalid_argument("linear_regression: all x values coincide");
    }
    Regression r;
    r.slope = (n * sxy - sx * sy) / denom;
    r.intercept = (sy - r.slope * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0;
    const double y_mean = sy / n;
    for (const auto& [x, y] : points) {
        const double e = y - (r.slope * x + r.intercept);
        ss_res += e * e;
        ss_tot += (y - y_mean) * (y - y_mean);
    }
    r.r_squared = ss_tot > 0.0 ? std::max(0.0, 1.0 - ss_res / ss_tot) : 1.0;
    return r;
}

} // namespace wpt
