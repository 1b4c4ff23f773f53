#include "wpt/controller.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "wpt/errors.hpp"

namespace wpt {

const char* to_string(ControllerMode mode) {
    switch (mode) {
        case ControllerMode::search: return "SEARCH";
        case ControllerMode::lock: return "LOCK";
        case ControllerMode::fault: return "FAULT";
    }
    return "?";
}

const char* to_string(FaultCode code) {
    switch (code) {
        case FaultCode::overtemp: return "OVERTEMP";
        case FaultCode::overpower: return "OVERPOWER";
        case FaultCode::freq_window: return "FREQ_WINDOW";
    }
    return "?";
}

void ControllerConfig::validate() const {
    std::vector<std::string> bad;
    if (!(f_lo < f_search && f_search < f_hi))
        bad.push_back("controller.f_search: need f_lo < f_search < f_hi");
    if (!(search_duty > 0.0) || search_duty > 1.0)
        bad.push_back("controller.search_duty: must lie in (0, 1]");
    if (!(p_max > 0.0)) bad.push_back("controller.p_max: must be > 0");
    if (!(detect_threshold > 0.0)) bad.push_back("controller.detect_threshold: must be > 0");
    if (!(thermal.r_th > 0.0) || !(thermal.c_th > 0.0))
        bad.push_back("controller.thermal: r_th and c_th must be > 0");
    if (!bad.empty()) throw validation_error(std::move(bad));
}

namespace {

int search_drive(const ControllerConfig& cfg, const ControllerState& st, double t) {
    // duty-limited polarity bursts at the fixed seek frequency
    const double phase = (t - st.t_origin) * cfg.f_search;
    const double cycle_pos = phase - std::floor(phase);
    const int polarity = cycle_pos < 0.5 ? 1 : -1;
    const double half_pos = cycle_pos < 0.5 ? 2.0 * cycle_pos : 2.0 * (cycle_pos - 0.5);
    return half_pos < cfg.search_duty ? polarity : 0;
}

} // namespace

std::pair<int, ControllerState> controller_step(const ControllerConfig& cfg,
                                                const ControllerState& st,
                                                const ControllerSample& sample) {
    ControllerState next = st;

    if (next.mode == ControllerMode::fault) {
        next.drive = 0;
        next.prev_t = sample.t;
        next.prev_i1 = sample.i1;
        next.have_prev = true;
        return {0, next};
    }

    // decaying peak tracker of |i1|, time constant two seek periods
    if (next.have_prev) {
        const double dt = sample.t - next.prev_t;
        next.amp_track *= std::exp(-dt * cfg.f_search / 2.0);
    }
    next.amp_track = std::max(next.amp_track, std::abs(sample.i1));

    if (next.mode == ControllerMode::search) {
        if (next.amp_track > cfg.detect_threshold) {
            next.mode = ControllerMode::lock;
            next.t_lock = sample.t;
            next.last_toggle = sample.t;
            next.last_up_crossing = 0.0;
            next.crossing_count = 0;
            next.period_estimate = 0.0;
            next.drive = sample.i1 >= 0.0 ? 1 : -1;
        } else {
            next.drive = search_drive(cfg, next, sample.t);
        }
    }

    if (next.mode == ControllerMode::lock) {
        // self-oscillate: toggle polarity at each tank-current zero crossing,
        // clamped to 0.8..1.2 times the allowed period window
        const double min_half = 0.4 / cfg.f_hi;
        const double max_half = 0.6 / cfg.f_lo;
        const bool crossed = next.have_prev &&
                             ((next.prev_i1 < 0.0 && sample.i1 >= 0.0) ||
                              (next.prev_i1 > 0.0 && sample.i1 <= 0.0));
        if (crossed) {
            const double di = sample.i1 - next.prev_i1;
            const double t_zc = di != 0.0
                                    ? next.prev_t - next.prev_i1 * (sample.t - next.prev_t) / di
                                    : sample.t;
            if (t_zc - next.last_toggle >= min_half) {
                next.drive = sample.i1 >= 0.0 ? 1 : -1;
                next.last_toggle = t_zc;
                next.last_zc_time = t_zc;
                if (next.prev_i1 < 0.0) { // upward crossing
                    if (next.crossing_count > 0) {
                        next.period_estimate = t_zc - next.last_up_crossing;
                    }
                    next.last_up_crossing = t_zc;
                    ++next.crossing_count;
                }
            }
        }
        if (sample.t - next.last_toggle > max_half) {
            next.drive = next.drive <= 0 ? 1 : -1;
            next.last_toggle = sample.t;
        }
    }

    next.prev_t = sample.t;
    next.prev_i1 = sample.i1;
    next.have_prev = true;
    return {next.drive, next};
}

std::optional<FaultCode> check_faults(const ControllerConfig& cfg, double p_tx,
                                      std::optional<double> f_lock, double board_temp) {
    if (board_temp > cfg.temp_max) return FaultCode::overtemp;
    if (p_tx > cfg.p_max) return FaultCode::overpower;
    if (f_lock && (*f_lock <= cfg.f_lo || *f_lock >= cfg.f_hi)) return FaultCode::freq_window;
    return std::nullopt;
}

double thermal_step(const ControllerConfig& cfg, double temp, double p_loss, double dt) {
    if (!(dt > 0.0)) throw std::domain_error("thermal_step: dt must be > 0");
    const auto& th = cfg.thermal;
    return temp + dt * ((th.t_ambient - temp) / (th.r_th * th.c_th) + p_loss / th.c_th);
}

ControllerState with_fault(ControllerState st, FaultCode code) {
    st.mode = ControllerMode::fault;
    st.fault_code = code;
    st.drive = 0;
    return st;
}

} // namespace wpt
