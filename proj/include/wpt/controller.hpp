#pragma once

#include <optional>
#include <utility>

namespace wpt {

enum class ControllerMode { search, lock, fault };
enum class FaultCode { overtemp, overpower, freq_window };

const char* to_string(ControllerMode mode);
const char* to_string(FaultCode code);

// First-order board thermal model: one thermal resistance to ambient plus a
// lumped heat capacity.
struct ThermalModel {
    double r_th = 8.0;       // degC/W
    double c_th = 5.0;       // J/degC
    double t_ambient = 25.0; // degC
};

struct ControllerConfig {
    double f_search = 127e3;       // Hz, fixed startup excitation
    double search_duty = 0.1;      // fraction of each half-period driven while seeking
    double detect_threshold = 0.3; // A, tank-current amplitude that flags a receiver
    double f_lo = 119e3;           // Hz, allowed lock window
    double f_hi = 135e3;
    double p_max = 50.0;           // W, delivered-power fault threshold
    double temp_max = 60.0;        // degC
    ThermalModel thermal;

    void validate() const;
};

struct ControllerState {
    ControllerMode mode = ControllerMode::search;
    double last_zc_time = 0.0;
    double period_estimate = 0.0; // s, valid in lock once crossing_count >= 2
    double board_temp = 25.0;
    std::optional<FaultCode> fault_code;

    // bookkeeping across samples
    int drive = 0;
    double prev_t = 0.0;
    double prev_i1 = 0.0;
    bool have_prev = false;
    double amp_track = 0.0;
    double last_toggle = 0.0;
    double last_up_crossing = 0.0;
    int crossing_count = 0;
    double t_origin = 0.0;
    double t_lock = 0.0;

    bool lock_frequency_valid() const {
        return mode == ControllerMode::lock && crossing_count >= 4 && period_estimate > 0.0;
    }
    // Hz; call only when lock_frequency_valid()
    double lock_frequency() const { return 1.0 / period_estimate; }
};

struct ControllerSample {
    double t;        // s, strictly increasing across calls
    double i1;       // A, Tx tank current
    double v_switch; // V
    double p_tx;     // W, smoothed delivered-power estimate
};

// One controller update. Returns the drive polarity for the next step
// (-1, 0, +1) and the successor state. Faults are not raised here; they are
// state transitions applied by the caller via check_faults/with_fault.
std::pair<int, ControllerState> controller_step(const ControllerConfig& cfg,
                                                const ControllerState& st,
                                                const ControllerSample& sample);

// Fault monitors in priority order overtemp > overpower > freq_window.
// f_lock is supplied only while locked with a valid period estimate.
std::optional<FaultCode> check_faults(const ControllerConfig& cfg, double p_tx,
                                      std::optional<double> f_lock, double board_temp);

// temp' = temp + dt*((t_ambient - temp)/(r_th*c_th) + p_loss/c_th)
double thermal_step(const ControllerConfig& cfg, double temp, double p_loss, double dt);

// Latch a fault; from here on controller_step outputs drive 0.
ControllerState with_fault(ControllerState st, FaultCode code);

} // namespace wpt
