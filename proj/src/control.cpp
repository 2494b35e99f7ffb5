#include "tclfreq/control.hpp"

#include "tclfreq/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tclfreq {

std::vector<DeviceThresholds> assign_thresholds(std::size_t n, const ControlParams& params,
                                                std::uint64_t seed) {
    if (n == 0) {
        throw std::invalid_argument("assign_thresholds: need at least one device");
    }
    if (params.rocof_max_hz_per_s <= params.rocof_act_hz_per_s ||
        params.freq_max_hz <= params.freq_act_hz) {
        throw std::invalid_argument("assign_thresholds: degenerate threshold interval");
    }
    Rng rng(seed);
    std::vector<DeviceThresholds> out(n);
    for (auto& t : out) {
        const double u = rng.uniform01();
        t.rocof_threshold_hz_per_s =
            params.rocof_act_hz_per_s + u * (params.rocof_max_hz_per_s - params.rocof_act_hz_per_s);
        t.freq_threshold_hz =
            params.freq_act_hz + u * (params.freq_max_hz - params.freq_act_hz);
    }
    return out;
}

namespace {

int threshold_decision(int q_thermostat, double signal, double threshold, bool locked_out) {
    if (locked_out) return 0;
    if (q_thermostat == 0 && signal >= threshold) return 1;
    if (q_thermostat == 1 && signal <= -threshold) return -1;
    return 0;
}

} // namespace

int si_decision(int q_thermostat, double rocof_hz_per_s, const DeviceThresholds& thr,
                bool locked_out) {
    return threshold_decision(q_thermostat, rocof_hz_per_s, thr.rocof_threshold_hz_per_s,
                              locked_out);
}

int pfr_decision(int q_thermostat, double freq_dev_hz, const DeviceThresholds& thr,
                 bool locked_out) {
    return threshold_decision(q_thermostat, freq_dev_hz, thr.freq_threshold_hz, locked_out);
}

int combined_decision(int q_thermostat, double rocof_hz_per_s, double freq_dev_hz,
                      const DeviceThresholds& thr, double alpha, bool locked_out) {
    const double signal = alpha * freq_dev_hz + (1.0 - alpha) * rocof_hz_per_s;
    const double threshold =
        alpha * thr.freq_threshold_hz + (1.0 - alpha) * thr.rocof_threshold_hz_per_s;
    return threshold_decision(q_thermostat, signal, threshold, locked_out);
}

AlphaState alpha_schedule(const AlphaState& state, double /*rocof_hz_per_s*/,
                          double freq_dev_hz, const ControlParams& params, double dt_s) {
    AlphaState next = state;
    const bool outside = std::abs(freq_dev_hz) > params.freq_act_hz;

    if (outside) {
        next.quiet_time_s = 0.0;
    } else {
        next.quiet_time_s += dt_s;
        if (next.triggered && next.quiet_time_s >= params.alpha_reset_hold_s) {
            // Event over: drop back to the RoCoF input and re-arm.
            next.triggered = false;
            next.time_since_trigger_s = 0.0;
            next.alpha = 0.0;
            return next;
        }
    }

    if (!next.triggered) {
        if (outside) {
            next.triggered = true;
            next.time_since_trigger_s = 0.0;
        }
        return next;
    }

    next.time_since_trigger_s += dt_s;
    const double ramp_pos = (next.time_since_trigger_s - params.t_switch_s) / params.t_ramp_s;
    next.alpha = std::clamp(ramp_pos, 0.0, 1.0);
    return next;
}

bool security_lockout(double control_temp_c, double security_min_c, double security_max_c) {
    return control_temp_c < security_min_c || control_temp_c > security_max_c;
}

double predicted_power_delta(std::size_t n_on, std::size_t n_off, double device_nominal_w,
                             double signal, const ControlParams& params, ServiceKind kind) {
    const double act = (kind == ServiceKind::SI) ? params.rocof_act_hz_per_s : params.freq_act_hz;
    const double max = (kind == ServiceKind::SI) ? params.rocof_max_hz_per_s : params.freq_max_hz;
    const double range = max - act;
    const double mag = std::abs(signal);
    if (mag <= act) return 0.0;
    const double fraction = std::min((mag - act) / range, 1.0);
    if (signal > 0.0) {
        return static_cast<double>(n_off) * device_nominal_w * fraction;
    }
    return -static_cast<double>(n_on) * device_nominal_w * fraction;
}

} // namespace tclfreq
