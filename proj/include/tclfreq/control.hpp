#pragma once

#include <cstdint>
#include <vector>

namespace tclfreq {

enum class ControlMode { None, SI, PFR, SIPFR };

struct ControlParams {
    ControlMode mode = ControlMode::None;
    double rocof_act_hz_per_s = 0.05;   // Df_act
    double rocof_max_hz_per_s = 0.8;    // Df_max (upper threshold bound)
    double freq_act_hz = 0.05;          // df_act
    double freq_max_hz = 0.8;           // df_max
    double t_switch_s = 0.0;            // hold before the alpha ramp starts
    double t_ramp_s = 1.0;              // ramp duration to alpha = 1
    double alpha_reset_hold_s = 10.0;   // quiet time inside the band before reset
};

// Per-device activation thresholds. Both are drawn from one shared quantile
// so the blended threshold of the combined mode stays uniformly distributed.
struct DeviceThresholds {
    double rocof_threshold_hz_per_s = 0.0;
    double freq_threshold_hz = 0.0;
};

// Shared ramp coefficient for the combined SI-PFR mode. All devices see the
// same measurements, so one schedule serves the population.
struct AlphaState {
    double alpha = 0.0;
    bool triggered = false;
    double time_since_trigger_s = 0.0;
    double quiet_time_s = 0.0;
};

std::vector<DeviceThresholds> assign_thresholds(std::size_t n, const ControlParams& params,
                                                std::uint64_t seed);

// Forced-switch decisions. Return value is -1 (force off), 0, or +1 (force on);
// composition with the thermostat state q_T always lands in {0, 1}.
int si_decision(int q_thermostat, double rocof_hz_per_s, const DeviceThresholds& thr,
                bool locked_out);

int pfr_decision(int q_thermostat, double freq_dev_hz, const DeviceThresholds& thr,
                 bool locked_out);

int combined_decision(int q_thermostat, double rocof_hz_per_s, double freq_dev_hz,
                      const DeviceThresholds& thr, double alpha, bool locked_out);

AlphaState alpha_schedule(const AlphaState& state, double rocof_hz_per_s, double freq_dev_hz,
                          const ControlParams& params, double dt_s);

bool security_lockout(double control_temp_c, double security_min_c, double security_max_c);

enum class ServiceKind { SI, PFR };

// Analytic expected aggregate power change for a forced signal level,
// piecewise linear with the activation dead-band and saturating when the
// whole off- (or on-) population has switched.
double predicted_power_delta(std::size_t n_on, std::size_t n_off, double device_nominal_w,
                             double signal, const ControlParams& params, ServiceKind kind);

} // namespace tclfreq
