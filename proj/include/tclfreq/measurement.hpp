#pragma once

namespace tclfreq {

// Local frequency measurement pipeline: 20 ms sampling, first-order low-pass,
// RoCoF from consecutive filtered samples. One shared instance serves the
// whole population (all devices on the single bus see the same frequency).
struct MeasurementConfig {
    double sample_period_s = 0.02;
    double filter_time_constant_s = 0.1;
};

struct MeasurementState {
    double filtered_freq_hz = 50.0;
    double prev_filtered_freq_hz = 50.0;
    double rocof_hz_per_s = 0.0;
};

MeasurementState make_measurement_state(double nominal_freq_hz);

// Advances the filter by one sample. Exact zero-order-hold discretization of
// dx/dt = (u - x)/T, so a constant input is a fixed point to the last bit.
MeasurementState filter_step(double raw_freq_hz, const MeasurementState& state,
                             const MeasurementConfig& cfg);

double measure_rocof(const MeasurementState& state, const MeasurementConfig& cfg);

} // namespace tclfreq
