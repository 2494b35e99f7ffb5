#include "tclfreq/measurement.hpp"

#include <cmath>
#include <stdexcept>

namespace tclfreq {

MeasurementState make_measurement_state(double nominal_freq_hz) {
    MeasurementState s;
    s.filtered_freq_hz = nominal_freq_hz;
    s.prev_filtered_freq_hz = nominal_freq_hz;
    s.rocof_hz_per_s = 0.0;
    return s;
}

MeasurementState filter_step(double raw_freq_hz, const MeasurementState& state,
                             const MeasurementConfig& cfg) {
    if (!std::isfinite(raw_freq_hz)) {
        throw std::invalid_argument("filter_step: raw frequency is not finite");
    }
    if (cfg.sample_period_s <= 0.0 || cfg.filter_time_constant_s <= 0.0) {
        throw std::invalid_argument("filter_step: invalid measurement config");
    }
    const double decay = std::exp(-cfg.sample_period_s / cfg.filter_time_constant_s);
    MeasurementState next;
    next.prev_filtered_freq_hz = state.filtered_freq_hz;
    next.filtered_freq_hz =
        state.filtered_freq_hz + (1.0 - decay) * (raw_freq_hz - state.filtered_freq_hz);
    next.rocof_hz_per_s =
        (next.filtered_freq_hz - next.prev_filtered_freq_hz) / cfg.sample_period_s;
    return next;
}

double measure_rocof(const MeasurementState& state, const MeasurementConfig& cfg) {
    return (state.filtered_freq_hz - state.prev_filtered_freq_hz) / cfg.sample_period_s;
}

} // namespace tclfreq
