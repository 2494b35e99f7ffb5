#pragma once

#include <vector>

namespace tclfreq {

struct MetricSummary {
    double delta_f_max_hz = 0.0;
    double lambda_u_mw_per_hz = 0.0;
    double rocof_100_hz_per_s = 0.0;
    double rocof_500_hz_per_s = 0.0;
    double quasi_steady_dev_hz = 0.0;
};

struct PerformanceGains {
    double k_delta_f_max_pct = 0.0;
    double k_lambda_u_pct = 0.0;
    double k_rocof_100_pct = 0.0;
};

// Evaluation indices from a bus-frequency trace sampled at fixed dt. RoCoF
// indices use centered differences of the true frequency one sample around
// the 100 ms / 500 ms marks; the quasi-steady deviation is the mean over
// [event+20 s, event+30 s].
MetricSummary compute_metrics(const std::vector<double>& freq_hz, double dt_s,
                              double nominal_freq_hz, double event_time_s,
                              double event_magnitude_mw);

PerformanceGains compute_gains(const MetricSummary& with_control,
                               const MetricSummary& baseline);

} // namespace tclfreq
