#include "tclfreq/metrics.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace tclfreq {

namespace {

std::size_t index_at(double t_s, double dt_s) {
    return static_cast<std::size_t>(std::llround(t_s / dt_s));
}

double centered_rocof(const std::vector<double>& freq, double dt_s, std::size_t idx) {
    if (idx == 0 || idx + 1 >= freq.size()) {
        throw std::invalid_argument("compute_metrics: trace too short for RoCoF index");
    }
    return (freq[idx + 1] - freq[idx - 1]) / (2.0 * dt_s);
}

} // namespace

MetricSummary compute_metrics(const std::vector<double>& freq_hz, double dt_s,
                              double nominal_freq_hz, double event_time_s,
                              double event_magnitude_mw) {
    const std::size_t event_idx = index_at(event_time_s, dt_s);
    const std::size_t qss_begin = index_at(event_time_s + 20.0, dt_s);
    const std::size_t qss_end = index_at(event_time_s + 30.0, dt_s);
    if (qss_end >= freq_hz.size()) {
        throw std::invalid_argument("compute_metrics: trace must cover event + 30 s");
    }

    MetricSummary m;
    for (std::size_t i = event_idx; i < freq_hz.size(); ++i) {
        m.delta_f_max_hz = std::max(m.delta_f_max_hz, std::abs(freq_hz[i] - nominal_freq_hz));
    }

    double acc = 0.0;
    for (std::size_t i = qss_begin; i <= qss_end; ++i) {
        acc += freq_hz[i] - nominal_freq_hz;
    }
    m.quasi_steady_dev_hz = acc / static_cast<double>(qss_end - qss_begin + 1);

    m.rocof_100_hz_per_s = centered_rocof(freq_hz, dt_s, index_at(event_time_s + 0.1, dt_s));
    m.rocof_500_hz_per_s = centered_rocof(freq_hz, dt_s, index_at(event_time_s + 0.5, dt_s));

    if (event_magnitude_mw != 0.0 && m.quasi_steady_dev_hz != 0.0) {
        m.lambda_u_mw_per_hz = std::abs(event_magnitude_mw) / std::abs(m.quasi_steady_dev_hz);
    }
    return m;
}

PerformanceGains compute_gains(const MetricSummary& with_control,
                               const MetricSummary& baseline) {
    PerformanceGains g;
    if (baseline.delta_f_max_hz != 0.0) {
        g.k_delta_f_max_pct = 100.0 *
                              (baseline.delta_f_max_hz - with_control.delta_f_max_hz) /
                              baseline.delta_f_max_hz;
    }
    if (baseline.lambda_u_mw_per_hz != 0.0) {
        g.k_lambda_u_pct = 100.0 *
                           (with_control.lambda_u_mw_per_hz - baseline.lambda_u_mw_per_hz) /
                           baseline.lambda_u_mw_per_hz;
    }
    if (baseline.rocof_100_hz_per_s != 0.0) {
        g.k_rocof_100_pct = 100.0 *
                            (std::abs(baseline.rocof_100_hz_per_s) -
                             std::abs(with_control.rocof_100_hz_per_s)) /
                            std::abs(baseline.rocof_100_hz_per_s);
    }
    return g;
}

} // namespace tclfreq
