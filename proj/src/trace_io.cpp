#include "tclfreq/trace_io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace tclfreq {

namespace {

void append_number(std::string& line, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    line.append(buf, res.ptr);
}

} // namespace

void write_trace(const SimTrace& trace, const std::string& path, int decimation) {
    if (decimation < 0) {
        throw std::invalid_argument("write_trace: decimation must be >= 0");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("write_trace: cannot open '" + path + "'");
    }
    out << "time_s,freq_hz,rocof_hz_s,p_boilers_mw,p_fridges_mw,p_uncontrolled_mw,"
           "p_primary_mw,p_secondary_mw,alpha\n";

    const std::size_t n = trace.freq_hz.size();
    const std::size_t detail_end = static_cast<std::size_t>(
        std::llround((trace.event_time_s + 60.0) / trace.dt_s));
    const std::size_t coarse = static_cast<std::size_t>(std::llround(1.0 / trace.dt_s));

    std::string line;
    for (std::size_t k = 0; k < n; ++k) {
        if (decimation == 0) {
            if (k > detail_end && (k % coarse) != 0) continue;
        } else if (k % static_cast<std::size_t>(decimation) != 0) {
            continue;
        }
        line.clear();
        append_number(line, static_cast<double>(k) * trace.dt_s);
        line.push_back(',');
        append_number(line, trace.freq_hz[k]);
        line.push_back(',');
        append_number(line, trace.rocof_meas_hz_per_s[k]);
        line.push_back(',');
        append_number(line, trace.p_boilers_mw[k]);
        line.push_back(',');
        append_number(line, trace.p_fridges_mw[k]);
        line.push_back(',');
        append_number(line, trace.p_uncontrolled_mw[k]);
        line.push_back(',');
        append_number(line, trace.p_primary_mw[k]);
        line.push_back(',');
        append_number(line, trace.p_secondary_mw[k]);
        line.push_back(',');
        append_number(line, trace.alpha[k]);
        line.push_back('\n');
        out << line;
    }
    if (!out) {
        throw std::runtime_error("write_trace: failed writing '" + path + "'");
    }
}

std::string summary_to_json_text(const SimOutput& o, const PerformanceGains& gains,
                                 const RecoveryStats& recovery) {
    nlohmann::ordered_json j;
    j["scenario"] = o.scenario_id;
    j["event"] = {{"description", o.event_description},
                  {"magnitude_mw", o.event_magnitude_mw}};
    j["control_mode"] = control_mode_name(o.mode);
    j["seed"] = o.seed;
    j["population_scale"] = o.population_scale;
    j["metrics"] = {{"delta_f_max_hz", o.metrics.delta_f_max_hz},
                    {"lambda_u_mw_per_hz", o.metrics.lambda_u_mw_per_hz},
                    {"rocof_100_hz_per_s", o.metrics.rocof_100_hz_per_s},
                    {"rocof_500_hz_per_s", o.metrics.rocof_500_hz_per_s},
                    {"quasi_steady_dev_hz", o.metrics.quasi_steady_dev_hz}};
    j["gains_vs_no_control"] = {{"k_delta_f_max_pct", gains.k_delta_f_max_pct},
                                {"k_lambda_u_pct", gains.k_lambda_u_pct},
                                {"k_rocof_100_pct", gains.k_rocof_100_pct}};
    j["penetration"] = {{"rho", o.penetration.rho},
                        {"rho_nominal", o.penetration.rho_nominal},
                        {"c_p_over", o.penetration.over_coefficient},
                        {"c_p_under", o.penetration.under_coefficient}};
    j["scenario_crosscheck"] = {
        {"computed_start_up_time_s", o.crosscheck.computed_start_up_time_s},
        {"computed_nominal_power_mw", o.crosscheck.computed_nominal_power_mw},
        {"computed_regulating_energy_mw_per_hz", o.crosscheck.computed_regulating_energy},
        {"reference_start_up_time_s", o.crosscheck.ref_start_up_time_s},
        {"reference_nominal_power_mw", o.crosscheck.ref_nominal_power_mw},
        {"reference_regulating_energy_mw_per_hz", o.crosscheck.ref_regulating_energy},
        {"start_up_time_delta_s",
         o.crosscheck.computed_start_up_time_s - o.crosscheck.ref_start_up_time_s},
        {"regulating_energy_delta_mw_per_hz",
         o.crosscheck.computed_regulating_energy - o.crosscheck.ref_regulating_energy}};
    j["warmup"] = {{"fridge_target_mw", o.warmup.fridge_target_mw},
                   {"fridge_achieved_mw", o.warmup.fridge_achieved_mw},
                   {"boiler_target_mw", o.warmup.boiler_target_mw},
                   {"boiler_achieved_mw", o.warmup.boiler_achieved_mw},
                   {"fridge_room_temp_c", o.warmup.fridge_room_temp_c},
                   {"boiler_draw_scale", o.warmup.boiler_draw_scale}};
    j["comfort"] = {{"max_fridge_deviation_c", o.comfort.max_fridge_deviation_c},
                    {"max_boiler_deviation_c", o.comfort.max_boiler_deviation_c},
                    {"lockout_violations", o.comfort.lockout_violations}};
    j["recovery"] = {{"max_pre_event_hz", recovery.max_pre_event_hz},
                     {"max_tail_hz", recovery.max_tail_hz},
                     {"reenter_act_time_s", recovery.reenter_act_time_s},
                     {"max_after_reenter_hz", recovery.max_after_reenter_hz}};
    j["equivalent_gains_start"] = {{"m_si_off_pu", o.start_gains.m_si_off_pu},
                                   {"m_si_on_pu", o.start_gains.m_si_on_pu},
                                   {"k_pfr_off_pu", o.start_gains.k_pfr_off_pu},
                                   {"k_pfr_on_pu", o.start_gains.k_pfr_on_pu},
                                   {"droop_off_pu", o.start_gains.droop_off_pu},
                                   {"droop_on_pu", o.start_gains.droop_on_pu}};
    return j.dump(2) + "\n";
}

void write_summary(const SimOutput& output, const PerformanceGains& gains,
                   const RecoveryStats& recovery, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("write_summary: cannot open '" + path + "'");
    }
    out << summary_to_json_text(output, gains, recovery);
    if (!out) {
        throw std::runtime_error("write_summary: failed writing '" + path + "'");
    }
}

std::string run_file_stem(const SimOutput& output, bool over_event) {
    std::ostringstream name;
    name << output.scenario_id << '_' << (over_event ? "over" : "under") << '_'
         << control_mode_name(output.mode) << "_seed" << output.seed;
    if (output.population_scale != 1.0) {
        name << "_x" << output.population_scale;
    }
    return name.str();
}

} // namespace tclfreq
