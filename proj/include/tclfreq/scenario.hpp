#pragma once

#include "tclfreq/control.hpp"
#include "tclfreq/grid.hpp"
#include "tclfreq/measurement.hpp"
#include "tclfreq/metrics.hpp"
#include "tclfreq/population.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace tclfreq {

struct Scenario {
    std::string id;
    std::string label;
    double outdoor_temp_c = 20.0;
    int hour = 12;

    std::vector<UnitSpec> units;
    double uncontrolled_load_mw = 0.0;     // not-controllable load on the island
    double controllable_target_mw = 0.0;   // aggregate operating point to calibrate to
    double corse_load_mw = 0.0;
    double upward_reserve_mw = 0.0;
    double downward_reserve_mw = 0.0;

    // Reference grid parameters for cross-checking the computed constants.
    double ref_start_up_time_s = 0.0;
    double ref_nominal_power_mw = 0.0;
    double ref_regulating_energy_mw_per_hz = 0.0;
    double ref_c_p_over_pct = 0.0;
    double ref_c_p_under_pct = 0.0;

    double fridge_nominal_mw = 85.0;
    double boiler_nominal_mw = 356.0;
    std::size_t sample_count = 1000;
    double dispersion = 0.10;
    double boiler_water_heat_j_per_kg_c = 4186.0;

    double k_pf_uncontrolled = 1.5;
    double k_pf_fridge = 0.35;
    double k_pf_boiler = 0.0;
    double tau_pf_s = 5.0;

    double nominal_freq_hz = 50.0;
    GovernorLags lags;
    MeasurementConfig measurement;
    ControlParams boiler_control;
    ControlParams fridge_control;
    EventSpec over_event;
    EventSpec under_event;
};

std::vector<std::string> preset_ids();
Scenario preset_scenario(const std::string& id);

// Loads a preset by id or a JSON config file (optionally derived from a
// preset via "base"), then validates it.
Scenario load_scenario(const std::string& id_or_path);
Scenario scenario_from_json_text(const std::string& text);

// Pre-event power balance residual (generation + imports - loads), MW.
double balance_residual_mw(const Scenario& scenario);
void validate_scenario(const Scenario& scenario);

struct SimulationPlan {
    Scenario scenario;
    EventSpec event;
    ControlMode mode = ControlMode::None;
    double duration_s = 1800.0;
    double dt_s = 0.02;
    std::uint64_t seed = 1;
    double population_scale = 1.0;
    bool keep_trace = true;
};

struct SimTrace {
    double dt_s = 0.02;
    double event_time_s = 60.0;
    std::vector<double> freq_hz;
    std::vector<double> rocof_meas_hz_per_s;
    std::vector<double> p_boilers_mw;
    std::vector<double> p_fridges_mw;
    std::vector<double> p_uncontrolled_mw;
    std::vector<double> p_primary_mw;
    std::vector<double> p_secondary_mw;
    std::vector<double> alpha;
};

struct WarmupReport {
    double fridge_target_mw = 0.0;
    double boiler_target_mw = 0.0;
    double fridge_achieved_mw = 0.0;
    double boiler_achieved_mw = 0.0;
    double fridge_room_temp_c = 0.0;
    double boiler_draw_scale = 0.0;
};

struct CrossCheck {
    double computed_start_up_time_s = 0.0;
    double computed_nominal_power_mw = 0.0;
    double computed_regulating_energy = 0.0;
    double ref_start_up_time_s = 0.0;
    double ref_nominal_power_mw = 0.0;
    double ref_regulating_energy = 0.0;
};

struct ComfortStats {
    double max_fridge_deviation_c = 0.0;   // vs the no-control trajectory
    double max_boiler_deviation_c = 0.0;
    long lockout_violations = 0;           // forced while outside the security band
};

struct RecoveryStats {
    double max_pre_event_hz = 0.0;         // |df| before the event
    double max_tail_hz = 0.0;              // |df| from event + 20 min onward
    double reenter_act_time_s = -1.0;      // sustained re-entry into the activation band
    double max_after_reenter_hz = 0.0;     // |df| after re-entry (payback excursions)
};

struct SimOutput {
    std::string scenario_id;
    std::string event_description;
    double event_magnitude_mw = 0.0;
    ControlMode mode = ControlMode::None;
    std::uint64_t seed = 1;
    double population_scale = 1.0;

    SimTrace trace;
    MetricSummary metrics;
    WarmupReport warmup;
    PenetrationReport penetration;
    CrossCheck crosscheck;
    ComfortStats comfort;
    RecoveryStats recovery;
    EquivalentGains start_gains;   // boiler aggregate at t = 0
};

// Warm populations are deterministic per (scenario, seed, scale); the cache
// lets matrix/sweep runs share the calibration work.
struct WarmPopulations {
    DevicePopulation fridges;
    DevicePopulation boilers;
    AmbientInputs fridge_ambient;
    AmbientInputs boiler_ambient;
    WarmupReport report;
};

class WarmupCache {
public:
    const WarmPopulations& get(const Scenario& scenario, std::uint64_t seed, double scale);

private:
    std::map<std::string, WarmPopulations> entries_;
};

WarmPopulations prepare_populations(const Scenario& scenario, std::uint64_t seed,
                                    double scale);

SimOutput run_simulation(const SimulationPlan& plan);
SimOutput run_simulation(const SimulationPlan& plan, const WarmPopulations& warm);

RecoveryStats compute_recovery_stats(const SimTrace& trace, double nominal_freq_hz,
                                     double activation_hz);

const char* control_mode_name(ControlMode mode);
ControlMode control_mode_from_name(const std::string& name);

struct MatrixRow {
    SimOutput output;                  // trace dropped unless requested
    PerformanceGains gains;            // vs the no-control run of the same event
};

// Full simulation matrix: every scenario, both events, all four modes.
// `sink`, when set, receives each completed run (with trace) on the worker
// thread before the trace is dropped; rows come back in a fixed order.
std::vector<MatrixRow> run_matrix(std::uint64_t seed, int jobs, bool keep_traces,
                                  const std::function<void(const SimOutput&)>& sink = {});

struct SweepRow {
    std::string scenario_id;
    std::string polarity;              // "over" | "under"
    double factor = 1.0;
    PenetrationReport penetration;
    MetricSummary baseline;
    MetricSummary with_control;
    PerformanceGains gains;
};

std::vector<SweepRow> run_penetration_sweep(const std::vector<std::string>& scenario_ids,
                                            const std::vector<double>& factors,
                                            std::uint64_t seed, int jobs,
                                            const std::function<void(const SimOutput&)>& sink = {});

} // namespace tclfreq
