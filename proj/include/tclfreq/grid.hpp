#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tclfreq {

enum class UnitType { Hydro, Gas, Thermal, Equivalent, Diesel, Compensator, Renewable, Hvdc };

struct UnitSpec {
    std::string name;
    UnitType type = UnitType::Thermal;
    double nominal_power_mw = 0.0;
    double minimal_power_mw = 0.0;
    double start_up_time_s = 0.0;          // 0 for static units
    double droop = 0.0;                    // 0 when the unit does not operate PFR
    double half_deadband_hz = 0.0;
    double rate_limit_pct_per_min = -1.0;  // < 0 means unconstrained
    double secondary_participation = 0.0;
    double operating_point_mw = 0.0;
    bool in_service = true;
};

bool is_synchronous(UnitType type);

struct GridConstants {
    double nominal_freq_hz = 50.0;
    double grid_nominal_power_mw = 0.0;   // sum over in-service synchronous units
    double grid_start_up_time_s = 0.0;    // power-weighted unit start-up times
    double regulating_energy_mw_per_hz = 0.0;  // droop gain sum, equals the ACE gain
    double secondary_time_constant_s = 110.0;
};

GridConstants compute_grid_constants(const std::vector<UnitSpec>& units,
                                     double nominal_freq_hz);

// First-order governor/turbine lag per unit type.
struct GovernorLags {
    double hydro_s = 6.0;
    double gas_s = 1.5;
    double thermal_s = 5.0;
    double equivalent_s = 5.0;
    double diesel_s = 1.0;
    double hvdc_s = 1.0;
    double of(UnitType t) const;
};

// Dead-band with offset: zero inside, proportional to the excess beyond the
// band outside, continuous across the boundary.
double deadband_offset(double delta_f_hz, double half_deadband_hz);

// Droop demand through the governor lag, clamped to the unit headroom.
// `lag_state_mw` is the unit's mechanical-power deviation and is advanced.
double primary_response(const UnitSpec& unit, double delta_f_hz, double& lag_state_mw,
                        double dt_s, double lag_s, double nominal_freq_hz);

struct SecondaryState {
    double level_mw = 0.0;                 // area regulation level
    std::vector<double> unit_output_mw;    // delivered per participating unit
};

// Integral area regulation: dL/dt = -K*df/T_N, clamped to the scenario
// reserves; distribution by participation factor with per-unit rate limits.
double secondary_step(SecondaryState& state, const GridConstants& consts,
                      const std::vector<UnitSpec>& units, double delta_f_hz, double dt_s,
                      double upward_reserve_mw, double downward_reserve_mw);

// Frequency-dependent load: P = P_ref * (1 + K_pf * filtered(df)/f_nom).
double load_response(double p_ref_mw, double delta_f_hz, double& filter_state_hz,
                     double k_pf, double tau_s, double dt_s, double nominal_freq_hz);

struct EventSpec {
    std::string description;
    double magnitude_mw = 0.0;   // + injects surplus (over-frequency), - deficit
    double time_s = 60.0;
};

double apply_event(const EventSpec& event, double t_s);

// Swing equation: d(df)/dt = f_nom/(T_a*P_nom) * (P_m - P_e).
double swing_step(double delta_f_hz, const GridConstants& consts, double p_m_total_mw,
                  double p_e_total_mw, double dt_s);

// Complete single-bus model: governors, secondary regulation and the
// frequency-dependent load corrections around a balanced operating point.
class GridModel {
public:
    GridModel(std::vector<UnitSpec> units, GridConstants consts, GovernorLags lags,
              double upward_reserve_mw, double downward_reserve_mw);

    struct Flows {
        double primary_mw = 0.0;
        double secondary_mw = 0.0;
        double load_damping_mw = 0.0;  // uncontrolled-load frequency response
        double imbalance_mw = 0.0;     // net accelerating power
    };

    // `external_mw` is the event injection; `tcl_deviation_mw` the
    // controllable-load deviation from its baseline (positive = extra load).
    Flows step(double external_mw, double tcl_deviation_mw, double uncontrolled_load_mw,
               double k_pf_uncontrolled, double tau_pf_s, double dt_s);

    double delta_f_hz() const { return delta_f_hz_; }
    const GridConstants& constants() const { return consts_; }
    const std::vector<UnitSpec>& units() const { return units_; }
    double governor_output_mw(std::size_t i) const { return governor_mw_[i]; }
    double secondary_level_mw() const { return secondary_.level_mw; }
    double load_filter_hz() const { return load_filter_hz_; }

    // Aborts with a state dump when the frequency runs away.
    void check_divergence(double t_s) const;

private:
    std::vector<UnitSpec> units_;
    GridConstants consts_;
    GovernorLags lags_;
    double up_reserve_mw_;
    double down_reserve_mw_;
    double delta_f_hz_ = 0.0;
    std::vector<double> governor_mw_;
    SecondaryState secondary_;
    double load_filter_hz_ = 0.0;
};

} // namespace tclfreq
