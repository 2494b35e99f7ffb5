#include "tclfreq/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tclfreq {

bool is_synchronous(UnitType type) {
    switch (type) {
        case UnitType::Hydro:
        case UnitType::Gas:
        case UnitType::Thermal:
        case UnitType::Equivalent:
        case UnitType::Diesel:
        case UnitType::Compensator:
            return true;
        case UnitType::Renewable:
        case UnitType::Hvdc:
            return false;
    }
    return false;
}

GridConstants compute_grid_constants(const std::vector<UnitSpec>& units,
                                     double nominal_freq_hz) {
    GridConstants c;
    c.nominal_freq_hz = nominal_freq_hz;
    double weighted_startup = 0.0;
    for (const auto& u : units) {
        if (!u.in_service) continue;
        if (is_synchronous(u.type)) {
            c.grid_nominal_power_mw += u.nominal_power_mw;
            weighted_startup += u.start_up_time_s * u.nominal_power_mw;
        }
        if (u.droop > 0.0) {
            c.regulating_energy_mw_per_hz += u.nominal_power_mw / (nominal_freq_hz * u.droop);
        }
    }
    if (c.grid_nominal_power_mw <= 0.0) {
        throw std::invalid_argument("compute_grid_constants: no in-service synchronous unit");
    }
    c.grid_start_up_time_s = weighted_startup / c.grid_nominal_power_mw;
    return c;
}

double GovernorLags::of(UnitType t) const {
    switch (t) {
        case UnitType::Hydro: return hydro_s;
        case UnitType::Gas: return gas_s;
        case UnitType::Thermal: return thermal_s;
        case UnitType::Equivalent: return equivalent_s;
        case UnitType::Diesel: return diesel_s;
        case UnitType::Hvdc: return hvdc_s;
        case UnitType::Compensator:
        case UnitType::Renewable: return 1.0;
    }
    return 1.0;
}

double deadband_offset(double delta_f_hz, double half_deadband_hz) {
    const double mag = std::abs(delta_f_hz) - half_deadband_hz;
    if (mag <= 0.0) return 0.0;
    return std::copysign(mag, delta_f_hz);
}

double primary_response(const UnitSpec& unit, double delta_f_hz, double& lag_state_mw,
                        double dt_s, double lag_s, double nominal_freq_hz) {
    const double gain = unit.nominal_power_mw / (nominal_freq_hz * unit.droop);
    const double requested = -gain * deadband_offset(delta_f_hz, unit.half_deadband_hz);
    lag_state_mw += dt_s * (requested - lag_state_mw) / lag_s;
    const double lo = unit.minimal_power_mw - unit.operating_point_mw;
    const double hi = unit.nominal_power_mw - unit.operating_point_mw;
    lag_state_mw = std::clamp(lag_state_mw, lo, hi);
    return lag_state_mw;
}

double secondary_step(SecondaryState& state, const GridConstants& consts,
                      const std::vector<UnitSpec>& units, double delta_f_hz, double dt_s,
                      double upward_reserve_mw, double downward_reserve_mw) {
    if (state.unit_output_mw.size() != units.size()) {
        state.unit_output_mw.assign(units.size(), 0.0);
    }
    state.level_mw += dt_s * (-consts.regulating_energy_mw_per_hz * delta_f_hz /
                              consts.secondary_time_constant_s);
    state.level_mw = std::clamp(state.level_mw, -downward_reserve_mw, upward_reserve_mw);

    double total = 0.0;
    for (std::size_t i = 0; i < units.size(); ++i) {
        const auto& u = units[i];
        if (!u.in_service || u.secondary_participation <= 0.0) continue;
        const double target = u.secondary_participation * state.level_mw;
        double& out = state.unit_output_mw[i];
        if (u.rate_limit_pct_per_min >= 0.0) {
            const double max_step =
                dt_s * u.rate_limit_pct_per_min / 100.0 * u.nominal_power_mw / 60.0;
            out += std::clamp(target - out, -max_step, max_step);
        } else {
            out = target;
        }
        total += out;
    }
    return total;
}

double load_response(double p_ref_mw, double delta_f_hz, double& filter_state_hz,
                     double k_pf, double tau_s, double dt_s, double nominal_freq_hz) {
    if (tau_s <= 0.0) {
        throw std::invalid_argument("load_response: filter time constant must be positive");
    }
    filter_state_hz += dt_s * (delta_f_hz - filter_state_hz) / tau_s;
    return p_ref_mw * (1.0 + k_pf * filter_state_hz / nominal_freq_hz);
}

double apply_event(const EventSpec& event, double t_s) {
    return t_s >= event.time_s ? event.magnitude_mw : 0.0;
}

double swing_step(double delta_f_hz, const GridConstants& consts, double p_m_total_mw,
                  double p_e_total_mw, double dt_s) {
    return delta_f_hz + dt_s * consts.nominal_freq_hz *
                            (p_m_total_mw - p_e_total_mw) /
                            (consts.grid_start_up_time_s * consts.grid_nominal_power_mw);
}

GridModel::GridModel(std::vector<UnitSpec> units, GridConstants consts, GovernorLags lags,
                     double upward_reserve_mw, double downward_reserve_mw)
    : units_(std::move(units)),
      consts_(consts),
      lags_(lags),
      up_reserve_mw_(upward_reserve_mw),
      down_reserve_mw_(downward_reserve_mw),
      governor_mw_(units_.size(), 0.0) {
    secondary_.unit_output_mw.assign(units_.size(), 0.0);
}

GridModel::Flows GridModel::step(double external_mw, double tcl_deviation_mw,
                                 double uncontrolled_load_mw, double k_pf_uncontrolled,
                                 double tau_pf_s, double dt_s) {
    Flows flows;

    for (std::size_t i = 0; i < units_.size(); ++i) {
        const auto& u = units_[i];
        if (!u.in_service || u.droop <= 0.0) continue;
        flows.primary_mw += primary_response(u, delta_f_hz_, governor_mw_[i], dt_s,
                                             lags_.of(u.type), consts_.nominal_freq_hz);
    }

    flows.secondary_mw = secondary_step(secondary_, consts_, units_, delta_f_hz_, dt_s,
                                        up_reserve_mw_, down_reserve_mw_);

    const double load_now =
        load_response(uncontrolled_load_mw, delta_f_hz_, load_filter_hz_, k_pf_uncontrolled,
                      tau_pf_s, dt_s, consts_.nominal_freq_hz);
    flows.load_damping_mw = load_now - uncontrolled_load_mw;

    flows.imbalance_mw = external_mw + flows.primary_mw + flows.secondary_mw -
                         flows.load_damping_mw - tcl_deviation_mw;
    delta_f_hz_ = swing_step(delta_f_hz_, consts_, flows.imbalance_mw, 0.0, dt_s);
    return flows;
}

void GridModel::check_divergence(double t_s) const {
    if (std::abs(delta_f_hz_) <= 5.0 && std::isfinite(delta_f_hz_)) return;
    std::ostringstream msg;
    msg << "grid: frequency diverged at t=" << t_s << " s, df=" << delta_f_hz_
        << " Hz, secondary level=" << secondary_.level_mw << " MW, governor outputs:";
    for (std::size_t i = 0; i < units_.size(); ++i) {
        if (units_[i].in_service && units_[i].droop > 0.0) {
            msg << ' ' << units_[i].name << '=' << governor_mw_[i];
        }
    }
    throw std::runtime_error(msg.str());
}

} // namespace tclfreq
