#include "tclfreq/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tclfreq {

FridgeParams reference_fridge_params() {
    return FridgeParams{};
}

BoilerParams reference_boiler_params() {
    return BoilerParams{};
}

namespace {

void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string("thermal: non-finite ") + what);
    }
}

} // namespace

std::array<double, 4> fridge_derivatives(const FridgeState& s, const FridgeParams& p,
                                         const AmbientInputs& ambient, int q) {
    const double ca = p.mass_a_kg * p.heat_a_j_per_kg_c;
    const double cb = p.mass_b_kg * p.heat_b_j_per_kg_c;
    const double cc = p.mass_c_kg * p.heat_c_j_per_kg_c;
    const double cd = p.mass_d_kg * p.heat_d_j_per_kg_c;
    const double te = ambient.room_temp_c;
    const double qp = static_cast<double>(q) * p.nominal_power_w;

    const double da = (-p.ua_ab_w_per_c * (s.t_a_c - s.t_b_c) -
                       p.ua_ac_w_per_c * (s.t_a_c - s.t_c_c) -
                       p.ua_ae_w_per_c * (s.t_a_c - te) - p.cop_fridge * qp) /
                      ca;
    const double db = (-p.ua_ab_w_per_c * (s.t_b_c - s.t_a_c) -
                       p.ua_bd_w_per_c * (s.t_b_c - s.t_d_c) -
                       p.ua_be_w_per_c * (s.t_b_c - te) - p.cop_freezer * qp) /
                      cb;
    const double dc = -p.ua_ac_w_per_c * (s.t_c_c - s.t_a_c) / cc;
    const double dd = -p.ua_bd_w_per_c * (s.t_d_c - s.t_b_c) / cd;
    return {da, db, dc, dd};
}

double boiler_derivative(const BoilerState& s, const BoilerParams& p,
                         const AmbientInputs& ambient, int q) {
    const double cap = p.water_heat_j_per_kg_c * p.volume_m3 * p.water_density_kg_per_m3;
    return -(s.t_h_c - ambient.room_temp_c) / (p.thermal_resistance_c_per_w * cap) -
           (ambient.draw_rate_m3_per_s / p.volume_m3) * (s.t_h_c - ambient.cold_water_temp_c) +
           p.efficiency * static_cast<double>(q) * p.nominal_power_w / cap;
}

FridgeState fridge_step(const FridgeState& state, const FridgeParams& p,
                        const AmbientInputs& ambient, int q_effective, double dt_s) {
    if (dt_s <= 0.0) {
        throw std::invalid_argument("fridge_step: dt must be positive");
    }
    check_finite(state.t_a_c, "fridge state");
    const auto d = fridge_derivatives(state, p, ambient, q_effective);
    FridgeState next = state;
    next.t_a_c += dt_s * d[0];
    next.t_b_c += dt_s * d[1];
    next.t_c_c += dt_s * d[2];
    next.t_d_c += dt_s * d[3];
    return next;
}

BoilerState boiler_step(const BoilerState& state, const BoilerParams& p,
                        const AmbientInputs& ambient, int q_effective, double dt_s) {
    if (dt_s <= 0.0) {
        throw std::invalid_argument("boiler_step: dt must be positive");
    }
    if (ambient.draw_rate_m3_per_s < 0.0) {
        throw std::invalid_argument("boiler_step: negative draw rate");
    }
    check_finite(state.t_h_c, "boiler state");
    BoilerState next = state;
    next.t_h_c += dt_s * boiler_derivative(state, p, ambient, q_effective);
    return next;
}

int thermostat_update(double control_temp_c, int q_prev, double setpoint_c,
                      double half_deadband_c, ThermostatMode mode) {
    const double hi = setpoint_c + half_deadband_c;
    const double lo = setpoint_c - half_deadband_c;
    if (mode == ThermostatMode::Cooling) {
        if (control_temp_c > hi) return 1;
        if (control_temp_c < lo) return 0;
    } else {
        if (control_temp_c < lo) return 1;
        if (control_temp_c > hi) return 0;
    }
    return q_prev;
}

FridgeSteady fridge_steady_duty(const FridgeParams& p, double room_temp_c) {
    // Cycle means: T_c -> T_a and T_d -> T_b (content nodes exchange no net
    // heat over a cycle), T_a -> setpoint. Remaining unknowns: T_b and duty D.
    //   a: ua_ab*(T_b - T_a) + ua_ae*(T_e - T_a) = cop_a * D * P
    //   b: ua_ab*(T_a - T_b) + ua_be*(T_e - T_b) = cop_b * D * P
    const double ta = p.setpoint_c;
    const double te = room_temp_c;
    const double a11 = p.ua_ab_w_per_c;
    const double a12 = -p.cop_fridge * p.nominal_power_w;
    const double r1 = p.ua_ab_w_per_c * ta - p.ua_ae_w_per_c * (te - ta);
    const double a21 = -(p.ua_ab_w_per_c + p.ua_be_w_per_c);
    const double a22 = -p.cop_freezer * p.nominal_power_w;
    const double r2 = -p.ua_ab_w_per_c * ta - p.ua_be_w_per_c * te;
    const double det = a11 * a22 - a12 * a21;
    FridgeSteady out;
    if (std::abs(det) < 1e-12) {
        return out;
    }
    out.mean_t_b_c = (r1 * a22 - a12 * r2) / det;
    out.duty = std::clamp((a11 * r2 - r1 * a21) / det, 0.0, 1.0);
    return out;
}

BoilerCycle boiler_steady_cycle(const BoilerParams& p, const AmbientInputs& ambient) {
    // dT/dt = -a*T + b_q with a = 1/(R*C) + w/V, exact exponentials between
    // the band edges give the cycle times.
    const double cap = p.water_heat_j_per_kg_c * p.volume_m3 * p.water_density_kg_per_m3;
    const double leak = 1.0 / (p.thermal_resistance_c_per_w * cap);
    const double draw = ambient.draw_rate_m3_per_s / p.volume_m3;
    const double a = leak + draw;
    const double b0 = leak * ambient.room_temp_c + draw * ambient.cold_water_temp_c;
    const double heat = p.efficiency * p.nominal_power_w / cap;

    BoilerCycle cyc;
    cyc.rate_per_s = a;
    cyc.eq_off_c = b0 / a;
    cyc.eq_on_c = (b0 + heat) / a;
    const double lo = p.setpoint_c - p.half_deadband_c;
    const double hi = p.setpoint_c + p.half_deadband_c;
    if (cyc.eq_on_c <= hi) {
        cyc.always_on = true;
        cyc.duty = 1.0;
        return cyc;
    }
    if (cyc.eq_off_c >= lo) {
        cyc.always_off = true;
        cyc.duty = 0.0;
        return cyc;
    }
    cyc.on_time_s = std::log((cyc.eq_on_c - lo) / (cyc.eq_on_c - hi)) / a;
    cyc.off_time_s = std::log((hi - cyc.eq_off_c) / (lo - cyc.eq_off_c)) / a;
    cyc.duty = cyc.on_time_s / (cyc.on_time_s + cyc.off_time_s);
    return cyc;
}

BoilerState boiler_state_at_phase(const BoilerParams& p, const AmbientInputs& /*ambient*/,
                                  const BoilerCycle& cycle, double phase01) {
    BoilerState s;
    const double lo = p.setpoint_c - p.half_deadband_c;
    const double hi = p.setpoint_c + p.half_deadband_c;
    if (cycle.always_on) {
        s.t_h_c = lo + phase01 * (hi - lo);
        s.thermostat_on = 1;
        return s;
    }
    if (cycle.always_off) {
        s.t_h_c = lo + phase01 * (hi - lo);
        s.thermostat_on = 0;
        return s;
    }
    const double period = cycle.on_time_s + cycle.off_time_s;
    const double t = phase01 * period;
    if (t < cycle.on_time_s) {
        s.thermostat_on = 1;
        s.t_h_c = cycle.eq_on_c - (cycle.eq_on_c - lo) * std::exp(-cycle.rate_per_s * t);
    } else {
        s.thermostat_on = 0;
        const double toff = t - cycle.on_time_s;
        s.t_h_c = cycle.eq_off_c + (hi - cycle.eq_off_c) * std::exp(-cycle.rate_per_s * toff);
    }
    return s;
}

} // namespace tclfreq
