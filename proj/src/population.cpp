#include "tclfreq/population.hpp"

#include "tclfreq/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tclfreq {

namespace {

constexpr std::uint64_t kThresholdStream = 101;
constexpr std::uint64_t kParamStream = 102;
constexpr std::uint64_t kStateStream = 103;
constexpr std::uint64_t kPhaseStream = 104;

} // namespace

std::size_t DevicePopulation::count_on() const {
    std::size_t n = 0;
    if (cls == DeviceClass::Fridge) {
        for (const auto& s : fridge_states) n += static_cast<std::size_t>(s.thermostat_on);
    } else {
        for (const auto& s : boiler_states) n += static_cast<std::size_t>(s.thermostat_on);
    }
    return n;
}

double DevicePopulation::control_temp(std::size_t i) const {
    return cls == DeviceClass::Fridge ? fridge_states[i].t_a_c : boiler_states[i].t_h_c;
}

int DevicePopulation::effective_q(std::size_t i) const {
    const int qt = cls == DeviceClass::Fridge ? fridge_states[i].thermostat_on
                                              : boiler_states[i].thermostat_on;
    return qt + q_force[i];
}

namespace {

double perturb(Rng& rng, double value, double sigma) {
    if (sigma == 0.0) return value;
    for (int attempt = 0; attempt < 8; ++attempt) {
        const double g = std::clamp(rng.gaussian(), -3.0, 3.0);
        const double v = value * (1.0 + sigma * g);
        if (v > 0.0) return v;
    }
    throw std::runtime_error("build_population: perturbed parameter stayed non-positive");
}

void validate_spec(const PopulationSpec& spec) {
    if (spec.sample_count < 1) {
        throw std::invalid_argument("build_population: sample_count must be >= 1");
    }
    if (spec.dispersion < 0.0 || spec.dispersion >= 1.0) {
        throw std::invalid_argument("build_population: dispersion must be in [0, 1)");
    }
    if (spec.aggregate_nominal_mw <= 0.0) {
        throw std::invalid_argument("build_population: aggregate nominal power must be positive");
    }
}

void init_common(DevicePopulation& pop, const PopulationSpec& spec,
                 const ControlParams& control) {
    pop.spec = spec;
    pop.control = control;
    pop.device_weight_mw = spec.aggregate_nominal_mw / static_cast<double>(spec.sample_count);
    pop.thresholds =
        assign_thresholds(spec.sample_count, control, derive_seed(spec.seed, kThresholdStream));
    pop.q_force.assign(spec.sample_count, 0);
    pop.locked.assign(spec.sample_count, 0);
}

DevicePopulation::FridgeCoef fridge_coefficients(const FridgeParams& p) {
    const double inv_ca = 1.0 / (p.mass_a_kg * p.heat_a_j_per_kg_c);
    const double inv_cb = 1.0 / (p.mass_b_kg * p.heat_b_j_per_kg_c);
    const double inv_cc = 1.0 / (p.mass_c_kg * p.heat_c_j_per_kg_c);
    const double inv_cd = 1.0 / (p.mass_d_kg * p.heat_d_j_per_kg_c);
    return DevicePopulation::FridgeCoef{
        p.ua_ab_w_per_c * inv_ca, p.ua_ac_w_per_c * inv_ca, p.ua_ae_w_per_c * inv_ca,
        p.cop_fridge * p.nominal_power_w * inv_ca,
        p.ua_ab_w_per_c * inv_cb, p.ua_bd_w_per_c * inv_cb, p.ua_be_w_per_c * inv_cb,
        p.cop_freezer * p.nominal_power_w * inv_cb,
        p.ua_ac_w_per_c * inv_cc, p.ua_bd_w_per_c * inv_cd};
}

DevicePopulation::BoilerCoef boiler_coefficients(const BoilerParams& p) {
    const double cap = p.water_heat_j_per_kg_c * p.volume_m3 * p.water_density_kg_per_m3;
    return DevicePopulation::BoilerCoef{1.0 / (p.thermal_resistance_c_per_w * cap),
                                        1.0 / p.volume_m3,
                                        p.efficiency * p.nominal_power_w / cap};
}

} // namespace

DevicePopulation build_population(const PopulationSpec& spec, const FridgeParams& reference,
                                  const ControlParams& control) {
    validate_spec(spec);
    DevicePopulation pop;
    pop.cls = DeviceClass::Fridge;
    init_common(pop, spec, control);

    Rng rng(derive_seed(spec.seed, kParamStream));
    Rng state_rng(derive_seed(spec.seed, kStateStream));
    pop.fridge_params.reserve(spec.sample_count);
    pop.fridge_states.reserve(spec.sample_count);
    pop.fridge_coef.reserve(spec.sample_count);
    const double s = spec.dispersion;
    for (std::size_t i = 0; i < spec.sample_count; ++i) {
        FridgeParams p = reference;
        p.mass_a_kg = perturb(rng, reference.mass_a_kg, s);
        p.mass_b_kg = perturb(rng, reference.mass_b_kg, s);
        p.mass_c_kg = perturb(rng, reference.mass_c_kg, s);
        p.mass_d_kg = perturb(rng, reference.mass_d_kg, s);
        p.heat_a_j_per_kg_c = perturb(rng, reference.heat_a_j_per_kg_c, s);
        p.heat_b_j_per_kg_c = perturb(rng, reference.heat_b_j_per_kg_c, s);
        p.heat_c_j_per_kg_c = perturb(rng, reference.heat_c_j_per_kg_c, s);
        p.heat_d_j_per_kg_c = perturb(rng, reference.heat_d_j_per_kg_c, s);
        p.ua_ab_w_per_c = perturb(rng, reference.ua_ab_w_per_c, s);
        p.ua_ac_w_per_c = perturb(rng, reference.ua_ac_w_per_c, s);
        p.ua_ae_w_per_c = perturb(rng, reference.ua_ae_w_per_c, s);
        p.ua_bd_w_per_c = perturb(rng, reference.ua_bd_w_per_c, s);
        p.ua_be_w_per_c = perturb(rng, reference.ua_be_w_per_c, s);
        p.cop_fridge = perturb(rng, reference.cop_fridge, s);
        p.cop_freezer = perturb(rng, reference.cop_freezer, s);
        p.nominal_power_w = perturb(rng, reference.nominal_power_w, s);
        p.half_deadband_c = perturb(rng, reference.half_deadband_c, s);
        pop.fridge_params.push_back(p);
        pop.fridge_coef.push_back(fridge_coefficients(p));

        FridgeState st;
        st.t_a_c = state_rng.uniform(p.setpoint_c - p.half_deadband_c,
                                     p.setpoint_c + p.half_deadband_c);
        st.t_b_c = st.t_a_c - 2.0;
        st.t_c_c = st.t_a_c;
        st.t_d_c = st.t_b_c;
        st.thermostat_on = 0;
        pop.fridge_states.push_back(st);
    }
    return pop;
}

DevicePopulation build_population(const PopulationSpec& spec, const BoilerParams& reference,
                                  const ControlParams& control) {
    validate_spec(spec);
    DevicePopulation pop;
    pop.cls = DeviceClass::Boiler;
    init_common(pop, spec, control);

    Rng rng(derive_seed(spec.seed, kParamStream));
    Rng state_rng(derive_seed(spec.seed, kStateStream));
    pop.boiler_params.reserve(spec.sample_count);
    pop.boiler_states.reserve(spec.sample_count);
    pop.boiler_coef.reserve(spec.sample_count);
    pop.draw_factor.reserve(spec.sample_count);
    pop.draw_m3_s.assign(spec.sample_count, 0.0);
    const double s = spec.dispersion;
    for (std::size_t i = 0; i < spec.sample_count; ++i) {
        BoilerParams p = reference;
        p.volume_m3 = perturb(rng, reference.volume_m3, s);
        p.thermal_resistance_c_per_w = perturb(rng, reference.thermal_resistance_c_per_w, s);
        p.efficiency = perturb(rng, reference.efficiency, s);
        p.nominal_power_w = perturb(rng, reference.nominal_power_w, s);
        p.half_deadband_c = perturb(rng, reference.half_deadband_c, s);
        pop.boiler_params.push_back(p);
        pop.boiler_coef.push_back(boiler_coefficients(p));

        BoilerState st;
        st.t_h_c = state_rng.uniform(p.setpoint_c - p.half_deadband_c,
                                     p.setpoint_c + p.half_deadband_c);
        st.thermostat_on = 0;
        pop.boiler_states.push_back(st);
        pop.draw_factor.push_back(state_rng.uniform(0.5, 1.5));
    }
    return pop;
}

namespace {

inline int decide_force(DeviceClass cls, ControlMode mode, int q_t, double rocof,
                        double freq_dev, const DeviceThresholds& thr, double alpha,
                        bool locked) {
    if (cls == DeviceClass::Fridge) {
        // Compressor loads cannot follow sub-second RoCoF commands; they only
        // provide the frequency-deviation service.
        if (mode == ControlMode::PFR || mode == ControlMode::SIPFR) {
            return pfr_decision(q_t, freq_dev, thr, locked);
        }
        return 0;
    }
    switch (mode) {
        case ControlMode::SI: return si_decision(q_t, rocof, thr, locked);
        case ControlMode::PFR: return pfr_decision(q_t, freq_dev, thr, locked);
        case ControlMode::SIPFR:
            return combined_decision(q_t, rocof, freq_dev, thr, alpha, locked);
        case ControlMode::None: return 0;
    }
    return 0;
}

inline bool update_lockout(bool locked, double temp, double sec_lo, double sec_hi,
                           double margin) {
    if (!locked) {
        return security_lockout(temp, sec_lo, sec_hi);
    }
    // Release only once back inside by half a dead-band.
    return !(temp >= sec_lo + margin && temp <= sec_hi - margin);
}

} // namespace

double step_population(DevicePopulation& pop, double rocof_hz_per_s, double freq_dev_hz,
                       double alpha, ControlMode mode, const AmbientInputs& ambient,
                       double dt_s) {
    const std::size_t m = pop.size();
    std::size_t on_count = 0;
    const double te = ambient.room_temp_c;

    if (pop.cls == DeviceClass::Fridge) {
        for (std::size_t i = 0; i < m; ++i) {
            const FridgeParams& p = pop.fridge_params[i];
            FridgeState& st = pop.fridge_states[i];
            st.thermostat_on = thermostat_update(st.t_a_c, st.thermostat_on, p.setpoint_c,
                                                 p.half_deadband_c, ThermostatMode::Cooling);
            const bool locked = update_lockout(pop.locked[i] != 0, st.t_a_c, p.security_min_c,
                                               p.security_max_c, p.half_deadband_c);
            pop.locked[i] = locked ? 1 : 0;
            const int force = decide_force(pop.cls, mode, st.thermostat_on, rocof_hz_per_s,
                                           freq_dev_hz, pop.thresholds[i], alpha, locked);
            pop.q_force[i] = static_cast<std::int8_t>(force);
            if (force != 0 &&
                security_lockout(st.t_a_c, p.security_min_c, p.security_max_c)) {
                ++pop.lockout_violation_count;
            }
            const int q = st.thermostat_on + force;
            on_count += static_cast<std::size_t>(q);

            const auto& c = pop.fridge_coef[i];
            const double qd = static_cast<double>(q);
            const double da = c.ab_a * (st.t_b_c - st.t_a_c) + c.ac_a * (st.t_c_c - st.t_a_c) +
                              c.ae_a * (te - st.t_a_c) - c.q_a * qd;
            const double db = c.ab_b * (st.t_a_c - st.t_b_c) + c.bd_b * (st.t_d_c - st.t_b_c) +
                              c.be_b * (te - st.t_b_c) - c.q_b * qd;
            const double dc = c.ac_c * (st.t_a_c - st.t_c_c);
            const double dd = c.bd_d * (st.t_b_c - st.t_d_c);
            st.t_a_c += dt_s * da;
            st.t_b_c += dt_s * db;
            st.t_c_c += dt_s * dc;
            st.t_d_c += dt_s * dd;
        }
    } else {
        const double to = ambient.cold_water_temp_c;
        for (std::size_t i = 0; i < m; ++i) {
            const BoilerParams& p = pop.boiler_params[i];
            BoilerState& st = pop.boiler_states[i];
            st.thermostat_on = thermostat_update(st.t_h_c, st.thermostat_on, p.setpoint_c,
                                                 p.half_deadband_c, ThermostatMode::Heating);
            const bool locked = update_lockout(pop.locked[i] != 0, st.t_h_c, p.security_min_c,
                                               p.security_max_c, p.half_deadband_c);
            pop.locked[i] = locked ? 1 : 0;
            const int force = decide_force(pop.cls, mode, st.thermostat_on, rocof_hz_per_s,
                                           freq_dev_hz, pop.thresholds[i], alpha, locked);
            pop.q_force[i] = static_cast<std::int8_t>(force);
            if (force != 0 &&
                security_lockout(st.t_h_c, p.security_min_c, p.security_max_c)) {
                ++pop.lockout_violation_count;
            }
            const int q = st.thermostat_on + force;
            on_count += static_cast<std::size_t>(q);

            const auto& c = pop.boiler_coef[i];
            const double draw = pop.draw_m3_s[i] * c.inv_volume;
            st.t_h_c += dt_s * (c.leak_per_s * (te - st.t_h_c) + draw * (to - st.t_h_c) +
                                c.heat_c_per_s * static_cast<double>(q));
        }
    }
    return pop.device_weight_mw * static_cast<double>(on_count);
}

EquivalentGains equivalent_gains(const DevicePopulation& pop, const ControlParams& control,
                                 double nominal_freq_hz) {
    const double n = static_cast<double>(pop.size());
    const double n_on = static_cast<double>(pop.count_on());
    const double n_off = n - n_on;
    const double rocof_range = control.rocof_max_hz_per_s - control.rocof_act_hz_per_s;
    const double freq_range = control.freq_max_hz - control.freq_act_hz;

    EquivalentGains g;
    g.m_si_off_pu = (n_off / n) / rocof_range;
    g.m_si_on_pu = (n_on / n) / rocof_range;
    g.k_pfr_off_pu = (n_off / n) / freq_range;
    g.k_pfr_on_pu = (n_on / n) / freq_range;
    const double inf = std::numeric_limits<double>::infinity();
    g.droop_off_pu = n_off > 0 ? (freq_range / nominal_freq_hz) * (n / n_off) : inf;
    g.droop_on_pu = n_on > 0 ? (freq_range / nominal_freq_hz) * (n / n_on) : inf;
    return g;
}

PenetrationReport penetration(double operating_point_mw, double nominal_mw,
                              double total_load_mw) {
    if (total_load_mw <= 0.0) {
        throw std::invalid_argument("penetration: total load must be positive");
    }
    PenetrationReport r;
    r.rho = operating_point_mw / total_load_mw;
    r.rho_nominal = nominal_mw / total_load_mw;
    r.over_coefficient = (1.0 - r.rho) * r.rho_nominal;
    r.under_coefficient = r.rho * r.rho_nominal;
    return r;
}

// --- warm-up -----------------------------------------------------------

double steady_power_mw(const DevicePopulation& pop, const AmbientInputs& ambient) {
    double duty_sum = 0.0;
    if (pop.cls == DeviceClass::Fridge) {
        for (const auto& p : pop.fridge_params) {
            duty_sum += fridge_steady_duty(p, ambient.room_temp_c).duty;
        }
    } else {
        for (std::size_t i = 0; i < pop.size(); ++i) {
            AmbientInputs amb = ambient;
            amb.draw_rate_m3_per_s = pop.draw_m3_s[i];
            duty_sum += boiler_steady_cycle(pop.boiler_params[i], amb).duty;
        }
    }
    return pop.device_weight_mw * duty_sum;
}

double calibrate_boiler_draws(DevicePopulation& pop, const AmbientInputs& ambient,
                              double base_draw_m3_s, double target_mw) {
    auto power_at = [&](double scale) {
        for (std::size_t i = 0; i < pop.size(); ++i) {
            pop.draw_m3_s[i] = base_draw_m3_s * pop.draw_factor[i] * scale;
        }
        return steady_power_mw(pop, ambient);
    };
    double lo = 0.0;
    double hi = 1.0;
    if (power_at(lo) >= target_mw) {
        return lo;  // leak losses alone already meet or exceed the target
    }
    while (power_at(hi) < target_mw && hi < 4096.0) {
        hi *= 2.0;
    }
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (power_at(mid) < target_mw) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    power_at(hi);
    return hi;
}

double calibrate_fridge_room(DevicePopulation& pop, double base_room_c, double target_mw) {
    AmbientInputs amb;
    auto power_at = [&](double room) {
        amb.room_temp_c = room;
        return steady_power_mw(pop, amb);
    };
    double lo = std::max(base_room_c - 12.0, 10.0);
    double hi = std::min(base_room_c + 12.0, 32.0);
    if (power_at(lo) >= target_mw) return lo;
    if (power_at(hi) <= target_mw) return hi;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (power_at(mid) < target_mw) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

namespace {

// Simulates one fridge to its limit cycle and returns state snapshots over a
// full cycle (dt = 1 s), starting at a switch-on. Empty when the device does
// not cycle within the cap.
std::vector<FridgeState> fridge_cycle_snapshots(const FridgeParams& p,
                                                const AmbientInputs& ambient) {
    const auto steady = fridge_steady_duty(p, ambient.room_temp_c);
    if (steady.duty < 0.005 || steady.duty > 0.995) {
        return {};
    }
    const double dt = 1.0;
    FridgeState st;
    st.t_a_c = p.setpoint_c;
    st.t_b_c = steady.mean_t_b_c;
    st.t_c_c = p.setpoint_c;
    st.t_d_c = steady.mean_t_b_c;
    st.thermostat_on = 0;

    std::vector<FridgeState> cycle;
    int on_switches = 0;
    const long cap_steps = 12 * 3600;
    for (long k = 0; k < cap_steps; ++k) {
        const int prev_on = st.thermostat_on;
        st.thermostat_on = thermostat_update(st.t_a_c, st.thermostat_on, p.setpoint_c,
                                             p.half_deadband_c, ThermostatMode::Cooling);
        if (st.thermostat_on == 1 && prev_on == 0) {
            ++on_switches;
            if (on_switches == 3) {
                return cycle;
            }
        }
        if (on_switches == 2) {
            cycle.push_back(st);
        }
        st = fridge_step(st, p, ambient, st.thermostat_on, dt);
    }
    return {};
}

} // namespace

void place_steady_states(DevicePopulation& pop, const AmbientInputs& ambient,
                         std::uint64_t seed) {
    const std::size_t m = pop.size();
    Rng rng(derive_seed(seed, kPhaseStream));

    // Stratified phases in a seeded random order, so instantaneous on-counts
    // match the duty sum to O(1/m) instead of a binomial draw.
    std::vector<std::size_t> slot(m);
    std::iota(slot.begin(), slot.end(), std::size_t{0});
    for (std::size_t i = m; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
        std::swap(slot[i - 1], slot[j]);
    }

    for (std::size_t i = 0; i < m; ++i) {
        const double phase =
            (static_cast<double>(slot[i]) + rng.uniform01()) / static_cast<double>(m);
        if (pop.cls == DeviceClass::Boiler) {
            AmbientInputs amb = ambient;
            amb.draw_rate_m3_per_s = pop.draw_m3_s[i];
            const auto cyc = boiler_steady_cycle(pop.boiler_params[i], amb);
            pop.boiler_states[i] = boiler_state_at_phase(pop.boiler_params[i], amb, cyc, phase);
        } else {
            const auto snaps = fridge_cycle_snapshots(pop.fridge_params[i], ambient);
            if (snaps.empty()) {
                const FridgeParams& p = pop.fridge_params[i];
                FridgeState st;
                st.t_a_c =
                    p.setpoint_c - p.half_deadband_c + phase * 2.0 * p.half_deadband_c;
                st.t_b_c = st.t_a_c - 2.0;
                st.t_c_c = st.t_a_c;
                st.t_d_c = st.t_b_c;
                st.thermostat_on = 0;
                pop.fridge_states[i] = st;
            } else {
                const std::size_t idx = std::min(
                    static_cast<std::size_t>(phase * static_cast<double>(snaps.size())),
                    snaps.size() - 1);
                pop.fridge_states[i] = snaps[idx];
            }
        }
        pop.q_force[i] = 0;
        pop.locked[i] = 0;
    }
}

void preroll(DevicePopulation& pop, const AmbientInputs& ambient, double seconds, double dt_s) {
    const long steps = static_cast<long>(seconds / dt_s);
    for (long k = 0; k < steps; ++k) {
        step_population(pop, 0.0, 0.0, 0.0, ControlMode::None, ambient, dt_s);
    }
}

} // namespace tclfreq
