#pragma once

#include <array>

namespace tclfreq {

// Four-node refrigerator model: fridge air (a), freezer space (b), fridge
// content (c), freezer content (d), coupled to the room (e) and a single
// heat pump split between the two compartments.
struct FridgeParams {
    double mass_a_kg = 10.0;
    double mass_b_kg = 5.0;
    double mass_c_kg = 10.0;
    double mass_d_kg = 4.0;
    double heat_a_j_per_kg_c = 2200.0;
    double heat_b_j_per_kg_c = 1000.0;
    double heat_c_j_per_kg_c = 4000.0;
    double heat_d_j_per_kg_c = 4000.0;
    // Conductance products U*A [W/degC] per exchange path.
    double ua_ab_w_per_c = 5.0;
    double ua_ac_w_per_c = 12.5;
    double ua_ae_w_per_c = 1.0;
    double ua_bd_w_per_c = 0.65;
    double ua_be_w_per_c = 0.1455;
    double cop_fridge = 0.456;
    double cop_freezer = 0.744;
    double nominal_power_w = 100.0;
    double setpoint_c = 4.0;
    double half_deadband_c = 0.5;
    double security_min_c = 2.0;
    double security_max_c = 7.0;
};

struct FridgeState {
    double t_a_c = 4.0;
    double t_b_c = 2.0;
    double t_c_c = 4.0;
    double t_d_c = 2.0;
    int thermostat_on = 0;
};

// Single-node electric water heater.
struct BoilerParams {
    double volume_m3 = 0.099;
    double water_heat_j_per_kg_c = 418.6;
    double water_density_kg_per_m3 = 1000.0;
    double thermal_resistance_c_per_w = 0.777;
    double efficiency = 1.0;
    double nominal_power_w = 1500.0;
    double setpoint_c = 60.0;
    double half_deadband_c = 5.0;
    double security_min_c = 50.0;
    double security_max_c = 70.0;
};

struct BoilerState {
    double t_h_c = 60.0;
    int thermostat_on = 0;
};

struct AmbientInputs {
    double room_temp_c = 20.0;
    double cold_water_temp_c = 15.0;
    double draw_rate_m3_per_s = 0.0;
};

// Reference parameter sets for the benchmark appliances.
FridgeParams reference_fridge_params();
BoilerParams reference_boiler_params();

// Time derivatives of the four fridge temperatures for a given heat-pump
// state; exposed so tests can check the explicit step against closed forms.
std::array<double, 4> fridge_derivatives(const FridgeState& state, const FridgeParams& p,
                                         const AmbientInputs& ambient, int q_effective);

double boiler_derivative(const BoilerState& state, const BoilerParams& p,
                         const AmbientInputs& ambient, int q_effective);

// One explicit Euler step. Thermostat state is not touched here.
FridgeState fridge_step(const FridgeState& state, const FridgeParams& p,
                        const AmbientInputs& ambient, int q_effective, double dt_s);

BoilerState boiler_step(const BoilerState& state, const BoilerParams& p,
                        const AmbientInputs& ambient, int q_effective, double dt_s);

enum class ThermostatMode { Cooling, Heating };

// Hysteresis thermostat: no state change inside [setpoint - delta, setpoint + delta].
int thermostat_update(double control_temp_c, int q_prev, double setpoint_c,
                      double half_deadband_c, ThermostatMode mode);

// Steady-cycle helpers used by warm-up calibration. Values are cycle means.
struct FridgeSteady {
    double duty = 0.0;          // fraction of time the compressor is on
    double mean_t_b_c = 0.0;    // freezer-space cycle mean
};

// Cycle-mean energy balance with T_a pinned at the setpoint; content nodes
// carry no net flux in the mean, which reduces the system to 2 unknowns.
FridgeSteady fridge_steady_duty(const FridgeParams& p, double room_temp_c);

struct BoilerCycle {
    double duty = 0.0;
    double on_time_s = 0.0;
    double off_time_s = 0.0;
    double eq_on_c = 0.0;   // asymptote while heating
    double eq_off_c = 0.0;  // asymptote while off
    double rate_per_s = 0.0; // combined leak+draw rate a in dT/dt = -a*T + b
    bool always_on = false;
    bool always_off = false;
};

// Exact saw-tooth cycle of the scalar boiler ODE between the deadband edges.
BoilerCycle boiler_steady_cycle(const BoilerParams& p, const AmbientInputs& ambient);

// State at a given phase of the steady cycle (phase 0 = switch-on at the
// lower band edge). Used to place population members at stratified phases.
BoilerState boiler_state_at_phase(const BoilerParams& p, const AmbientInputs& ambient,
                                  const BoilerCycle& cycle, double phase01);

} // namespace tclfreq
