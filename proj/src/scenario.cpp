#include "tclfreq/scenario.hpp"

#include "tclfreq/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace tclfreq {

namespace {

using nlohmann::json;

UnitSpec make_unit(std::string name, UnitType type, double p_nom, double p_min, double t_a,
                   double droop, double deadband_mhz, double rate_pct_min) {
    UnitSpec u;
    u.name = std::move(name);
    u.type = type;
    u.nominal_power_mw = p_nom;
    u.minimal_power_mw = p_min;
    u.start_up_time_s = t_a;
    u.droop = droop;
    u.half_deadband_hz = deadband_mhz / 1000.0;
    u.rate_limit_pct_per_min = rate_pct_min;
    return u;
}

// Static unit data for the island network; per-scenario rows set operating
// points, participation factors and service flags.
std::vector<UnitSpec> base_units() {
    std::vector<UnitSpec> u;
    u.push_back(make_unit("Hydro G1", UnitType::Hydro, 155, 0, 7.5, 0.04, 20, 60));
    u.push_back(make_unit("Pumped Hydro G1", UnitType::Hydro, 207, -207, 7.5, 0, 0, -1));
    u.push_back(make_unit("UP2 G2", UnitType::Gas, 100, 25, 15.3, 0.05, 10, 8));
    u.push_back(make_unit("UP1 G2", UnitType::Gas, 80, 24, 9.4, 0.05, 10, 8));
    u.push_back(make_unit("BioDisp G3", UnitType::Thermal, 5, 2, 15.3, 0.05, 10, 8));
    u.push_back(make_unit("Other thermal G3", UnitType::Thermal, 127, 51, 14.9, 0.05, 10, -1));
    u.push_back(make_unit("SARLUX G3", UnitType::Equivalent, 550, 165, 9.4, 0.05, 10, 8));
    u.push_back(make_unit("Codrogianos 1 G4", UnitType::Compensator, 250, 0, 3.5, 0, 0, -1));
    u.push_back(make_unit("Codrogianos 2 G4", UnitType::Compensator, 250, 0, 3.5, 0, 0, -1));
    u.push_back(make_unit("Photovoltaic G5", UnitType::Renewable, 2230, 0, 0, 0, 0, -1));
    u.push_back(make_unit("Wind G5", UnitType::Renewable, 3250, 0, 0, 0, 0, -1));
    u.push_back(make_unit("Bio Energetic G5", UnitType::Renewable, 50, 0, 0, 0, 0, -1));
    u.push_back(make_unit("Run-of-river Hydro G6", UnitType::Renewable, 17, 0, 0, 0, 0, -1));
    u.push_back(make_unit("Corse Diesel G7", UnitType::Diesel, 167.98, 100, 13.5, 0.05, 10, 8));
    u.push_back(make_unit("Corse Gas Turbine G8", UnitType::Gas, 107.3, 50, 17.6, 0.05, 10, 8));
    u.push_back(make_unit("Corse Hydro G9", UnitType::Hydro, 125.8, 0, 8.1, 0.05, 10, 8));
    u.push_back(make_unit("SAPEI 1", UnitType::Hvdc, 500, -500, 0, 0.05, 20, -1));
    u.push_back(make_unit("SAPEI 2", UnitType::Hvdc, 500, -500, 0, 0.05, 20, -1));
    u.push_back(make_unit("SACOI", UnitType::Hvdc, 300, -300, 0, 0, 0, -1));
    return u;
}

struct UnitDispatch {
    const char* name;
    double op_mw;
    double participation;  // secondary participation factor
    bool in_service;
    double droop_override = -1.0;          // >= 0 replaces the static droop
    double deadband_override_mhz = -1.0;
};

void apply_dispatch(std::vector<UnitSpec>& units, const std::vector<UnitDispatch>& rows) {
    for (auto& u : units) {
        u.in_service = false;
        u.operating_point_mw = 0.0;
        u.secondary_participation = 0.0;
    }
    for (const auto& row : rows) {
        bool found = false;
        for (auto& u : units) {
            if (u.name != row.name) continue;
            u.in_service = row.in_service;
            u.operating_point_mw = row.op_mw;
            u.secondary_participation = row.participation;
            if (row.droop_override >= 0.0) {
                u.droop = row.droop_override;
                u.half_deadband_hz = row.deadband_override_mhz / 1000.0;
            }
            found = true;
            break;
        }
        if (!found) {
            throw std::logic_error(std::string("preset references unknown unit ") + row.name);
        }
    }
}

ControlParams default_boiler_control() {
    ControlParams c;
    c.rocof_act_hz_per_s = 0.05;
    c.rocof_max_hz_per_s = 0.8;
    c.freq_act_hz = 0.05;
    c.freq_max_hz = 0.8;
    c.t_switch_s = 0.0;
    c.t_ramp_s = 1.0;
    c.alpha_reset_hold_s = 10.0;
    return c;
}

ControlParams default_fridge_control() {
    ControlParams c = default_boiler_control();
    c.freq_act_hz = 0.1;
    return c;
}

Scenario scenario_common() {
    Scenario s;
    s.units = base_units();
    s.boiler_control = default_boiler_control();
    s.fridge_control = default_fridge_control();
    return s;
}

Scenario preset_a() {
    Scenario s = scenario_common();
    s.id = "A";
    s.label = "summer night (3 am)";
    s.outdoor_temp_c = 19.6;
    s.hour = 3;
    apply_dispatch(s.units, {
        {"Hydro G1", 155, 0.00, true},
        {"UP1 G2", 40, 0.10, true},
        {"Other thermal G3", 30, 0.17, true},
        {"SARLUX G3", 470, 0.73, true},
        {"Codrogianos 1 G4", 0, 0, true},
        {"Codrogianos 2 G4", 0, 0, true},
        {"Photovoltaic G5", 183, 0, true},
        {"Wind G5", 307, 0, true},
        {"Bio Energetic G5", 50, 0, true},
        {"Run-of-river Hydro G6", 6, 0, true},
        {"Corse Diesel G7", 118, 0, true},
        {"Corse Gas Turbine G8", 75, 0, true},
        {"Corse Hydro G9", 88, 0, true},
        {"SAPEI 1", -165, 0, true},
        {"SAPEI 2", -165, 0, true},
        {"SACOI", -95, 0, true},
    });
    s.uncontrolled_load_mw = 791;
    s.controllable_target_mw = 25;
    s.corse_load_mw = 281;
    s.upward_reserve_mw = 120;
    s.downward_reserve_mw = 321;
    s.ref_start_up_time_s = 8.76;
    s.ref_nominal_power_mw = 1813;
    s.ref_regulating_energy_mw_per_hz = 940;
    s.ref_c_p_over_pct = 52.4;
    s.ref_c_p_under_pct = 1.6;
    s.over_event = {"Loss of the SACOI link", 100.0, 60.0};
    s.under_event = {"Wind disconnection", -100.0, 60.0};
    return s;
}

Scenario preset_b() {
    Scenario s = scenario_common();
    s.id = "B";
    s.label = "summer day (10 am)";
    s.outdoor_temp_c = 28.2;
    s.hour = 10;
    apply_dispatch(s.units, {
        {"Pumped Hydro G1", 13, 0.00, true, 0.04, 20},
        {"UP1 G2", 41, 0.10, true},
        {"Other thermal G3", 29, 0.17, true},
        {"SARLUX G3", 460, 0.73, true},
        {"Codrogianos 1 G4", 0, 0, true},
        {"Codrogianos 2 G4", 0, 0, true},
        {"Photovoltaic G5", 842, 0, true},
        {"Wind G5", 520, 0, true},
        {"Bio Energetic G5", 50, 0, true},
        {"Run-of-river Hydro G6", 6, 0, true},
        {"Corse Diesel G7", 118, 0, true},
        {"Corse Gas Turbine G8", 75, 0, true},
        {"Corse Hydro G9", 88, 0, true},
        {"SAPEI 1", -257.5, 0, true},
        {"SAPEI 2", -257.5, 0, true},
        {"SACOI", -150, 0, true},
    });
    s.uncontrolled_load_mw = 1180;
    s.controllable_target_mw = 116;
    s.corse_load_mw = 281;
    s.upward_reserve_mw = 129;
    s.downward_reserve_mw = 321;
    s.ref_start_up_time_s = 8.73;
    s.ref_nominal_power_mw = 1865;
    s.ref_regulating_energy_mw_per_hz = 966;
    s.ref_c_p_over_pct = 30.9;
    s.ref_c_p_under_pct = 3.1;
    s.over_event = {"Loss of the SACOI link", 150.0, 60.0};
    s.under_event = {"Wind disconnection", -100.0, 60.0};
    return s;
}

Scenario preset_c() {
    Scenario s = scenario_common();
    s.id = "C";
    s.label = "summer evening (10 pm)";
    s.outdoor_temp_c = 23.4;
    s.hour = 22;
    apply_dispatch(s.units, {
        {"Hydro G1", 155, 0.00, true},
        {"Pumped Hydro G1", 146, 0.00, true, 0.04, 20},
        {"UP1 G2", 52, 0.10, true},
        {"Other thermal G3", 79, 0.17, true},
        {"SARLUX G3", 466, 0.73, true},
        {"Codrogianos 1 G4", 0, 0, true},
        {"Codrogianos 2 G4", 0, 0, true},
        {"Photovoltaic G5", 196, 0, true},
        {"Wind G5", 1247, 0, true},
        {"Bio Energetic G5", 50, 0, true},
        {"Run-of-river Hydro G6", 6, 0, true},
        {"Corse Diesel G7", 118, 0, true},
        {"Corse Gas Turbine G8", 75, 0, true},
        {"Corse Hydro G9", 88, 0, true},
        {"SAPEI 1", -350, 0, true},
        {"SAPEI 2", -350, 0, true},
        {"SACOI", -150, 0, true},
    });
    s.uncontrolled_load_mw = 1446;
    s.controllable_target_mw = 101;
    s.corse_load_mw = 281;
    s.upward_reserve_mw = 173;
    s.downward_reserve_mw = 475;
    s.ref_start_up_time_s = 8.63;
    s.ref_nominal_power_mw = 2020;
    s.ref_regulating_energy_mw_per_hz = 1044;
    s.ref_c_p_over_pct = 26.6;
    s.ref_c_p_under_pct = 1.9;
    s.over_event = {"Loss of the SACOI link", 150.0, 60.0};
    s.under_event = {"Wind disconnection", -100.0, 60.0};
    return s;
}

Scenario preset_d() {
    Scenario s = scenario_common();
    s.id = "D";
    s.label = "winter night (3 am)";
    s.outdoor_temp_c = 1.0;
    s.hour = 3;
    apply_dispatch(s.units, {
        {"Pumped Hydro G1", -166, 0.00, true},
        {"Other thermal G3", 37, 0.19, true},
        {"SARLUX G3", 486, 0.81, true},
        {"Codrogianos 1 G4", 0, 0, true},
        {"Codrogianos 2 G4", 0, 0, true},
        {"Photovoltaic G5", 40, 0, true},
        {"Wind G5", 326, 0, true},
        {"Bio Energetic G5", 50, 0, true},
        {"Run-of-river Hydro G6", 9, 0, true},
        {"Corse Diesel G7", 118, 0, true},
        {"Corse Gas Turbine G8", 75, 0, true},
        {"Corse Hydro G9", 88, 0, true},
        {"SAPEI 1", -112.5, 0, true},
        {"SAPEI 2", -112.5, 0, true},
        {"SACOI", -72, 0, true},
    });
    s.uncontrolled_load_mw = 459;
    s.controllable_target_mw = 26;
    s.corse_load_mw = 281;
    s.upward_reserve_mw = 64;
    s.downward_reserve_mw = 321;
    s.ref_start_up_time_s = 8.70;
    s.ref_nominal_power_mw = 1785;
    s.ref_regulating_energy_mw_per_hz = 831;
    s.ref_c_p_over_pct = 86.5;
    s.ref_c_p_under_pct = 4.6;
    s.over_event = {"Loss of the SACOI link", 110.0, 60.0};
    s.under_event = {"Bio-energy disconnection", -50.0, 60.0};
    return s;
}

Scenario preset_e() {
    Scenario s = scenario_common();
    s.id = "E";
    s.label = "winter day (10 am)";
    s.outdoor_temp_c = 4.0;
    s.hour = 10;
    apply_dispatch(s.units, {
        {"Other thermal G3", 126, 0.19, true},
        {"SARLUX G3", 497, 0.81, true},
        {"Codrogianos 1 G4", 0, 0, true},
        {"Codrogianos 2 G4", 0, 0, true},
        {"Photovoltaic G5", 352, 0, true},
        {"Wind G5", 929, 0, true},
        {"Bio Energetic G5", 50, 0, true},
        {"Run-of-river Hydro G6", 16, 0, true},
        {"Corse Diesel G7", 118, 0, true},
        {"Corse Gas Turbine G8", 75, 0, true},
        {"Corse Hydro G9", 88, 0, true},
        {"SAPEI 1", -345, 0, true},
        {"SAPEI 2", -345, 0, true},
        {"SACOI", -150, 0, true},
    });
    s.uncontrolled_load_mw = 1002;
    s.controllable_target_mw = 128;
    s.corse_load_mw = 281;
    s.upward_reserve_mw = 53;
    s.downward_reserve_mw = 332;
    s.ref_start_up_time_s = 8.85;
    s.ref_nominal_power_mw = 1578;
    s.ref_regulating_energy_mw_per_hz = 831;
    s.ref_c_p_over_pct = 34.7;
    s.ref_c_p_under_pct = 4.3;
    s.over_event = {"Loss of the SACOI link", 150.0, 60.0};
    s.under_event = {"Bio-energy disconnection", -50.0, 60.0};
    return s;
}

Scenario preset_f() {
    Scenario s = scenario_common();
    s.id = "F";
    s.label = "winter evening (10 pm)";
    s.outdoor_temp_c = 3.3;
    s.hour = 22;
    apply_dispatch(s.units, {
        {"Pumped Hydro G1", 166, 0.00, true, 0.04, 20},
        {"UP1 G2", 42, 0.00, true},
        {"Other thermal G3", 127, 0.19, true},
        {"SARLUX G3", 550, 0.81, true},
        {"Codrogianos 1 G4", 0, 0, true},
        {"Codrogianos 2 G4", 0, 0, true},
        {"Photovoltaic G5", 9, 0, true},
        {"Wind G5", 63, 0, true},
        {"Bio Energetic G5", 50, 0, true},
        {"Run-of-river Hydro G6", 16, 0, true},
        {"Corse Diesel G7", 118, 0, true},
        {"Corse Gas Turbine G8", 75, 0, true},
        {"Corse Hydro G9", 88, 0, true},
        {"SAPEI 1", 15, 0, true},
        {"SAPEI 2", 15, 0, true},
        {"SACOI", 8, 0, true},
    });
    s.uncontrolled_load_mw = 935;
    s.controllable_target_mw = 126;
    s.corse_load_mw = 281;
    s.upward_reserve_mw = 88;
    s.downward_reserve_mw = 353;
    s.ref_start_up_time_s = 8.73;
    s.ref_nominal_power_mw = 1865;
    s.ref_regulating_energy_mw_per_hz = 967;
    s.ref_c_p_over_pct = 36.5;
    s.ref_c_p_under_pct = 5.0;
    s.over_event = {"Load disconnection", 150.0, 60.0};
    s.under_event = {"Bio-energy disconnection", -50.0, 60.0};
    return s;
}

UnitType unit_type_from_name(const std::string& name) {
    if (name == "hydro") return UnitType::Hydro;
    if (name == "gas") return UnitType::Gas;
    if (name == "thermal") return UnitType::Thermal;
    if (name == "equivalent") return UnitType::Equivalent;
    if (name == "diesel") return UnitType::Diesel;
    if (name == "compensator") return UnitType::Compensator;
    if (name == "renewable") return UnitType::Renewable;
    if (name == "hvdc") return UnitType::Hvdc;
    throw std::invalid_argument("unknown unit type: " + name);
}

void unit_from_json(UnitSpec& u, const json& j) {
    if (j.contains("type")) u.type = unit_type_from_name(j.at("type").get<std::string>());
    if (j.contains("nominal_power_mw")) u.nominal_power_mw = j.at("nominal_power_mw");
    if (j.contains("minimal_power_mw")) u.minimal_power_mw = j.at("minimal_power_mw");
    if (j.contains("start_up_time_s")) u.start_up_time_s = j.at("start_up_time_s");
    if (j.contains("droop")) u.droop = j.at("droop");
    if (j.contains("half_deadband_mhz")) u.half_deadband_hz = j.at("half_deadband_mhz").get<double>() / 1000.0;
    if (j.contains("rate_limit_pct_per_min")) u.rate_limit_pct_per_min = j.at("rate_limit_pct_per_min");
    if (j.contains("secondary_participation")) u.secondary_participation = j.at("secondary_participation");
    if (j.contains("operating_point_mw")) u.operating_point_mw = j.at("operating_point_mw");
    if (j.contains("in_service")) u.in_service = j.at("in_service");
}

void control_from_json(ControlParams& c, const json& j) {
    if (j.contains("rocof_act_hz_per_s")) c.rocof_act_hz_per_s = j.at("rocof_act_hz_per_s");
    if (j.contains("rocof_max_hz_per_s")) c.rocof_max_hz_per_s = j.at("rocof_max_hz_per_s");
    if (j.contains("freq_act_hz")) c.freq_act_hz = j.at("freq_act_hz");
    if (j.contains("freq_max_hz")) c.freq_max_hz = j.at("freq_max_hz");
    if (j.contains("t_switch_s")) c.t_switch_s = j.at("t_switch_s");
    if (j.contains("t_ramp_s")) c.t_ramp_s = j.at("t_ramp_s");
    if (j.contains("alpha_reset_hold_s")) c.alpha_reset_hold_s = j.at("alpha_reset_hold_s");
}

void event_from_json(EventSpec& e, const json& j) {
    if (j.contains("description")) e.description = j.at("description");
    if (j.contains("magnitude_mw")) e.magnitude_mw = j.at("magnitude_mw");
    if (j.contains("time_s")) e.time_s = j.at("time_s");
}

} // namespace

std::vector<std::string> preset_ids() {
    return {"A", "B", "C", "D", "E", "F"};
}

Scenario preset_scenario(const std::string& id) {
    if (id == "A") return preset_a();
    if (id == "B") return preset_b();
    if (id == "C") return preset_c();
    if (id == "D") return preset_d();
    if (id == "E") return preset_e();
    if (id == "F") return preset_f();
    throw std::invalid_argument("unknown scenario preset: " + id);
}

Scenario scenario_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("scenario config: ") + e.what());
    }

    Scenario s = j.contains("base") ? preset_scenario(j.at("base").get<std::string>())
                                    : scenario_common();
    if (!j.contains("base")) {
        s.id = "custom";
    }
    if (j.contains("id")) s.id = j.at("id");
    if (j.contains("label")) s.label = j.at("label");
    if (j.contains("outdoor_temp_c")) s.outdoor_temp_c = j.at("outdoor_temp_c");
    if (j.contains("hour")) s.hour = j.at("hour");
    if (j.contains("uncontrolled_load_mw")) s.uncontrolled_load_mw = j.at("uncontrolled_load_mw");
    if (j.contains("controllable_load_target_mw"))
        s.controllable_target_mw = j.at("controllable_load_target_mw");
    if (j.contains("corse_load_mw")) s.corse_load_mw = j.at("corse_load_mw");
    if (j.contains("upward_secondary_reserve_mw"))
        s.upward_reserve_mw = j.at("upward_secondary_reserve_mw");
    if (j.contains("downward_secondary_reserve_mw"))
        s.downward_reserve_mw = j.at("downward_secondary_reserve_mw");
    if (j.contains("fridge_nominal_mw")) s.fridge_nominal_mw = j.at("fridge_nominal_mw");
    if (j.contains("boiler_nominal_mw")) s.boiler_nominal_mw = j.at("boiler_nominal_mw");
    if (j.contains("sample_count")) s.sample_count = j.at("sample_count");
    if (j.contains("dispersion")) s.dispersion = j.at("dispersion");
    if (j.contains("boiler_water_heat_j_per_kg_c"))
        s.boiler_water_heat_j_per_kg_c = j.at("boiler_water_heat_j_per_kg_c");
    if (j.contains("k_pf")) {
        const auto& k = j.at("k_pf");
        if (k.contains("uncontrolled")) s.k_pf_uncontrolled = k.at("uncontrolled");
        if (k.contains("fridge")) s.k_pf_fridge = k.at("fridge");
        if (k.contains("boiler")) s.k_pf_boiler = k.at("boiler");
        if (k.contains("tau_s")) s.tau_pf_s = k.at("tau_s");
    }
    if (j.contains("governor_lag_s")) {
        const auto& g = j.at("governor_lag_s");
        if (g.contains("hydro")) s.lags.hydro_s = g.at("hydro");
        if (g.contains("gas")) s.lags.gas_s = g.at("gas");
        if (g.contains("thermal")) s.lags.thermal_s = g.at("thermal");
        if (g.contains("equivalent")) s.lags.equivalent_s = g.at("equivalent");
        if (g.contains("diesel")) s.lags.diesel_s = g.at("diesel");
        if (g.contains("hvdc")) s.lags.hvdc_s = g.at("hvdc");
    }
    if (j.contains("control")) {
        const auto& c = j.at("control");
        if (c.contains("boiler")) control_from_json(s.boiler_control, c.at("boiler"));
        if (c.contains("fridge")) control_from_json(s.fridge_control, c.at("fridge"));
    }
    if (j.contains("events")) {
        const auto& e = j.at("events");
        if (e.contains("over")) event_from_json(s.over_event, e.at("over"));
        if (e.contains("under")) event_from_json(s.under_event, e.at("under"));
    }
    if (j.contains("reference")) {
        const auto& r = j.at("reference");
        if (r.contains("start_up_time_s")) s.ref_start_up_time_s = r.at("start_up_time_s");
        if (r.contains("nominal_power_mw")) s.ref_nominal_power_mw = r.at("nominal_power_mw");
        if (r.contains("regulating_energy_mw_per_hz"))
            s.ref_regulating_energy_mw_per_hz = r.at("regulating_energy_mw_per_hz");
        if (r.contains("c_p_over_pct")) s.ref_c_p_over_pct = r.at("c_p_over_pct");
        if (r.contains("c_p_under_pct")) s.ref_c_p_under_pct = r.at("c_p_under_pct");
    }
    if (j.contains("units")) {
        const auto& uj = j.at("units");
        if (uj.is_array()) {
            s.units.clear();
            for (const auto& one : uj) {
                UnitSpec u;
                u.name = one.at("name").get<std::string>();
                unit_from_json(u, one);
                s.units.push_back(u);
            }
        } else {
            for (auto it = uj.begin(); it != uj.end(); ++it) {
                bool found = false;
                for (auto& u : s.units) {
                    if (u.name == it.key()) {
                        unit_from_json(u, it.value());
                        found = true;
                        break;
                    }
                }
                if (!found) {
                    throw std::invalid_argument("scenario config: unknown unit override '" +
                                                it.key() + "'");
                }
            }
        }
    }
    validate_scenario(s);
    return s;
}

Scenario load_scenario(const std::string& id_or_path) {
    const auto ids = preset_ids();
    if (std::find(ids.begin(), ids.end(), id_or_path) != ids.end()) {
        Scenario s = preset_scenario(id_or_path);
        validate_scenario(s);
        return s;
    }
    std::ifstream in(id_or_path);
    if (!in) {
        throw std::invalid_argument("scenario: no preset or readable file named '" +
                                    id_or_path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return scenario_from_json_text(buf.str());
}

double balance_residual_mw(const Scenario& s) {
    double gen = 0.0;
    for (const auto& u : s.units) {
        if (u.in_service) gen += u.operating_point_mw;  // HVDC import positive
    }
    return gen - (s.uncontrolled_load_mw + s.controllable_target_mw + s.corse_load_mw);
}

void validate_scenario(const Scenario& s) {
    const double residual = balance_residual_mw(s);
    if (std::abs(residual) > 0.5) {
        std::ostringstream msg;
        msg << "scenario " << s.id << ": pre-event power balance off by " << residual
            << " MW";
        throw std::invalid_argument(msg.str());
    }
    double participation = 0.0;
    bool any = false;
    for (const auto& u : s.units) {
        if (!u.in_service) continue;
        participation += u.secondary_participation;
        any = true;
        if (u.operating_point_mw > u.nominal_power_mw + 1e-9) {
            throw std::invalid_argument("scenario " + s.id + ": unit " + u.name +
                                        " dispatched above nameplate");
        }
    }
    if (!any) {
        throw std::invalid_argument("scenario " + s.id + ": no in-service units");
    }
    if (std::abs(participation - 1.0) > 1e-6) {
        std::ostringstream msg;
        msg << "scenario " << s.id << ": secondary participation factors sum to "
            << participation;
        throw std::invalid_argument(msg.str());
    }
    compute_grid_constants(s.units, s.nominal_freq_hz);  // throws when no synchronous unit
}

// --- warm-up -----------------------------------------------------------

namespace {

double room_temp_from_outdoor(double outdoor_c) {
    return std::clamp(18.0 + 0.35 * (outdoor_c - 10.0), 18.0, 28.0);
}

double cold_water_from_outdoor(double outdoor_c) {
    return std::max(outdoor_c, 10.0);
}

double draw_hour_factor(int hour) {
    if (hour < 6) return 0.3;
    if (hour < 9) return 1.6;
    if (hour < 12) return 1.0;
    if (hour < 17) return 0.8;
    if (hour < 22) return 1.4;
    return 0.7;
}

constexpr double kBaseDrawM3PerS = 2.0e-6;  // ~170 l/day before scaling
constexpr double kPrerollSeconds = 600.0;
constexpr double kPrerollDt = 1.0;

double measure_power_mw(DevicePopulation& pop, const AmbientInputs& amb, double seconds) {
    double acc = 0.0;
    long n = 0;
    for (double t = 0.0; t < seconds; t += kPrerollDt) {
        acc += step_population(pop, 0.0, 0.0, 0.0, ControlMode::None, amb, kPrerollDt);
        ++n;
    }
    return acc / static_cast<double>(n);
}

} // namespace

WarmPopulations prepare_populations(const Scenario& scenario, std::uint64_t seed,
                                    double scale) {
    WarmPopulations w;

    PopulationSpec fs;
    fs.device_class = DeviceClass::Fridge;
    fs.aggregate_nominal_mw = scenario.fridge_nominal_mw * scale;
    fs.sample_count = scenario.sample_count;
    fs.dispersion = scenario.dispersion;
    fs.seed = derive_seed(seed, 11);

    PopulationSpec bs = fs;
    bs.device_class = DeviceClass::Boiler;
    bs.aggregate_nominal_mw = scenario.boiler_nominal_mw * scale;
    bs.seed = derive_seed(seed, 12);

    ControlParams fridge_ctl = scenario.fridge_control;
    ControlParams boiler_ctl = scenario.boiler_control;

    BoilerParams boiler_ref = reference_boiler_params();
    boiler_ref.water_heat_j_per_kg_c = scenario.boiler_water_heat_j_per_kg_c;

    w.fridges = build_population(fs, reference_fridge_params(), fridge_ctl);
    w.boilers = build_population(bs, boiler_ref, boiler_ctl);

    const double room = room_temp_from_outdoor(scenario.outdoor_temp_c);
    const double cold = cold_water_from_outdoor(scenario.outdoor_temp_c);
    w.boiler_ambient.room_temp_c = room;
    w.boiler_ambient.cold_water_temp_c = cold;
    w.fridge_ambient.room_temp_c = room;
    w.fridge_ambient.cold_water_temp_c = cold;

    // Split the scenario target: fridges follow their natural duty at the
    // scenario room temperature, boilers always keep at least their leak
    // losses; the draw profile absorbs the remainder.
    const double target_total = scenario.controllable_target_mw * scale;
    std::fill(w.boilers.draw_m3_s.begin(), w.boilers.draw_m3_s.end(), 0.0);
    const double boiler_min = steady_power_mw(w.boilers, w.boiler_ambient);
    const double fridge_natural = steady_power_mw(w.fridges, w.fridge_ambient);
    double fridge_target = std::min(fridge_natural, std::max(target_total - boiler_min, 0.0));
    double boiler_target = std::max(target_total - fridge_target, boiler_min);

    w.report.fridge_target_mw = fridge_target;
    w.report.boiler_target_mw = boiler_target;

    w.report.fridge_room_temp_c =
        calibrate_fridge_room(w.fridges, room, fridge_target);
    w.fridge_ambient.room_temp_c = w.report.fridge_room_temp_c;

    const double base_draw = kBaseDrawM3PerS * draw_hour_factor(scenario.hour);
    w.report.boiler_draw_scale =
        calibrate_boiler_draws(w.boilers, w.boiler_ambient, base_draw, boiler_target);

    place_steady_states(w.fridges, w.fridge_ambient, derive_seed(seed, 21));
    place_steady_states(w.boilers, w.boiler_ambient, derive_seed(seed, 22));

    preroll(w.fridges, w.fridge_ambient, kPrerollSeconds, kPrerollDt);
    preroll(w.boilers, w.boiler_ambient, kPrerollSeconds, kPrerollDt);

    w.report.fridge_achieved_mw = measure_power_mw(w.fridges, w.fridge_ambient, 60.0);
    w.report.boiler_achieved_mw = measure_power_mw(w.boilers, w.boiler_ambient, 60.0);
    return w;
}

const WarmPopulations& WarmupCache::get(const Scenario& scenario, std::uint64_t seed,
                                        double scale) {
    std::ostringstream key;
    key << scenario.id << '/' << seed << '/' << scale;
    auto it = entries_.find(key.str());
    if (it == entries_.end()) {
        it = entries_.emplace(key.str(), prepare_populations(scenario, seed, scale)).first;
    }
    return it->second;
}

// --- simulation --------------------------------------------------------

const char* control_mode_name(ControlMode mode) {
    switch (mode) {
        case ControlMode::None: return "none";
        case ControlMode::SI: return "si";
        case ControlMode::PFR: return "pfr";
        case ControlMode::SIPFR: return "si-pfr";
    }
    return "none";
}

ControlMode control_mode_from_name(const std::string& name) {
    if (name == "none") return ControlMode::None;
    if (name == "si") return ControlMode::SI;
    if (name == "pfr") return ControlMode::PFR;
    if (name == "si-pfr" || name == "sipfr" || name == "si_pfr") return ControlMode::SIPFR;
    throw std::invalid_argument("unknown control mode: " + name);
}

SimOutput run_simulation(const SimulationPlan& plan) {
    WarmPopulations warm = prepare_populations(plan.scenario, plan.seed, plan.population_scale);
    return run_simulation(plan, warm);
}

SimOutput run_simulation(const SimulationPlan& plan, const WarmPopulations& warm) {
    const Scenario& sc = plan.scenario;
    if (plan.duration_s < plan.event.time_s) {
        throw std::invalid_argument("run_simulation: duration shorter than the event time");
    }
    if (plan.dt_s <= 0.0) {
        throw std::invalid_argument("run_simulation: dt must be positive");
    }
    validate_scenario(sc);

    const double dt = plan.dt_s;
    const double f_nom = sc.nominal_freq_hz;
    const std::size_t steps = static_cast<std::size_t>(std::llround(plan.duration_s / dt));

    const GridConstants consts = compute_grid_constants(sc.units, f_nom);
    GridModel grid(sc.units, consts, sc.lags, sc.upward_reserve_mw, sc.downward_reserve_mw);

    DevicePopulation fridges = warm.fridges;
    DevicePopulation boilers = warm.boilers;
    DevicePopulation base_fridges = warm.fridges;
    DevicePopulation base_boilers = warm.boilers;
    const bool controlled = plan.mode != ControlMode::None;

    MeasurementState meas = make_measurement_state(f_nom);
    AlphaState alpha;
    double fridge_load_filter_hz = 0.0;
    const double unc_total = sc.uncontrolled_load_mw + sc.corse_load_mw;

    SimOutput out;
    out.scenario_id = sc.id;
    out.event_description = plan.event.description;
    out.event_magnitude_mw = plan.event.magnitude_mw;
    out.mode = plan.mode;
    out.seed = plan.seed;
    out.population_scale = plan.population_scale;
    out.warmup = warm.report;
    out.start_gains = equivalent_gains(boilers, sc.boiler_control, f_nom);

    SimTrace& tr = out.trace;
    tr.dt_s = dt;
    tr.event_time_s = plan.event.time_s;
    tr.freq_hz.reserve(steps + 1);
    tr.rocof_meas_hz_per_s.reserve(steps + 1);
    tr.p_boilers_mw.reserve(steps + 1);
    tr.p_fridges_mw.reserve(steps + 1);
    tr.p_uncontrolled_mw.reserve(steps + 1);
    tr.p_primary_mw.reserve(steps + 1);
    tr.p_secondary_mw.reserve(steps + 1);
    tr.alpha.reserve(steps + 1);

    ComfortStats comfort;

    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double df = grid.delta_f_hz();

        meas = filter_step(f_nom + df, meas, sc.measurement);
        const double rocof = meas.rocof_hz_per_s;
        const double freq_dev = meas.filtered_freq_hz - f_nom;

        if (plan.mode == ControlMode::SIPFR) {
            alpha = alpha_schedule(alpha, rocof, freq_dev, sc.boiler_control, dt);
        }

        double p_b_base = step_population(base_boilers, 0.0, 0.0, 0.0, ControlMode::None,
                                          warm.boiler_ambient, dt);
        double p_f_base = step_population(base_fridges, 0.0, 0.0, 0.0, ControlMode::None,
                                          warm.fridge_ambient, dt);
        double p_b_ctl = p_b_base;
        double p_f_ctl = p_f_base;
        if (controlled) {
            p_b_ctl = step_population(boilers, rocof, freq_dev, alpha.alpha, plan.mode,
                                      warm.boiler_ambient, dt);
            p_f_ctl = step_population(fridges, rocof, freq_dev, alpha.alpha, plan.mode,
                                      warm.fridge_ambient, dt);

            for (std::size_t i = 0; i < boilers.size(); ++i) {
                comfort.max_boiler_deviation_c =
                    std::max(comfort.max_boiler_deviation_c,
                             std::abs(boilers.boiler_states[i].t_h_c -
                                      base_boilers.boiler_states[i].t_h_c));
            }
            for (std::size_t i = 0; i < fridges.size(); ++i) {
                comfort.max_fridge_deviation_c =
                    std::max(comfort.max_fridge_deviation_c,
                             std::abs(fridges.fridge_states[i].t_a_c -
                                      base_fridges.fridge_states[i].t_a_c));
            }
        }

        // Fridge draw follows frequency (compressor load); boilers are
        // resistive and do not.
        const double p_f_bus = load_response(p_f_ctl, df, fridge_load_filter_hz,
                                             sc.k_pf_fridge, sc.tau_pf_s, dt, f_nom);
        const double tcl_dev = (p_b_ctl - p_b_base) + (p_f_bus - p_f_base);

        const double external = apply_event(plan.event, t);
        const auto flows =
            grid.step(external, tcl_dev, unc_total, sc.k_pf_uncontrolled, sc.tau_pf_s, dt);

        tr.freq_hz.push_back(f_nom + df);
        tr.rocof_meas_hz_per_s.push_back(rocof);
        tr.p_boilers_mw.push_back(p_b_ctl);
        tr.p_fridges_mw.push_back(p_f_bus);
        tr.p_uncontrolled_mw.push_back(unc_total + flows.load_damping_mw);
        tr.p_primary_mw.push_back(flows.primary_mw);
        tr.p_secondary_mw.push_back(flows.secondary_mw);
        tr.alpha.push_back(alpha.alpha);

        if ((k & 63) == 0) {
            grid.check_divergence(t);
        }
    }
    grid.check_divergence(plan.duration_s);

    comfort.lockout_violations =
        boilers.lockout_violation_count + fridges.lockout_violation_count;
    out.comfort = comfort;
    out.metrics = compute_metrics(tr.freq_hz, dt, f_nom, plan.event.time_s,
                                  plan.event.magnitude_mw);
    out.recovery = compute_recovery_stats(tr, f_nom, sc.boiler_control.freq_act_hz);
    out.penetration = penetration(warm.report.fridge_achieved_mw + warm.report.boiler_achieved_mw,
                                  (sc.fridge_nominal_mw + sc.boiler_nominal_mw) *
                                      plan.population_scale,
                                  sc.uncontrolled_load_mw + sc.controllable_target_mw);
    out.crosscheck.computed_start_up_time_s = consts.grid_start_up_time_s;
    out.crosscheck.computed_nominal_power_mw = consts.grid_nominal_power_mw;
    out.crosscheck.computed_regulating_energy = consts.regulating_energy_mw_per_hz;
    out.crosscheck.ref_start_up_time_s = sc.ref_start_up_time_s;
    out.crosscheck.ref_nominal_power_mw = sc.ref_nominal_power_mw;
    out.crosscheck.ref_regulating_energy = sc.ref_regulating_energy_mw_per_hz;

    if (!plan.keep_trace) {
        out.trace = SimTrace{};
    }
    return out;
}

// Recovery statistics from the frequency trace; needs the full-resolution
// trace, so it runs before any decimation/drop.
RecoveryStats compute_recovery_stats(const SimTrace& tr, double f_nom, double act_hz) {
    RecoveryStats r;
    const double dt = tr.dt_s;
    const std::size_t event_idx =
        static_cast<std::size_t>(std::llround(tr.event_time_s / dt));
    const std::size_t tail_idx =
        std::min(tr.freq_hz.size() - 1,
                 event_idx + static_cast<std::size_t>(std::llround(1200.0 / dt)));

    for (std::size_t i = 0; i < event_idx && i < tr.freq_hz.size(); ++i) {
        r.max_pre_event_hz = std::max(r.max_pre_event_hz, std::abs(tr.freq_hz[i] - f_nom));
    }
    for (std::size_t i = tail_idx; i < tr.freq_hz.size(); ++i) {
        r.max_tail_hz = std::max(r.max_tail_hz, std::abs(tr.freq_hz[i] - f_nom));
    }

    // Peak location, then the first re-entry into the activation band held
    // for 5 s.
    std::size_t peak_idx = event_idx;
    double peak = 0.0;
    for (std::size_t i = event_idx; i < tr.freq_hz.size(); ++i) {
        const double dev = std::abs(tr.freq_hz[i] - f_nom);
        if (dev > peak) {
            peak = dev;
            peak_idx = i;
        }
    }
    const std::size_t hold = static_cast<std::size_t>(std::llround(5.0 / dt));
    std::size_t run = 0;
    for (std::size_t i = peak_idx; i < tr.freq_hz.size(); ++i) {
        if (std::abs(tr.freq_hz[i] - f_nom) <= act_hz) {
            if (++run >= hold) {
                r.reenter_act_time_s = static_cast<double>(i - run + 1) * dt;
                break;
            }
        } else {
            run = 0;
        }
    }
    if (r.reenter_act_time_s >= 0.0) {
        const std::size_t start =
            static_cast<std::size_t>(std::llround(r.reenter_act_time_s / dt)) + hold;
        for (std::size_t i = start; i < tr.freq_hz.size(); ++i) {
            r.max_after_reenter_hz =
                std::max(r.max_after_reenter_hz, std::abs(tr.freq_hz[i] - f_nom));
        }
    }
    return r;
}

// --- matrix and sweep ---------------------------------------------------

namespace {

template <typename Task>
void run_parallel(std::size_t count, int jobs, Task&& task) {
    const int workers = std::max(1, jobs);
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                task(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace

std::vector<MatrixRow> run_matrix(std::uint64_t seed, int jobs, bool keep_traces,
                                  const std::function<void(const SimOutput&)>& sink) {
    struct RunDef {
        std::string scenario_id;
        bool over;
        ControlMode mode;
    };
    const std::vector<ControlMode> modes = {ControlMode::None, ControlMode::SI,
                                            ControlMode::PFR, ControlMode::SIPFR};
    std::vector<RunDef> defs;
    for (const auto& id : preset_ids()) {
        for (bool over : {true, false}) {
            for (auto mode : modes) {
                defs.push_back({id, over, mode});
            }
        }
    }

    // Scenarios and warm populations are shared read-only across the workers.
    std::map<std::string, Scenario> scenarios;
    WarmupCache cache;
    for (const auto& id : preset_ids()) {
        scenarios.emplace(id, preset_scenario(id));
        cache.get(scenarios.at(id), seed, 1.0);
    }

    std::vector<MatrixRow> rows(defs.size());
    run_parallel(defs.size(), jobs, [&](std::size_t i) {
        const auto& def = defs[i];
        const Scenario& sc = scenarios.at(def.scenario_id);
        SimulationPlan plan;
        plan.scenario = sc;
        plan.event = def.over ? sc.over_event : sc.under_event;
        plan.mode = def.mode;
        plan.seed = seed;
        plan.keep_trace = true;
        SimOutput out = run_simulation(plan, cache.get(sc, seed, 1.0));
        if (sink) sink(out);
        if (!keep_traces) out.trace = SimTrace{};
        rows[i].output = std::move(out);
    });

    // Gains against the no-control run of the same scenario/event.
    for (std::size_t i = 0; i < defs.size(); ++i) {
        for (std::size_t j = 0; j < defs.size(); ++j) {
            if (defs[j].scenario_id == defs[i].scenario_id && defs[j].over == defs[i].over &&
                defs[j].mode == ControlMode::None) {
                rows[i].gains = compute_gains(rows[i].output.metrics, rows[j].output.metrics);
                break;
            }
        }
    }
    return rows;
}

std::vector<SweepRow> run_penetration_sweep(const std::vector<std::string>& scenario_ids,
                                            const std::vector<double>& factors,
                                            std::uint64_t seed, int jobs,
                                            const std::function<void(const SimOutput&)>& sink) {
    for (double f : factors) {
        if (f <= 0.0) {
            throw std::invalid_argument("penetration sweep: factors must be positive");
        }
    }
    struct RunDef {
        std::string scenario_id;
        bool over;
        double factor;
    };
    std::vector<RunDef> defs;
    for (const auto& id : scenario_ids) {
        for (bool over : {true, false}) {
            for (double f : factors) {
                defs.push_back({id, over, f});
            }
        }
    }

    std::map<std::string, Scenario> scenarios;
    WarmupCache cache;
    for (const auto& id : scenario_ids) {
        scenarios.emplace(id, load_scenario(id));
        for (double f : factors) {
            cache.get(scenarios.at(id), seed, f);
        }
    }

    std::vector<SweepRow> rows(defs.size());
    run_parallel(defs.size(), jobs, [&](std::size_t i) {
        const auto& def = defs[i];
        const Scenario& sc = scenarios.at(def.scenario_id);
        SimulationPlan plan;
        plan.scenario = sc;
        plan.event = def.over ? sc.over_event : sc.under_event;
        plan.seed = seed;
        plan.population_scale = def.factor;
        plan.keep_trace = true;

        plan.mode = ControlMode::None;
        SimOutput base = run_simulation(plan, cache.get(sc, seed, def.factor));
        if (sink) sink(base);

        plan.mode = ControlMode::SIPFR;
        SimOutput ctl = run_simulation(plan, cache.get(sc, seed, def.factor));
        if (sink) sink(ctl);

        SweepRow row;
        row.scenario_id = def.scenario_id;
        row.polarity = def.over ? "over" : "under";
        row.factor = def.factor;
        row.penetration = ctl.penetration;
        row.baseline = base.metrics;
        row.with_control = ctl.metrics;
        row.gains = compute_gains(ctl.metrics, base.metrics);
        rows[i] = std::move(row);
    });
    return rows;
}

} // namespace tclfreq
