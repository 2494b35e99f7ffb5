// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. The simulation matrix and the penetration sweep are shared
// between criteria and dominate the runtime.

#include "tclfreq/cli.hpp"
#include "tclfreq/control.hpp"
#include "tclfreq/grid.hpp"
#include "tclfreq/measurement.hpp"
#include "tclfreq/metrics.hpp"
#include "tclfreq/population.hpp"
#include "tclfreq/rng.hpp"
#include "tclfreq/scenario.hpp"
#include "tclfreq/trace_io.hpp"

#include "thermal_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace tclfreq;

namespace {

constexpr std::uint64_t kSeed = 42;

struct Report {
    bool all_pass = true;
    void line(int idx, bool pass, const std::string& what, const std::string& detail = "") {
        all_pass = all_pass && pass;
        std::printf("C%-2d %s  %s%s%s\n", idx, pass ? "PASS" : "FAIL", what.c_str(),
                    detail.empty() ? "" : " — ", detail.c_str());
        std::fflush(stdout);
    }
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

ControlParams table_boiler_control() {
    ControlParams c;
    c.rocof_act_hz_per_s = 0.05;
    c.rocof_max_hz_per_s = 0.8;
    c.freq_act_hz = 0.05;
    c.freq_max_hz = 0.8;
    return c;
}

// ---- C1: scenario constants -------------------------------------------

void criterion_constants(Report& rep) {
    const Scenario a = load_scenario("A");
    const auto ca = compute_grid_constants(a.units, 50.0);
    bool pass = std::abs(ca.grid_nominal_power_mw - 1813.0) <= 0.5;
    pass = pass && std::abs(ca.grid_start_up_time_s - 8.76) <= 0.05;
    pass = pass && std::abs(ca.regulating_energy_mw_per_hz - 940.0) <= 10.0;
    std::string detail = "A: P=" + fmt(ca.grid_nominal_power_mw) +
                         " MW, Ta=" + fmt(ca.grid_start_up_time_s) +
                         " s, Er=" + fmt(ca.regulating_energy_mw_per_hz) + " MW/Hz;";
    for (const auto& id : preset_ids()) {
        const Scenario s = load_scenario(id);
        const auto c = compute_grid_constants(s.units, 50.0);
        const double dta = std::abs(c.grid_start_up_time_s - s.ref_start_up_time_s);
        pass = pass && dta <= 0.05;
        detail += " dTa(" + id + ")=" + fmt(dta);
    }
    rep.line(1, pass, "grid constants vs published values", detail);
}

// ---- C2: aggregation law ----------------------------------------------

void criterion_aggregation(Report& rep) {
    PopulationSpec spec;
    spec.device_class = DeviceClass::Boiler;
    spec.aggregate_nominal_mw = 356.0;
    spec.sample_count = 1000;
    spec.dispersion = 0.10;
    spec.seed = kSeed;
    const ControlParams ctl = table_boiler_control();
    const AmbientInputs amb{20.0, 15.0, 0.0};

    bool pass = true;
    std::string worst;
    for (ServiceKind kind : {ServiceKind::SI, ServiceKind::PFR}) {
        for (double level = 0.0; level <= 0.9 + 1e-9; level += 0.05) {
            auto pop = build_population(spec, reference_boiler_params(), ctl);
            for (auto& st : pop.boiler_states) {
                st.thermostat_on = 0;
                st.t_h_c = 60.0;
            }
            const double rocof = kind == ServiceKind::SI ? level : 0.0;
            const double fdev = kind == ServiceKind::PFR ? level : 0.0;
            const auto mode = kind == ServiceKind::SI ? ControlMode::SI : ControlMode::PFR;
            const double realized =
                step_population(pop, rocof, fdev, 0.0, mode, amb, 0.02) * 1e6;  // W
            const double expected = predicted_power_delta(
                0, 1000, 356.0 / 1000.0 * 1e6, level, ctl, kind);
            const double r = std::clamp((level - 0.05) / 0.75, 0.0, 1.0);
            const double sigma =
                356.0 / 1000.0 * 1e6 * std::sqrt(1000.0 * r * (1.0 - r));
            const double tol = 4.0 * sigma + 1e-6;
            if (std::abs(realized - expected) > tol) {
                pass = false;
                worst = "level " + fmt(level) + ": got " + fmt(realized / 1e6) +
                        " MW, want " + fmt(expected / 1e6) + " MW";
            }
        }
    }
    rep.line(2, pass, "realized switching matches the piecewise-linear law within 4 sigma",
             worst);
}

// ---- C3: threshold statistics -----------------------------------------

void criterion_thresholds(Report& rep) {
    const std::size_t n = 10000;
    const auto thr = assign_thresholds(n, table_boiler_control(), kSeed);
    std::vector<double> u;
    u.reserve(n);
    double mean = 0.0;
    for (const auto& t : thr) {
        u.push_back((t.rocof_threshold_hz_per_s - 0.05) / 0.75);
        mean += t.rocof_threshold_hz_per_s;
    }
    mean /= static_cast<double>(n);
    std::sort(u.begin(), u.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        d = std::max(d, std::abs((static_cast<double>(i) + 1.0) / n - u[i]));
        d = std::max(d, std::abs(u[i] - static_cast<double>(i) / n));
    }
    const double crit = 1.62762 / std::sqrt(static_cast<double>(n));
    const double se = (0.75 / std::sqrt(12.0)) / std::sqrt(static_cast<double>(n));
    const bool pass = d < crit && std::abs(mean - 0.425) <= 3.0 * se;
    rep.line(3, pass, "uniform threshold draws: KS and mean",
             "D=" + fmt(d) + " (crit " + fmt(crit) + "), mean=" + fmt(mean));
}

// ---- C4: filter contract ----------------------------------------------

void criterion_filter(Report& rep) {
    MeasurementConfig cfg;
    auto s = make_measurement_state(50.0);
    double t = 0.0;
    while (std::abs(s.filtered_freq_hz - 50.1) > 0.001 && t < 2.0) {
        s = filter_step(50.1, s, cfg);
        t += cfg.sample_period_s;
    }
    bool pass = t <= 0.52;

    auto fixed = make_measurement_state(49.5);
    for (int k = 0; k < 100; ++k) {
        fixed = filter_step(49.5, fixed, cfg);
        pass = pass && fixed.filtered_freq_hz == 49.5;
    }
    rep.line(4, pass, "1 percent step settling within 0.52 s; DC gain exactly 1",
             "settle " + fmt(t) + " s");
}

// ---- C5-C8, C10: matrix criteria --------------------------------------

struct MatrixIndex {
    std::map<std::string, const MatrixRow*> by_key;
    const MatrixRow& at(const std::string& scenario, bool over, ControlMode mode) const {
        const std::string key =
            scenario + (over ? "+" : "-") + control_mode_name(mode);
        return *by_key.at(key);
    }
};

MatrixIndex index_matrix(const std::vector<MatrixRow>& rows) {
    MatrixIndex idx;
    for (const auto& row : rows) {
        const std::string key = row.output.scenario_id +
                                (row.output.event_magnitude_mw > 0 ? "+" : "-") +
                                control_mode_name(row.output.mode);
        idx.by_key[key] = &row;
    }
    return idx;
}

void criterion_orderings(Report& rep, const MatrixIndex& idx) {
    bool pass = true;
    std::string detail;
    for (const auto& id : preset_ids()) {
        const auto& none = idx.at(id, true, ControlMode::None).output.metrics;
        const auto& si = idx.at(id, true, ControlMode::SI).output.metrics;
        const auto& pfr = idx.at(id, true, ControlMode::PFR).output.metrics;
        const auto& sipfr = idx.at(id, true, ControlMode::SIPFR).output.metrics;

        const bool df_chain = sipfr.delta_f_max_hz <= pfr.delta_f_max_hz &&
                              pfr.delta_f_max_hz <= none.delta_f_max_hz &&
                              si.delta_f_max_hz <= none.delta_f_max_hz;
        const bool lambda_up = pfr.lambda_u_mw_per_hz > none.lambda_u_mw_per_hz &&
                               sipfr.lambda_u_mw_per_hz > none.lambda_u_mw_per_hz;
        const bool lambda_si =
            std::abs(si.lambda_u_mw_per_hz - none.lambda_u_mw_per_hz) /
                none.lambda_u_mw_per_hz <
            0.02;
        const double r_none = std::abs(none.rocof_100_hz_per_s);
        const double r_si = std::abs(si.rocof_100_hz_per_s);
        const double r_sipfr = std::abs(sipfr.rocof_100_hz_per_s);
        const bool rocof_ok = r_si < r_none && r_sipfr < r_none &&
                              std::abs(r_si - r_sipfr) <= 0.05 * std::max(r_si, r_sipfr);
        if (!(df_chain && lambda_up && lambda_si && rocof_ok)) {
            pass = false;
            detail += id + "(df:" + (df_chain ? "ok" : "BAD") +
                      ",lu:" + (lambda_up && lambda_si ? "ok" : "BAD") +
                      ",r100:" + (rocof_ok ? "ok" : "BAD") + ") ";
        }
    }
    rep.line(5, pass, "over-frequency orderings across the 48-run matrix", detail);
}

void criterion_scenario_a_targets(Report& rep, const MatrixIndex& idx) {
    const double none_peak = idx.at("A", true, ControlMode::None).output.metrics.delta_f_max_hz;
    const double sipfr_peak =
        idx.at("A", true, ControlMode::SIPFR).output.metrics.delta_f_max_hz;
    const bool pass = none_peak >= 0.20 && std::abs(sipfr_peak - 0.15) <= 0.05 &&
                      sipfr_peak < none_peak;
    rep.line(6, pass, "scenario A over-frequency peaks",
             "no-control 50+" + fmt(none_peak) + ", si-pfr 50+" + fmt(sipfr_peak));
}

void criterion_recovery(Report& rep, const std::vector<MatrixRow>& rows) {
    bool pass = true;
    std::string detail;
    for (const auto& row : rows) {
        const auto& r = row.output.recovery;
        const bool ok = r.max_tail_hz < 0.02 && r.reenter_act_time_s >= 0.0 &&
                        r.max_after_reenter_hz <= 0.05;
        if (!ok) {
            pass = false;
            detail += row.output.scenario_id +
                      std::string(row.output.event_magnitude_mw > 0 ? "+" : "-") +
                      control_mode_name(row.output.mode) + "(tail " + fmt(r.max_tail_hz) +
                      ") ";
        }
    }
    rep.line(7, pass, "secondary recovery below 20 mHz and no post-recovery re-crossing",
             detail);
}

void criterion_asymmetry(Report& rep, const MatrixIndex& idx) {
    bool pass = true;
    std::string detail;
    for (const auto& id : preset_ids()) {
        const double over_gain = idx.at(id, true, ControlMode::SIPFR).gains.k_delta_f_max_pct;
        const double under_gain =
            idx.at(id, false, ControlMode::SIPFR).gains.k_delta_f_max_pct;
        const double cpu = idx.at(id, true, ControlMode::SIPFR).output.penetration
                               .under_coefficient;
        if (!(over_gain > under_gain) || cpu >= 0.06) {
            pass = false;
        }
        detail += id + ":" + fmt(over_gain) + ">" + fmt(under_gain) + " ";
    }
    rep.line(8, pass, "over-frequency gains exceed under-frequency gains; c_p_under < 6 %",
             detail);
}

void criterion_comfort(Report& rep, const std::vector<MatrixRow>& rows) {
    bool pass = true;
    std::string detail;
    double worst_fridge = 0.0, worst_boiler = 0.0;
    for (const auto& row : rows) {
        const auto& c = row.output.comfort;
        worst_fridge = std::max(worst_fridge, c.max_fridge_deviation_c);
        worst_boiler = std::max(worst_boiler, c.max_boiler_deviation_c);
        if (c.lockout_violations != 0) {
            pass = false;
            detail += row.output.scenario_id + ":violations ";
        }
    }
    // Dead-band widths including the 3-sigma parameter dispersion.
    const double fridge_bound = 2.0 * 0.5 * 1.3 + 0.01;
    const double boiler_bound = 2.0 * 5.0 * 1.3 + 0.05;
    if (worst_fridge > fridge_bound || worst_boiler > boiler_bound) pass = false;
    rep.line(10, pass, "no forced control outside security; deviations within the dead-band",
             "max dev fridge " + fmt(worst_fridge) + " C, boiler " + fmt(worst_boiler) +
                 " C" + detail);
}

// ---- C9: penetration sweep --------------------------------------------

void criterion_sweep(Report& rep, const std::vector<SweepRow>& rows) {
    bool pass = true;
    std::string detail;
    const double slack = 0.25;  // percentage points
    for (const auto& id : preset_ids()) {
        for (const std::string polarity : {"over", "under"}) {
            std::vector<const SweepRow*> pts;
            for (const auto& r : rows) {
                if (r.scenario_id == id && r.polarity == polarity) pts.push_back(&r);
            }
            std::sort(pts.begin(), pts.end(),
                      [](const SweepRow* a, const SweepRow* b) { return a->factor < b->factor; });
            for (std::size_t i = 1; i < pts.size(); ++i) {
                const bool mono =
                    pts[i]->gains.k_delta_f_max_pct >=
                        pts[i - 1]->gains.k_delta_f_max_pct - slack &&
                    pts[i]->gains.k_lambda_u_pct >= pts[i - 1]->gains.k_lambda_u_pct - slack &&
                    pts[i]->gains.k_rocof_100_pct >=
                        pts[i - 1]->gains.k_rocof_100_pct - slack;
                if (!mono) {
                    pass = false;
                    detail += id + "/" + polarity + "@x" + fmt(pts[i]->factor) + " ";
                }
            }
        }
    }
    bool high_penetration_point = false;
    double best = 0.0;
    for (const auto& r : rows) {
        if (r.polarity == "under" && r.penetration.under_coefficient >= 0.15 &&
            r.penetration.under_coefficient <= 0.25) {
            best = std::max(best, r.gains.k_delta_f_max_pct);
            if (r.gains.k_delta_f_max_pct >= 15.0) high_penetration_point = true;
        }
    }
    if (!high_penetration_point) pass = false;
    rep.line(9, pass, "sweep gains nondecreasing; k_df >= 15 % near c_p_under ~ 20 %",
             detail + "best under-gain near 20 %: " + fmt(best) + " %");
}

// ---- C11: determinism --------------------------------------------------

std::string matrix_fingerprint(const std::vector<MatrixRow>& rows) {
    std::string fp;
    for (const auto& row : rows) {
        fp += summary_to_json_text(row.output, row.gains, row.output.recovery);
    }
    return fp;
}

void criterion_determinism(Report& rep, const std::vector<MatrixRow>& parallel_rows) {
    namespace fs = std::filesystem;
    // One full run written twice must be byte-identical.
    const fs::path dir = fs::temp_directory_path() / "tclfreq_acceptance_det";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const Scenario sc = load_scenario("A");
    SimulationPlan plan;
    plan.scenario = sc;
    plan.event = sc.over_event;
    plan.mode = ControlMode::SIPFR;
    plan.seed = kSeed;
    const auto warm = prepare_populations(sc, kSeed, 1.0);
    const SimOutput a = run_simulation(plan, warm);
    const SimOutput b = run_simulation(plan, warm);
    write_trace(a.trace, (dir / "a.csv").string(), 0);
    write_trace(b.trace, (dir / "b.csv").string(), 0);
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    bool pass = slurp(dir / "a.csv") == slurp(dir / "b.csv");
    pass = pass && summary_to_json_text(a, PerformanceGains{}, a.recovery) ==
                       summary_to_json_text(b, PerformanceGains{}, b.recovery);
    fs::remove_all(dir);

    // The matrix repeated single-threaded must match the parallel rows.
    const auto serial_rows = run_matrix(kSeed, 1, false);
    pass = pass && matrix_fingerprint(serial_rows) == matrix_fingerprint(parallel_rows);
    rep.line(11, pass, "byte-identical outputs across reruns and worker counts");
}

// ---- C12: numerical oracle ---------------------------------------------

void criterion_oracle(Report& rep) {
    Rng rng(kSeed);
    const double dt = 0.02;
    bool pass = true;
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        FridgeParams p = reference_fridge_params();
        AmbientInputs amb{rng.uniform(15.0, 30.0), 15.0, 0.0};
        const int q = rng.uniform01() < 0.5 ? 0 : 1;
        FridgeState st{rng.uniform(0.0, 10.0), rng.uniform(-5.0, 8.0),
                       rng.uniform(0.0, 10.0), rng.uniform(-5.0, 8.0), q};
        std::array<std::array<double, 4>, 4> a;
        std::array<double, 4> b;
        test_oracle::fridge_system(p, amb, q, a, b);
        const auto exact = test_oracle::expm_affine_step<4>(
            a, b, {st.t_a_c, st.t_b_c, st.t_c_c, st.t_d_c}, dt);
        const FridgeState euler = fridge_step(st, p, amb, q, dt);
        const std::array<double, 4> got{euler.t_a_c, euler.t_b_c, euler.t_c_c, euler.t_d_c};
        const std::array<double, 4> x0{st.t_a_c, st.t_b_c, st.t_c_c, st.t_d_c};
        for (int i = 0; i < 4; ++i) {
            const double change = std::max(std::abs(exact[i] - x0[i]), 1e-9);
            const double rel = std::abs(got[i] - exact[i]) / change;
            worst = std::max(worst, rel);
            if (rel > 1e-3) pass = false;
        }

        BoilerParams bp = reference_boiler_params();
        AmbientInputs bamb{rng.uniform(15.0, 25.0), rng.uniform(8.0, 18.0),
                           rng.uniform(0.0, 2e-5)};
        BoilerState bst{rng.uniform(40.0, 75.0), q};
        const double cap =
            bp.water_heat_j_per_kg_c * bp.volume_m3 * bp.water_density_kg_per_m3;
        const double rate = 1.0 / (bp.thermal_resistance_c_per_w * cap) +
                            bamb.draw_rate_m3_per_s / bp.volume_m3;
        const double supply = bamb.room_temp_c / (bp.thermal_resistance_c_per_w * cap) +
                              bamb.draw_rate_m3_per_s / bp.volume_m3 * bamb.cold_water_temp_c +
                              bp.efficiency * q * bp.nominal_power_w / cap;
        const double bexact =
            supply / rate + (bst.t_h_c - supply / rate) * std::exp(-rate * dt);
        const BoilerState beuler = boiler_step(bst, bp, bamb, q, dt);
        const double bchange = std::max(std::abs(bexact - bst.t_h_c), 1e-9);
        const double brel = std::abs(beuler.t_h_c - bexact) / bchange;
        worst = std::max(worst, brel);
        if (brel > 1e-3) pass = false;
    }
    rep.line(12, pass, "explicit steps vs matrix-exponential/closed-form oracle",
             "worst relative error " + fmt(worst));
}

} // namespace

int main() {
    Report rep;
    const int jobs = std::max(1u, std::thread::hardware_concurrency());

    criterion_constants(rep);
    criterion_aggregation(rep);
    criterion_thresholds(rep);
    criterion_filter(rep);

    std::printf("... running the 48-run simulation matrix (jobs=%d)\n", jobs);
    std::fflush(stdout);
    const auto matrix_rows = run_matrix(kSeed, jobs, false);
    const auto idx = index_matrix(matrix_rows);

    criterion_orderings(rep, idx);
    criterion_scenario_a_targets(rep, idx);
    criterion_recovery(rep, matrix_rows);
    criterion_asymmetry(rep, idx);

    std::printf("... running the penetration sweep\n");
    std::fflush(stdout);
    const auto sweep_rows =
        run_penetration_sweep(preset_ids(), {0.25, 0.5, 1.0, 2.0, 4.0}, kSeed, jobs);
    criterion_sweep(rep, sweep_rows);

    criterion_comfort(rep, matrix_rows);

    std::printf("... re-running the matrix single-threaded for determinism\n");
    std::fflush(stdout);
    criterion_determinism(rep, matrix_rows);
    criterion_oracle(rep);

    std::printf("%s\n", rep.all_pass ? "ALL CRITERIA PASS" : "CRITERIA FAILED");
    return rep.all_pass ? 0 : 1;
}
