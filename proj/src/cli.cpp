#include "tclfreq/cli.hpp"

#include "tclfreq/scenario.hpp"
#include "tclfreq/trace_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace tclfreq {

namespace {

namespace fs = std::filesystem;

std::string default_out_dir() {
    if (const char* env = std::getenv("TCLFREQ_OUTPUT_DIR")) {
        return env;
    }
    return ".";
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory '" + dir + "': " +
                                 ec.message());
    }
}

nlohmann::ordered_json metrics_json(const MetricSummary& m) {
    return {{"delta_f_max_hz", m.delta_f_max_hz},
            {"lambda_u_mw_per_hz", m.lambda_u_mw_per_hz},
            {"rocof_100_hz_per_s", m.rocof_100_hz_per_s},
            {"rocof_500_hz_per_s", m.rocof_500_hz_per_s},
            {"quasi_steady_dev_hz", m.quasi_steady_dev_hz}};
}

nlohmann::ordered_json gains_json(const PerformanceGains& g) {
    return {{"k_delta_f_max_pct", g.k_delta_f_max_pct},
            {"k_lambda_u_pct", g.k_lambda_u_pct},
            {"k_rocof_100_pct", g.k_rocof_100_pct}};
}

void write_run_files(const SimOutput& out, const PerformanceGains& gains,
                     const std::string& out_dir, int decimation) {
    const std::string stem =
        (fs::path(out_dir) / run_file_stem(out, out.event_magnitude_mw > 0.0)).string();
    write_trace(out.trace, stem + "_trace.csv", decimation);
    write_summary(out, gains, out.recovery, stem + "_summary.json");
}

int cmd_run(const std::string& scenario_arg, const std::string& event_arg,
            double custom_magnitude, double event_time, const std::string& mode_arg,
            std::uint64_t seed, double dt, double duration, double scale,
            const std::string& out_dir, int decimation) {
    Scenario sc = load_scenario(scenario_arg);

    SimulationPlan plan;
    plan.scenario = sc;
    plan.mode = control_mode_from_name(mode_arg);
    plan.seed = seed;
    plan.dt_s = dt;
    plan.duration_s = duration;
    plan.population_scale = scale;
    if (event_arg == "over") {
        plan.event = sc.over_event;
    } else if (event_arg == "under") {
        plan.event = sc.under_event;
    } else if (event_arg == "custom") {
        plan.event = {"Custom step", custom_magnitude, event_time};
    } else {
        throw std::invalid_argument("event must be over, under or custom");
    }
    plan.event.time_s = event_time;

    ensure_dir(out_dir);
    WarmPopulations warm = prepare_populations(sc, seed, scale);
    SimOutput out = run_simulation(plan, warm);

    PerformanceGains gains;
    if (plan.mode != ControlMode::None) {
        SimulationPlan base = plan;
        base.mode = ControlMode::None;
        const SimOutput baseline = run_simulation(base, warm);
        gains = compute_gains(out.metrics, baseline.metrics);
    }
    write_run_files(out, gains, out_dir, decimation);
    std::cout << "wrote " << run_file_stem(out, out.event_magnitude_mw > 0.0)
              << "_{trace.csv,summary.json} to " << out_dir << "\n";
    return 0;
}

int cmd_matrix(std::uint64_t seed, int jobs, const std::string& out_dir, int decimation) {
    ensure_dir(out_dir);
    const auto rows = run_matrix(seed, jobs, /*keep_traces=*/true);

    nlohmann::ordered_json table = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        write_run_files(row.output, row.gains, out_dir, decimation);
        const bool over = row.output.event_magnitude_mw > 0.0;
        table.push_back({{"scenario", row.output.scenario_id},
                         {"event", over ? "over" : "under"},
                         {"control_mode", control_mode_name(row.output.mode)},
                         {"metrics", metrics_json(row.output.metrics)},
                         {"gains_vs_no_control", gains_json(row.gains)}});
    }
    std::ofstream f(fs::path(out_dir) / "matrix_summary.json", std::ios::binary);
    f << table.dump(2) << "\n";
    if (!f) {
        throw std::runtime_error("failed writing matrix_summary.json");
    }
    std::cout << "matrix: " << rows.size() << " runs written to " << out_dir << "\n";
    return 0;
}

int cmd_sweep(const std::vector<std::string>& scenario_ids, const std::vector<double>& factors,
              std::uint64_t seed, int jobs, const std::string& out_dir, int decimation) {
    ensure_dir(out_dir);
    std::mutex io_mutex;
    auto sink = [&](const SimOutput& out) {
        const std::string stem =
            (fs::path(out_dir) / run_file_stem(out, out.event_magnitude_mw > 0.0)).string();
        std::lock_guard<std::mutex> lock(io_mutex);
        write_trace(out.trace, stem + "_trace.csv", decimation);
        write_summary(out, PerformanceGains{}, out.recovery, stem + "_summary.json");
    };
    const auto rows = run_penetration_sweep(scenario_ids, factors, seed, jobs, sink);

    nlohmann::ordered_json table = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        table.push_back({{"scenario", row.scenario_id},
                         {"event", row.polarity},
                         {"factor", row.factor},
                         {"c_p_over", row.penetration.over_coefficient},
                         {"c_p_under", row.penetration.under_coefficient},
                         {"baseline", metrics_json(row.baseline)},
                         {"si_pfr", metrics_json(row.with_control)},
                         {"gains", gains_json(row.gains)}});
    }
    std::ofstream f(fs::path(out_dir) / "sweep_summary.json", std::ios::binary);
    f << table.dump(2) << "\n";
    if (!f) {
        throw std::runtime_error("failed writing sweep_summary.json");
    }
    std::cout << "sweep: " << rows.size() << " points written to " << out_dir << "\n";
    return 0;
}

int cmd_validate(const std::string& scenario_arg) {
    const Scenario sc = load_scenario(scenario_arg);
    const GridConstants c = compute_grid_constants(sc.units, sc.nominal_freq_hz);
    const auto pen = penetration(sc.controllable_target_mw,
                                 sc.fridge_nominal_mw + sc.boiler_nominal_mw,
                                 sc.uncontrolled_load_mw + sc.controllable_target_mw);
    std::cout << "scenario " << sc.id << " (" << sc.label << ")\n"
              << "  grid nominal power   " << c.grid_nominal_power_mw << " MW (reference "
              << sc.ref_nominal_power_mw << ", delta "
              << c.grid_nominal_power_mw - sc.ref_nominal_power_mw << ")\n"
              << "  start-up time        " << c.grid_start_up_time_s << " s (reference "
              << sc.ref_start_up_time_s << ", delta "
              << c.grid_start_up_time_s - sc.ref_start_up_time_s << ")\n"
              << "  regulating energy    " << c.regulating_energy_mw_per_hz
              << " MW/Hz (reference " << sc.ref_regulating_energy_mw_per_hz << ", delta "
              << c.regulating_energy_mw_per_hz - sc.ref_regulating_energy_mw_per_hz << ")\n"
              << "  balance residual     " << balance_residual_mw(sc) << " MW\n"
              << "  c_p over / under     " << 100.0 * pen.over_coefficient << " % / "
              << 100.0 * pen.under_coefficient << " % (reference " << sc.ref_c_p_over_pct
              << " / " << sc.ref_c_p_under_pct << ")\n";
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"thermostatic-load frequency services simulator"};
    app.require_subcommand(1);

    std::string scenario = "A";
    std::string event = "over";
    std::string mode = "none";
    std::string out_dir = default_out_dir();
    std::uint64_t seed = 1;
    double dt = 0.02;
    double duration = 1800.0;
    double scale = 1.0;
    double magnitude = 0.0;
    double event_time = 60.0;
    int decimation = 0;
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs < 1) jobs = 1;
    std::vector<std::string> sweep_scenarios = preset_ids();
    std::vector<double> factors = {0.25, 0.5, 1.0, 2.0, 4.0};

    auto* run = app.add_subcommand("run", "run one simulation");
    run->add_option("--scenario", scenario, "preset id (A-F) or config file");
    run->add_option("--event", event, "over | under | custom")
        ->check(CLI::IsMember({"over", "under", "custom"}));
    run->add_option("--magnitude", magnitude, "custom event size, MW (signed)");
    run->add_option("--event-time", event_time, "event time, s");
    run->add_option("--control", mode, "none | si | pfr | si-pfr");
    run->add_option("--seed", seed, "random seed");
    run->add_option("--dt", dt, "integration step, s");
    run->add_option("--duration", duration, "simulated time, s");
    run->add_option("--scale", scale, "aggregate nominal power factor");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--decimate", decimation,
                    "trace decimation (0 = dense first minute, then 1 row/s)");

    auto* matrix = app.add_subcommand("matrix", "all scenarios x events x control modes");
    matrix->add_option("--seed", seed, "random seed");
    matrix->add_option("--jobs", jobs, "parallel workers");
    matrix->add_option("--out", out_dir, "output directory");
    matrix->add_option("--decimate", decimation, "trace decimation");

    auto* sweep = app.add_subcommand("sweep", "penetration sweep (no-control vs si-pfr)");
    sweep->add_option("--scenario", sweep_scenarios, "preset ids");
    sweep->add_option("--factors", factors, "nominal-power scale factors");
    sweep->add_option("--seed", seed, "random seed");
    sweep->add_option("--jobs", jobs, "parallel workers");
    sweep->add_option("--out", out_dir, "output directory");
    sweep->add_option("--decimate", decimation, "trace decimation");

    auto* validate = app.add_subcommand("validate", "cross-check scenario constants");
    validate->add_option("--scenario", scenario, "preset id (A-F) or config file");

    std::vector<std::string> argv(args);
    try {
        app.parse(argv.empty() ? std::vector<std::string>{"--help"} : argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (run->parsed()) {
            return cmd_run(scenario, event, magnitude, event_time, mode, seed, dt, duration,
                           scale, out_dir, decimation);
        }
        if (matrix->parsed()) {
            return cmd_matrix(seed, jobs, out_dir, decimation);
        }
        if (sweep->parsed()) {
            return cmd_sweep(sweep_scenarios, factors, seed, jobs, out_dir, decimation);
        }
        if (validate->parsed()) {
            return cmd_validate(scenario);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 2;
}

} // namespace tclfreq
