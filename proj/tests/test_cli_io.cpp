#include "tclfreq/cli.hpp"
#include "tclfreq/scenario.hpp"
#include "tclfreq/trace_io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace tclfreq;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

long count_rows(const std::string& csv) {
    long lines = 0;
    for (char c : csv) {
        if (c == '\n') ++lines;
    }
    return lines - 1;  // header
}

SimTrace synthetic_trace(double duration_s, double dt) {
    SimTrace tr;
    tr.dt_s = dt;
    tr.event_time_s = 60.0;
    const std::size_t n = static_cast<std::size_t>(duration_s / dt) + 1;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        tr.freq_hz.push_back(50.0 + 0.001 * std::sin(t));
        tr.rocof_meas_hz_per_s.push_back(0.0);
        tr.p_boilers_mw.push_back(10.0);
        tr.p_fridges_mw.push_back(5.0);
        tr.p_uncontrolled_mw.push_back(1000.0);
        tr.p_primary_mw.push_back(0.0);
        tr.p_secondary_mw.push_back(0.0);
        tr.alpha.push_back(0.0);
    }
    return tr;
}

} // namespace

TEST_CASE("trace header is the exact column contract") {
    const auto tr = synthetic_trace(0.1, 0.02);
    const fs::path p = fs::temp_directory_path() / "tclfreq_header_test.csv";
    write_trace(tr, p.string(), 1);
    const std::string text = slurp(p);
    CHECK(text.rfind("time_s,freq_hz,rocof_hz_s,p_boilers_mw,p_fridges_mw,"
                     "p_uncontrolled_mw,p_primary_mw,p_secondary_mw,alpha\n",
                     0) == 0);
    fs::remove(p);
}

TEST_CASE("row counts: full resolution and uniform decimation") {
    const auto tr = synthetic_trace(1800.0, 0.02);
    const fs::path p = fs::temp_directory_path() / "tclfreq_rows_test.csv";
    write_trace(tr, p.string(), 1);
    CHECK(count_rows(slurp(p)) == 90001);
    write_trace(tr, p.string(), 50);
    CHECK(count_rows(slurp(p)) == 1801);  // one row per second, including t = 0
    fs::remove(p);
}

TEST_CASE("default decimation keeps the first post-event minute dense") {
    const auto tr = synthetic_trace(1800.0, 0.02);
    const fs::path p = fs::temp_directory_path() / "tclfreq_decim_test.csv";
    write_trace(tr, p.string(), 0);
    // Every step until event+60 s (6001 rows), then one per second (1680).
    CHECK(count_rows(slurp(p)) == 6001 + 1680);
    fs::remove(p);
}

TEST_CASE("cli run produces byte-identical outputs for the same seed") {
    const fs::path dir1 = fs::temp_directory_path() / "tclfreq_cli_a";
    const fs::path dir2 = fs::temp_directory_path() / "tclfreq_cli_b";
    fs::remove_all(dir1);
    fs::remove_all(dir2);

    auto run_into = [&](const fs::path& dir) {
        return run_cli({"run", "--scenario", "A", "--event", "over", "--control", "si-pfr",
                        "--seed", "42", "--duration", "120", "--out", dir.string(),
                        "--decimate", "10"});
    };
    REQUIRE(run_into(dir1) == 0);
    REQUIRE(run_into(dir2) == 0);

    const std::string stem = "A_over_si-pfr_seed42";
    CHECK(slurp(dir1 / (stem + "_trace.csv")) == slurp(dir2 / (stem + "_trace.csv")));
    CHECK(slurp(dir1 / (stem + "_summary.json")) == slurp(dir2 / (stem + "_summary.json")));

    // The controlled run improves on its paired no-control baseline.
    const std::string summary = slurp(dir1 / (stem + "_summary.json"));
    CHECK(summary.find("\"k_delta_f_max_pct\"") != std::string::npos);
    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("cli validate and usage errors") {
    CHECK(run_cli({"validate", "--scenario", "B"}) == 0);
    CHECK(run_cli({"frobnicate"}) == 2);
    CHECK(run_cli({"run", "--scenario", "Z", "--event", "over"}) == 3);
}
