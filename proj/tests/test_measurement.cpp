#include "tclfreq/measurement.hpp"
#include "tclfreq/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace tclfreq;

namespace {

MeasurementConfig cfg() {
    return MeasurementConfig{0.02, 0.1};
}

} // namespace

TEST_CASE("constant input is an exact fixed point (DC gain 1)") {
    auto s = make_measurement_state(50.0);
    for (int k = 0; k < 1000; ++k) {
        s = filter_step(50.0, s, cfg());
        CHECK(s.filtered_freq_hz == 50.0);
        CHECK(s.rocof_hz_per_s == 0.0);
    }
    // Also at a non-nominal level once converged.
    for (int k = 0; k < 4000; ++k) s = filter_step(49.7, s, cfg());
    const double settled = s.filtered_freq_hz;
    s = filter_step(49.7, s, cfg());
    CHECK(s.filtered_freq_hz == settled);
}

TEST_CASE("step response settles within 1 percent in at most 520 ms") {
    auto s = make_measurement_state(50.0);
    double t = 0.0;
    while (std::abs(s.filtered_freq_hz - 50.1) > 0.001) {
        s = filter_step(50.1, s, cfg());
        t += cfg().sample_period_s;
        REQUIRE(t < 1.0);
    }
    CHECK(t <= 0.52);
}

TEST_CASE("downward step: filtered value after 0.1 s matches the closed form") {
    auto s = make_measurement_state(50.0);
    for (int k = 0; k < 5; ++k) {
        s = filter_step(49.9, s, cfg());
    }
    // 49.9 + 0.1*exp(-1); frozen from the exact zero-order-hold response.
    CHECK(s.filtered_freq_hz == doctest::Approx(49.93678794411714).epsilon(1e-12));
}

TEST_CASE("rocof from consecutive samples") {
    MeasurementState s;
    s.filtered_freq_hz = 50.0;
    s.prev_filtered_freq_hz = 50.0;
    CHECK(measure_rocof(s, cfg()) == 0.0);
    s.prev_filtered_freq_hz = 50.0;
    s.filtered_freq_hz = 49.998;
    CHECK(measure_rocof(s, cfg()) == doctest::Approx(-0.1).epsilon(1e-12));
}

TEST_CASE("steady ramp passes through with the exact slope") {
    auto s = make_measurement_state(50.0);
    double raw = 50.0;
    for (int k = 0; k < 2000; ++k) {
        raw += 0.2 * cfg().sample_period_s;
        s = filter_step(raw, s, cfg());
    }
    CHECK(s.rocof_hz_per_s == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("filter output is monotone toward a constant target") {
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        auto s = make_measurement_state(rng.uniform(49.0, 51.0));
        const double target = rng.uniform(49.0, 51.0);
        double prev = s.filtered_freq_hz;
        for (int k = 0; k < 200; ++k) {
            s = filter_step(target, s, cfg());
            if (target >= prev) {
                CHECK(s.filtered_freq_hz >= prev);
                CHECK(s.filtered_freq_hz <= target);
            } else {
                CHECK(s.filtered_freq_hz <= prev);
                CHECK(s.filtered_freq_hz >= target);
            }
            prev = s.filtered_freq_hz;
        }
    }
}

TEST_CASE("rocof bound: |rocof| <= range of filtered samples / sample period") {
    Rng rng(7);
    auto s = make_measurement_state(50.0);
    double lo = 50.0, hi = 50.0;
    for (int k = 0; k < 5000; ++k) {
        s = filter_step(rng.uniform(48.0, 52.0), s, cfg());
        lo = std::min(lo, s.filtered_freq_hz);
        hi = std::max(hi, s.filtered_freq_hz);
        CHECK(std::abs(s.rocof_hz_per_s) <= (hi - lo) / cfg().sample_period_s + 1e-12);
    }
}

TEST_CASE("non-finite input is rejected") {
    auto s = make_measurement_state(50.0);
    CHECK_THROWS_AS(filter_step(std::nan(""), s, cfg()), std::invalid_argument);
    CHECK_THROWS_AS(filter_step(std::numeric_limits<double>::infinity(), s, cfg()),
                    std::invalid_argument);
}
