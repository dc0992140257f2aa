#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "isoscan/radar.hpp"

using namespace isoscan;
using Catch::Approx;

TEST_CASE("range resolution follows c / 2B") {
    RadarConfig cfg;
    cfg.bandwidth_hz = 2e9;
    CHECK(range_resolution(cfg) == Approx(0.0749481145).epsilon(1e-9));
    cfg.bandwidth_hz = 1e9;
    CHECK(range_resolution(cfg) == Approx(0.1498962290).epsilon(1e-9));
}

TEST_CASE("range resolution scales inversely with bandwidth and ignores carrier") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> band(0.1e9, 4e9), carrier(10e9, 80e9);
    for (int i = 0; i < 50; ++i) {
        RadarConfig a;
        a.bandwidth_hz = band(rng);
        a.carrier_frequency_hz = carrier(rng);
        RadarConfig b = a;
        b.bandwidth_hz = 2 * a.bandwidth_hz;
        CHECK(range_resolution(b) == Approx(range_resolution(a) / 2).epsilon(1e-12));
        b = a;
        b.carrier_frequency_hz = carrier(rng);
        CHECK(range_resolution(b) == range_resolution(a));
    }
}

TEST_CASE("default wavelength is 12.6 mm") {
    CHECK(RadarConfig{}.wavelength_m() == Approx(0.0126).margin(1e-4));
}

TEST_CASE("config validation") {
    RadarConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.fft_size = 1000; // not a power of two
    CHECK_THROWS_AS(cfg.validate(), validation_error);
    cfg = RadarConfig{};
    cfg.bandwidth_hz = -1;
    CHECK_THROWS_AS(cfg.validate(), validation_error);
    cfg = RadarConfig{};
    cfg.carrier_frequency_hz = 0.4 * cfg.bandwidth_hz;
    CHECK_THROWS_AS(cfg.validate(), validation_error);
    cfg = RadarConfig{};
    cfg.range_max_m = 0;
    CHECK_THROWS_AS(cfg.validate(), validation_error);
}

TEST_CASE("echo level obeys the R^-4 law") {
    RadarConfig cfg;
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> range(0.5, 20.0), rcs(-30.0, 30.0);
    for (int i = 0; i < 50; ++i) {
        const double r = range(rng), s = rcs(rng);
        const double base = echo_level(cfg, s, r, 0, 0, RxPol::V);
        const double doubled = echo_level(cfg, s, 2 * r, 0, 0, RxPol::V);
        CHECK(base - doubled == Approx(40.0 * std::log10(2.0)).epsilon(1e-12));
        CHECK(base - doubled == Approx(12.04).margin(0.01));
    }
}

TEST_CASE("echo level is linear in RCS") {
    RadarConfig cfg;
    const double base = echo_level(cfg, -10.0, 3.0, 1.0, 2.0, RxPol::H);
    CHECK(echo_level(cfg, -7.0, 3.0, 1.0, 2.0, RxPol::H) == Approx(base + 3.0).epsilon(1e-12));
}

TEST_CASE("reference target reads 0 dB by construction") {
    RadarConfig cfg;
    CHECK(echo_level(cfg, cfg.cal_rcs_dbsm, cfg.cal_range_m, 0, 0, RxPol::V) ==
          Approx(0.0).margin(1e-12));
    cfg.cal_rcs_dbsm = -7.5;
    cfg.cal_range_m = 3.2;
    CHECK(echo_level(cfg, cfg.cal_rcs_dbsm, cfg.cal_range_m, 0, 0, RxPol::V) ==
          Approx(0.0).margin(1e-12));
}

TEST_CASE("echo level is monotonic in range and RCS") {
    RadarConfig cfg;
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> range(0.5, 20.0), rcs(-30.0, 30.0), d(0.01, 5.0);
    for (int i = 0; i < 100; ++i) {
        const double r = range(rng), s = rcs(rng);
        CHECK(echo_level(cfg, s, r + d(rng), 0, 0, RxPol::V) < echo_level(cfg, s, r, 0, 0, RxPol::V));
        CHECK(echo_level(cfg, s + d(rng), r, 0, 0, RxPol::V) > echo_level(cfg, s, r, 0, 0, RxPol::V));
    }
}

TEST_CASE("echo level rejects nonpositive range") {
    CHECK_THROWS_AS(echo_level(RadarConfig{}, 0, 0.0, 0, 0, RxPol::V), std::domain_error);
    CHECK_THROWS_AS(echo_level(RadarConfig{}, 0, -1.0, 0, 0, RxPol::V), std::domain_error);
}

TEST_CASE("antenna pattern hits -3 dB at half the beamwidth") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> gain(0.0, 40.0), width(1.0, 40.0);
    for (int i = 0; i < 50; ++i) {
        const double g = gain(rng), w = width(rng);
        CHECK(antenna_gain(g, w, w / 2) == Approx(g - 3.0).epsilon(1e-12));
    }
}

TEST_CASE("nearest range bin, half-up") {
    RangeAxis axis{64, 0.075, 0.0};
    CHECK(range_to_bin(axis, 2.5) == 33); // 33.33 rounds down
    CHECK(range_to_bin(axis, 0.0) == 0);
    CHECK(range_to_bin(axis, 10 * 0.075) == 10);        // exact center
    CHECK(range_to_bin(axis, 10.5 * 0.075) == 11);      // midpoint rounds up
    CHECK(range_to_bin(axis, 63.9 * 0.075) == 63);      // trailing half bin clamps
    CHECK_THROWS_AS(range_to_bin(axis, -0.01), std::out_of_range);
    CHECK_THROWS_AS(range_to_bin(axis, 64 * 0.075), std::out_of_range);
}

TEST_CASE("bin round trip stays within half a bin") {
    RangeAxis axis{128, 0.0749481145, 0.0};
    std::mt19937 rng(19);
    std::uniform_real_distribution<double> range(0.0, axis.span_m() - 1e-9);
    for (int i = 0; i < 200; ++i) {
        const double r = range(rng);
        CHECK(std::abs(bin_to_range(axis, range_to_bin(axis, r)) - r) <=
              axis.bin_width_m / 2 + 1e-12);
    }
}

TEST_CASE("range axis derives from the config") {
    RadarConfig cfg;
    const RangeAxis axis = RangeAxis::from_config(cfg);
    CHECK(axis.bin_count == 512);
    CHECK(axis.bin_width_m == Approx(0.0749481145).epsilon(1e-9));
    CHECK(axis.origin_m == 0.0);
    for (std::uint32_t k = 1; k < axis.bin_count; ++k)
        CHECK(axis.bin_center_m(k) > axis.bin_center_m(k - 1));

    RadarConfig tiny;
    tiny.fft_size = 64; // 32 bins * 7.5 cm = 2.4 m < range_max
    CHECK_THROWS_AS(RangeAxis::from_config(tiny), validation_error);
}
