#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "isoscan/errors.hpp"

namespace isoscan {

inline constexpr double kSpeedOfLight = 299'792'458.0; // m/s

/// Receive polarization of the dechirped channel. The transmitter is V-polarized,
/// so V selects the co-polarized (VV) channel and H the cross-polarized (VH) one.
enum class RxPol : std::uint8_t { V = 0, H = 1 };

inline const char* to_string(RxPol p) { return p == RxPol::V ? "VV" : "VH"; }

/// FM-CW reader parameters. Echo levels are expressed on a relative dB scale:
/// a target of cal_rcs_dbsm at cal_range_m on boresight reads exactly 0 dB.
struct RadarConfig {
    double carrier_frequency_hz = 23.8e9; // chirp center frequency
    double bandwidth_hz = 2.0e9;          // swept bandwidth, sets range resolution
    double chirp_duration_s = 1e-3;
    double tx_gain_dbi = 28.0;            // lens horn, V-polarized
    double tx_hpbw_deg = 6.0;             // half-power beamwidth of the Tx horn
    double rx_gain_v_dbi = 20.0;          // V-polarized receive horn
    double rx_gain_h_dbi = 20.0;          // H-polarized receive horn
    double rx_hpbw_deg = 20.0;
    double tx_power_dbm = 10.0;           // absorbed by the calibration offset
    double noise_floor_db = -25.0;        // additive power floor on the relative scale
    double noise_speckle_db = -std::numeric_limits<double>::infinity(); // mean speckle power; -inf disables
    std::uint32_t fft_size = 1024;        // beat-spectrum FFT length; bin count is fft_size/2
    double range_max_m = 8.0;             // furthest allowed scatterer range
    double cal_rcs_dbsm = 0.0;            // reference target RCS for the 0 dB point
    double cal_range_m = 1.0;             // reference range for the 0 dB point

    double wavelength_m() const { return kSpeedOfLight / carrier_frequency_hz; }

    void validate() const {
        if (!(bandwidth_hz > 0)) throw validation_error("config.bandwidth_hz must be > 0");
        if (!(carrier_frequency_hz > bandwidth_hz / 2))
            throw validation_error("config.carrier_frequency_hz must exceed bandwidth_hz/2");
        if (!(chirp_duration_s > 0)) throw validation_error("config.chirp_duration_s must be > 0");
        if (fft_size == 0 || (fft_size & (fft_size - 1)) != 0)
            throw validation_error("config.fft_size must be a power of two");
        if (!(range_max_m > 0)) throw validation_error("config.range_max_m must be > 0");
        if (!(tx_hpbw_deg > 0) || !(rx_hpbw_deg > 0))
            throw validation_error("config antenna HPBW must be > 0");
        if (!(cal_range_m > 0)) throw validation_error("config.cal_range_m must be > 0");
        if (std::isnan(noise_floor_db) || noise_floor_db == std::numeric_limits<double>::infinity())
            throw validation_error("config.noise_floor_db must be finite or -inf");
    }
};

/// Range resolution of the chirp, c / (2 B).
inline double range_resolution(const RadarConfig& config) {
    return kSpeedOfLight / (2.0 * config.bandwidth_hz);
}

/// Discretized range dimension of the beat spectrum. Bin k is centered at
/// origin_m + k * bin_width_m.
struct RangeAxis {
    std::uint32_t bin_count = 0;
    double bin_width_m = 0.0;
    double origin_m = 0.0;

    static RangeAxis from_config(const RadarConfig& config) {
        RangeAxis axis;
        axis.bin_count = config.fft_size / 2;
        axis.bin_width_m = range_resolution(config);
        axis.origin_m = 0.0;
        if (axis.span_m() < config.range_max_m)
            throw validation_error("config.fft_size too small: range axis ends at " +
                                   std::to_string(axis.span_m()) + " m, below range_max_m");
        return axis;
    }

    double span_m() const { return origin_m + bin_count * bin_width_m; }
    double bin_center_m(std::uint32_t k) const { return origin_m + k * bin_width_m; }

    bool operator==(const RangeAxis&) const = default;
};

/// Nearest bin index for a range, rounding half-up at exact midpoints.
/// Ranges in the trailing half bin map to the last bin.
inline std::uint32_t range_to_bin(const RangeAxis& axis, double range_m) {
    if (range_m < axis.origin_m || range_m >= axis.span_m())
        throw std::out_of_range("range " + std::to_string(range_m) + " m outside range axis");
    auto k = static_cast<std::uint32_t>(std::floor((range_m - axis.origin_m) / axis.bin_width_m + 0.5));
    if (k >= axis.bin_count) k = axis.bin_count - 1;
    return k;
}

inline double bin_to_range(const RangeAxis& axis, std::uint32_t bin) {
    return axis.bin_center_m(bin);
}

/// Gaussian mainlobe gain pattern, parabolic in dB with no sidelobes.
/// Exactly peak - 3 dB at off_axis = hpbw / 2.
inline double antenna_gain(double peak_gain_dbi, double hpbw_deg, double off_axis_deg) {
    const double u = 2.0 * off_axis_deg / hpbw_deg;
    return peak_gain_dbi - 3.0 * u * u;
}

/// Offset subtracted from the monostatic radar equation so the reference
/// target reads 0 dB. Referenced to the V receive channel on boresight.
inline double calibration_offset_db(const RadarConfig& config) {
    return config.tx_power_dbm + config.tx_gain_dbi + config.rx_gain_v_dbi +
           20.0 * std::log10(config.wavelength_m()) + config.cal_rcs_dbsm -
           30.0 * std::log10(4.0 * M_PI) - 40.0 * std::log10(config.cal_range_m);
}

/// Monostatic radar-equation echo level on the calibrated relative dB scale.
inline double echo_level(const RadarConfig& config, double rcs_dbsm, double range_m,
                         double tx_off_axis_deg, double rx_off_axis_deg, RxPol rx_pol) {
    if (!(range_m > 0)) throw std::domain_error("echo_level: range must be > 0");
    const double rx_gain = rx_pol == RxPol::V ? config.rx_gain_v_dbi : config.rx_gain_h_dbi;
    return config.tx_power_dbm +
           antenna_gain(config.tx_gain_dbi, config.tx_hpbw_deg, tx_off_axis_deg) +
           antenna_gain(rx_gain, config.rx_hpbw_deg, rx_off_axis_deg) +
           20.0 * std::log10(config.wavelength_m()) + rcs_dbsm -
           30.0 * std::log10(4.0 * M_PI) - 40.0 * std::log10(range_m) -
           calibration_offset_db(config);
}

} // namespace isoscan
