#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "isoscan/noise.hpp"
#include "isoscan/scenario.hpp"

namespace isoscan {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double db_to_power(double db) { return std::isinf(db) && db < 0 ? 0.0 : std::pow(10.0, db / 10.0); }
inline double power_to_db(double p) { return p > 0 ? 10.0 * std::log10(p) : kNegInf; }

/// Power response of one point echo across neighboring range bins, as a
/// function of the offset u in resolution cells. Hann-windowed spectral
/// mainlobe, |sinc(u) / (1 - u^2)|^2, truncated beyond four cells.
inline double range_psf_power(double u) {
    const double au = std::abs(u);
    if (au >= 4.0) return 0.0;
    if (au < 1e-12) return 1.0;
    if (std::abs(au - 1.0) < 1e-12) return 0.25;
    const double x = M_PI * u;
    const double w = (std::sin(x) / x) / (1.0 - u * u);
    return w * w;
}

/// Dual-channel 3D image over the scan grid, stored theta-major
/// (theta, then phi, then range bin), values in dB.
struct PolarimetricImage {
    ScanGrid grid;
    std::vector<float> vv;
    std::vector<float> vh;

    std::size_t voxel_count() const {
        return std::size_t(grid.theta_count()) * grid.phi_count() * grid.range_axis.bin_count;
    }
    std::size_t index(std::uint32_t ti, std::uint32_t pj, std::uint32_t bk) const {
        return (std::size_t(ti) * grid.phi_count() + pj) * grid.range_axis.bin_count + bk;
    }
    const std::vector<float>& field(RxPol pol) const { return pol == RxPol::V ? vv : vh; }
    std::vector<float>& field(RxPol pol) { return pol == RxPol::V ? vv : vh; }
};

/// Axis-aligned box in scan coordinates.
struct Window {
    double theta_min_deg = 0, theta_max_deg = 0;
    double phi_min_deg = 0, phi_max_deg = 0;
    double range_min_m = 0, range_max_m = 0;
};

struct IndexBox {
    std::uint32_t t0, t1, p0, p1, b0, b1; // inclusive
};

inline IndexBox intersect_window(const ScanGrid& grid, const Window& w) {
    const double eps = 1e-9;
    auto lo = [&](double v, double start, double step) {
        return std::max(0.0, std::ceil((v - start) / step - eps));
    };
    auto hi = [&](double v, double start, double step, std::uint32_t n) {
        return std::min(double(n) - 1.0, std::floor((v - start) / step + eps));
    };
    const auto& ax = grid.range_axis;
    double t0 = lo(w.theta_min_deg, grid.theta_start_deg, grid.theta_step_deg);
    double t1 = hi(w.theta_max_deg, grid.theta_start_deg, grid.theta_step_deg, grid.theta_count());
    double p0 = lo(w.phi_min_deg, grid.phi_start_deg, grid.phi_step_deg);
    double p1 = hi(w.phi_max_deg, grid.phi_start_deg, grid.phi_step_deg, grid.phi_count());
    double b0 = lo(w.range_min_m, ax.origin_m, ax.bin_width_m);
    double b1 = hi(w.range_max_m, ax.origin_m, ax.bin_width_m, ax.bin_count);
    if (t0 > t1 || p0 > p1 || b0 > b1)
        throw std::out_of_range("window does not intersect the scan grid");
    return IndexBox{std::uint32_t(t0), std::uint32_t(t1), std::uint32_t(p0),
                    std::uint32_t(p1), std::uint32_t(b0), std::uint32_t(b1)};
}

/// Adds one scatterer's echo power to a per-bin accumulator for the beam
/// pointed at (theta, phi). Power only; noise is applied by the caller.
inline void deposit_scatterer(std::span<double> acc_power, const Scenario& scenario,
                              const Scatterer& scatterer, double beam_theta_deg,
                              double beam_phi_deg, RxPol rx_pol) {
    const double rcs = effective_rcs_dbsm(scatterer, scenario.state_of(scatterer), rx_pol);
    if (std::isinf(rcs) && rcs < 0) return;
    const Direction dir = direction_of(scatterer.position_m);
    const double off = angular_separation_deg(beam_theta_deg, beam_phi_deg, dir.theta_deg, dir.phi_deg);
    const double p = db_to_power(echo_level(scenario.config, rcs, dir.range_m, off, off, rx_pol));
    const auto& ax = scenario.grid.range_axis;
    const double center = (dir.range_m - ax.origin_m) / ax.bin_width_m;
    const auto k_lo = std::uint32_t(std::max(0.0, std::ceil(center - 4.0)));
    const auto k_hi = std::uint32_t(std::min(double(ax.bin_count) - 1.0, std::floor(center + 4.0)));
    for (std::uint32_t k = k_lo; k <= k_hi && k < ax.bin_count; ++k)
        acc_power[k] += p * range_psf_power(double(k) - center);
}

/// Beat-frequency spectrum (echo level vs range bin, dB) for one beam
/// direction and receive channel. Contributions power-sum per bin, then the
/// noise floor and optional seeded speckle are added.
inline std::vector<double> beat_spectrum(const Scenario& scenario, double beam_theta_deg,
                                         double beam_phi_deg, RxPol rx_pol,
                                         std::uint64_t seed = 0) {
    if (!scenario.grid.contains(beam_theta_deg, beam_phi_deg))
        throw std::out_of_range("beam direction outside scan grid");
    const auto& ax = scenario.grid.range_axis;
    std::vector<double> power(ax.bin_count, 0.0);
    for (const auto& s : scenario.scatterers)
        deposit_scatterer(power, scenario, s, beam_theta_deg, beam_phi_deg, rx_pol);

    const double floor_p = db_to_power(scenario.config.noise_floor_db);
    const double speckle_p = db_to_power(scenario.config.noise_speckle_db);
    const std::uint32_t ti = scenario.grid.nearest_theta_index(beam_theta_deg);
    const std::uint32_t pj = scenario.grid.nearest_phi_index(beam_phi_deg);
    const auto channel = std::uint32_t(rx_pol);
    std::vector<double> out(ax.bin_count);
    for (std::uint32_t k = 0; k < ax.bin_count; ++k) {
        double p = power[k] + floor_p;
        if (speckle_p > 0)
            p += speckle_p * rng::unit_exponential(rng::voxel_key(seed, channel, ti, pj, k));
        out[k] = power_to_db(p);
    }
    return out;
}

namespace detail {

inline unsigned worker_count(std::uint32_t rows) {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("ISOSCAN_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) n = std::min<unsigned>(n, unsigned(v));
    }
    return std::min<unsigned>(n, rows);
}

} // namespace detail

/// Runs the full mechanical scan and assembles both polarimetric fields.
/// Directions are independent, so rows are computed in parallel; the result
/// is identical to a sequential scan for any worker count.
inline PolarimetricImage build_image(const Scenario& scenario, std::uint64_t seed = 0) {
    scenario.validate();
    PolarimetricImage img;
    img.grid = scenario.grid;
    img.vv.assign(img.voxel_count(), 0.0f);
    img.vh.assign(img.voxel_count(), 0.0f);
    const std::uint32_t tn = img.grid.theta_count(), pn = img.grid.phi_count();
    const std::uint32_t bins = img.grid.range_axis.bin_count;

    auto run_rows = [&](std::uint32_t t_begin, std::uint32_t t_end) {
        for (std::uint32_t ti = t_begin; ti < t_end; ++ti) {
            const double theta = img.grid.theta_at(ti);
            for (std::uint32_t pj = 0; pj < pn; ++pj) {
                const double phi = img.grid.phi_at(pj);
                for (RxPol pol : {RxPol::V, RxPol::H}) {
                    const auto spec = beat_spectrum(scenario, theta, phi, pol, seed);
                    float* dst = img.field(pol).data() + img.index(ti, pj, 0);
                    for (std::uint32_t k = 0; k < bins; ++k) dst[k] = float(spec[k]);
                }
            }
        }
    };

    const unsigned workers = detail::worker_count(tn);
    if (workers <= 1) {
        run_rows(0, tn);
    } else {
        std::vector<std::thread> pool;
        const std::uint32_t chunk = (tn + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::uint32_t lo = w * chunk, hi = std::min(tn, lo + chunk);
            if (lo < hi) pool.emplace_back(run_rows, lo, hi);
        }
        for (auto& t : pool) t.join();
    }
    return img;
}

struct Peak {
    double value_db = kNegInf;
    std::uint32_t theta_i = 0, phi_j = 0, bin = 0;
};

/// Maximum voxel of one field inside a window; ties keep the first location
/// in scan order.
inline Peak image_max_in_window(const PolarimetricImage& image, RxPol pol, const Window& window) {
    const IndexBox box = intersect_window(image.grid, window);
    const auto& f = image.field(pol);
    Peak peak;
    bool first = true;
    for (std::uint32_t ti = box.t0; ti <= box.t1; ++ti)
        for (std::uint32_t pj = box.p0; pj <= box.p1; ++pj)
            for (std::uint32_t bk = box.b0; bk <= box.b1; ++bk) {
                const double v = f[image.index(ti, pj, bk)];
                if (first || v > peak.value_db) {
                    peak = Peak{v, ti, pj, bk};
                    first = false;
                }
            }
    return peak;
}

} // namespace isoscan
