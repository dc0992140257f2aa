#pragma once

#include <cmath>
#include <cstdint>

#include "isoscan/radar.hpp"

namespace isoscan {

/// Mechanical scan raster. Angles are sampled at start, start + step, ... up
/// to and including stop (within floating-point slack).
struct ScanGrid {
    double theta_start_deg = -29.5;
    double theta_stop_deg = 29.5;
    double theta_step_deg = 1.0;
    double phi_start_deg = -29.85;
    double phi_stop_deg = 29.85;
    double phi_step_deg = 0.3;
    RangeAxis range_axis;

    std::uint32_t theta_count() const {
        return count_steps(theta_start_deg, theta_stop_deg, theta_step_deg);
    }
    std::uint32_t phi_count() const {
        return count_steps(phi_start_deg, phi_stop_deg, phi_step_deg);
    }
    double theta_at(std::uint32_t i) const { return theta_start_deg + i * theta_step_deg; }
    double phi_at(std::uint32_t j) const { return phi_start_deg + j * phi_step_deg; }

    bool contains(double theta_deg, double phi_deg) const {
        const double slack_t = 1e-9 * theta_step_deg, slack_p = 1e-9 * phi_step_deg;
        return theta_deg >= theta_start_deg - slack_t &&
               theta_deg <= theta_at(theta_count() - 1) + slack_t &&
               phi_deg >= phi_start_deg - slack_p && phi_deg <= phi_at(phi_count() - 1) + slack_p;
    }

    std::uint32_t nearest_theta_index(double theta_deg) const {
        return nearest_index(theta_deg, theta_start_deg, theta_step_deg, theta_count());
    }
    std::uint32_t nearest_phi_index(double phi_deg) const {
        return nearest_index(phi_deg, phi_start_deg, phi_step_deg, phi_count());
    }

    void validate() const {
        if (!(theta_step_deg > 0) || !(phi_step_deg > 0))
            throw validation_error("grid: angular steps must be > 0");
        if (!(theta_start_deg < theta_stop_deg) || !(phi_start_deg < phi_stop_deg))
            throw validation_error("grid: start must be below stop on both angles");
        if (range_axis.bin_count == 0 || !(range_axis.bin_width_m > 0))
            throw validation_error("grid: range axis not initialized");
    }

    bool operator==(const ScanGrid&) const = default;

private:
    static std::uint32_t count_steps(double start, double stop, double step) {
        return static_cast<std::uint32_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    }
    static std::uint32_t nearest_index(double v, double start, double step, std::uint32_t n) {
        double k = std::floor((v - start) / step + 0.5);
        if (k < 0) k = 0;
        if (k > n - 1) k = n - 1;
        return static_cast<std::uint32_t>(k);
    }
};

} // namespace isoscan
