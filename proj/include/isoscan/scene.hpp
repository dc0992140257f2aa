#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "isoscan/radar.hpp"

namespace isoscan {

enum class SensorState : std::uint8_t { Off = 0, On = 1 };

inline const char* to_string(SensorState s) { return s == SensorState::On ? "ON" : "OFF"; }

/// Linear backscatter amplitudes under V illumination. s_vv drives the
/// co-polarized return, s_vh the cross-polarized (depolarized) one.
struct ScatteringMatrix {
    double s_vv = 0.0;
    double s_vh = 0.0;

    double rcs_vv_dbsm() const {
        return s_vv > 0 ? 20.0 * std::log10(s_vv) : -std::numeric_limits<double>::infinity();
    }
    double rcs_vh_dbsm() const {
        return s_vh > 0 ? 20.0 * std::log10(s_vh) : -std::numeric_limits<double>::infinity();
    }

    void validate(const std::string& where) const {
        if (!(s_vv >= 0) || !std::isfinite(s_vv) || !(s_vh >= 0) || !std::isfinite(s_vh))
            throw validation_error(where + ": amplitudes must be finite and >= 0");
        if (s_vv == 0 && s_vh == 0)
            throw validation_error(where + ": at least one amplitude must be > 0");
    }
};

struct Vec3 {
    double x = 0, y = 0, z = 0;
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

/// Beam/target direction as seen from the radar at the origin. Boresight is
/// +y; theta is elevation above the horizontal x-y plane, phi is azimuth in
/// the horizontal plane, positive toward +x.
struct Direction {
    double theta_deg = 0;
    double phi_deg = 0;
    double range_m = 0;
};

inline double deg_to_rad(double d) { return d * M_PI / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / M_PI; }

inline Direction direction_of(const Vec3& position) {
    const double r = position.norm();
    if (!(r > 0)) throw std::domain_error("direction_of: zero position vector");
    return Direction{rad_to_deg(std::asin(position.z / r)),
                     rad_to_deg(std::atan2(position.x, position.y)), r};
}

inline Vec3 direction_to_position(const Direction& d) {
    const double ct = std::cos(deg_to_rad(d.theta_deg));
    return Vec3{d.range_m * ct * std::sin(deg_to_rad(d.phi_deg)),
                d.range_m * ct * std::cos(deg_to_rad(d.phi_deg)),
                d.range_m * std::sin(deg_to_rad(d.theta_deg))};
}

/// Great-circle angle between two beam directions, in degrees.
inline double angular_separation_deg(double theta_a_deg, double phi_a_deg,
                                     double theta_b_deg, double phi_b_deg) {
    const double ta = deg_to_rad(theta_a_deg), pa = deg_to_rad(phi_a_deg);
    const double tb = deg_to_rad(theta_b_deg), pb = deg_to_rad(phi_b_deg);
    double c = std::sin(ta) * std::sin(tb) + std::cos(ta) * std::cos(tb) * std::cos(pa - pb);
    c = std::clamp(c, -1.0, 1.0);
    return rad_to_deg(std::acos(c));
}

enum class ScattererKind : std::uint8_t { Sensor = 0, Clutter = 1 };

/// Point target. Sensors switch between the on/off matrices; clutter uses a
/// single matrix regardless of state.
struct Scatterer {
    std::string id;
    Vec3 position_m;
    ScattererKind kind = ScattererKind::Clutter;
    ScatteringMatrix state_on;
    ScatteringMatrix state_off;

    const ScatteringMatrix& matrix_for(SensorState state) const {
        if (kind == ScattererKind::Clutter) return state_off;
        return state == SensorState::On ? state_on : state_off;
    }

    void validate() const {
        if (!(position_m.norm() > 0))
            throw validation_error("scatterer '" + id + "': position norm must be > 0");
        if (kind == ScattererKind::Sensor) {
            state_on.validate("scatterer '" + id + "' on");
            state_off.validate("scatterer '" + id + "' off");
        } else {
            state_off.validate("scatterer '" + id + "'");
        }
    }
};

/// RCS presented to the chosen receive channel for the given state.
inline double effective_rcs_dbsm(const Scatterer& scatterer, SensorState state, RxPol rx_pol) {
    const ScatteringMatrix& m = scatterer.matrix_for(state);
    return rx_pol == RxPol::V ? m.rcs_vv_dbsm() : m.rcs_vh_dbsm();
}

} // namespace isoscan
