#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "isoscan/isolines.hpp"

namespace isoscan {

/// Known sensor placement used to associate image regions with sensors.
struct SensorSite {
    std::string id;
    Direction expected;
};

inline std::vector<SensorSite> sensor_sites(const Scenario& scenario) {
    std::vector<SensorSite> sites;
    for (const Scatterer* s : scenario.sensors())
        sites.push_back({s->id, direction_of(s->position_m)});
    return sites;
}

struct MatchGate {
    double theta_steps = 3.0;
    double phi_steps = 3.0;
    double range_bins = 3.0;
};

struct RegionMatch {
    std::optional<std::size_t> on;
    std::optional<std::size_t> off;
};

namespace detail {

/// Greedy nearest-first assignment of sensors to region peaks within the
/// gate. A sensor whose only in-gate candidates were claimed by other
/// sensors is an ambiguity, not an absence.
inline std::map<std::string, std::optional<std::size_t>>
match_one_list(const std::vector<Region>& regions, const std::vector<SensorSite>& sensors,
               const MatchGate& gate, const ScanGrid& grid) {
    struct Pair {
        double dist;
        std::size_t sensor, region;
    };
    std::vector<Pair> pairs;
    for (std::size_t si = 0; si < sensors.size(); ++si) {
        const auto& e = sensors[si].expected;
        for (std::size_t ri = 0; ri < regions.size(); ++ri) {
            const Peak& p = regions[ri].peak;
            const double dt = (grid.theta_at(p.theta_i) - e.theta_deg) / grid.theta_step_deg;
            const double dp = (grid.phi_at(p.phi_j) - e.phi_deg) / grid.phi_step_deg;
            const double db = (grid.range_axis.bin_center_m(p.bin) - e.range_m) /
                              grid.range_axis.bin_width_m;
            if (std::abs(dt) > gate.theta_steps + 1e-9 || std::abs(dp) > gate.phi_steps + 1e-9 ||
                std::abs(db) > gate.range_bins + 1e-9)
                continue;
            pairs.push_back({std::sqrt(dt * dt + dp * dp + db * db), si, ri});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        return std::tuple(a.dist, a.sensor, a.region) < std::tuple(b.dist, b.sensor, b.region);
    });

    std::map<std::string, std::optional<std::size_t>> out;
    for (const auto& s : sensors) out[s.id] = std::nullopt;
    std::vector<bool> region_taken(regions.size(), false);
    std::vector<std::optional<std::size_t>> sensor_to_region(sensors.size());
    std::vector<bool> sensor_had_candidate(sensors.size(), false);
    for (const auto& p : pairs) {
        sensor_had_candidate[p.sensor] = true;
        if (sensor_to_region[p.sensor] || region_taken[p.region]) continue;
        sensor_to_region[p.sensor] = p.region;
        region_taken[p.region] = true;
    }
    for (std::size_t si = 0; si < sensors.size(); ++si) {
        if (!sensor_to_region[si] && sensor_had_candidate[si]) {
            // every candidate was claimed; name the claimant of the nearest one
            for (const auto& p : pairs) {
                if (p.sensor != si) continue;
                for (std::size_t sj = 0; sj < sensors.size(); ++sj)
                    if (sensor_to_region[sj] == p.region)
                        throw analysis_error("sensors '" + sensors[si].id + "' and '" +
                                             sensors[sj].id + "' match the same region " +
                                             regions[p.region].id);
            }
        }
        out[sensors[si].id] = sensor_to_region[si];
    }
    return out;
}

} // namespace detail

/// Associates each sensor with at most one region per state list. Unmatched
/// slots stay empty (e.g. sub-threshold OFF states in VH).
inline std::map<std::string, RegionMatch>
match_regions(const std::vector<Region>& on_regions, const std::vector<Region>& off_regions,
              const std::vector<SensorSite>& sensors, const ScanGrid& grid,
              const MatchGate& gate = {}) {
    for (std::size_t i = 0; i < sensors.size(); ++i)
        for (std::size_t j = i + 1; j < sensors.size(); ++j)
            if (sensors[i].expected.theta_deg == sensors[j].expected.theta_deg &&
                sensors[i].expected.phi_deg == sensors[j].expected.phi_deg &&
                sensors[i].expected.range_m == sensors[j].expected.range_m)
                throw validation_error("sensors '" + sensors[i].id + "' and '" + sensors[j].id +
                                       "' share the same expected position");
    auto on = detail::match_one_list(on_regions, sensors, gate, grid);
    auto off = detail::match_one_list(off_regions, sensors, gate, grid);
    std::map<std::string, RegionMatch> out;
    for (const auto& s : sensors) out[s.id] = RegionMatch{on[s.id], off[s.id]};
    return out;
}

struct DynamicRange {
    double e_on_db = kNegInf;
    double e_off_db = kNegInf;
    double delta_db = 0;
};

/// Highest echo level in the window for each state, and their dB gap.
inline DynamicRange dynamic_range(const PolarimetricImage& on_image,
                                  const PolarimetricImage& off_image, const Window& window,
                                  RxPol polarization) {
    if (!(on_image.grid == off_image.grid))
        throw validation_error("dynamic_range: on/off images use different grids");
    const double e_on = image_max_in_window(on_image, polarization, window).value_db;
    const double e_off = image_max_in_window(off_image, polarization, window).value_db;
    return DynamicRange{e_on, e_off, std::abs(e_on - e_off)};
}

/// One row of the sensor report.
struct SensorReading {
    std::string sensor_id;
    double range_m = 0; // measured at the strongest matched region peak
    double e_vv_on = kNegInf, e_vv_off = kNegInf, delta_vv = 0;
    double e_vh_on = kNegInf, e_vh_off = kNegInf, delta_vh = 0;
};

struct AnalysisOptions {
    double min_threshold_db = -10.0;
    std::vector<double> levels_db; // empty -> default schedule
    MatchGate gate;
    LinkageOptions linkage;
    double expected_halfwidth_steps = 3.0; // fallback window half-size, steps/bins
};

struct AnalysisReport {
    std::vector<SensorReading> readings;
    std::vector<std::string> unmatched; // sensors with no region in any state/polarization
};

namespace detail {

inline Window expected_window(const ScanGrid& grid, const Direction& e, double half_steps) {
    return Window{e.theta_deg - half_steps * grid.theta_step_deg,
                  e.theta_deg + half_steps * grid.theta_step_deg,
                  e.phi_deg - half_steps * grid.phi_step_deg,
                  e.phi_deg + half_steps * grid.phi_step_deg,
                  e.range_m - half_steps * grid.range_axis.bin_width_m,
                  e.range_m + half_steps * grid.range_axis.bin_width_m};
}

} // namespace detail

/// Full per-sensor readout: isolines, regions, matching, and window maxima
/// in both polarizations and states. When a state has no matched region the
/// window falls back to the other state's region, then to a box around the
/// expected position.
inline AnalysisReport analyze_sensors(const PolarimetricImage& on_image,
                                      const PolarimetricImage& off_image,
                                      const std::vector<SensorSite>& sensors,
                                      const AnalysisOptions& opt = {}) {
    if (!(on_image.grid == off_image.grid))
        throw validation_error("analyze_sensors: on/off images use different grids");
    const ScanGrid& grid = on_image.grid;

    AnalysisReport report;
    std::map<std::string, SensorReading> rows;
    std::map<std::string, bool> any_match;
    std::map<std::string, double> best_range, best_level;
    for (const auto& s : sensors) {
        rows[s.id].sensor_id = s.id;
        rows[s.id].range_m = s.expected.range_m; // fallback when nothing matches
        any_match[s.id] = false;
        best_level[s.id] = kNegInf;
    }

    for (RxPol pol : {RxPol::V, RxPol::H}) {
        const auto iso_on = extract_isolines(on_image, pol, opt.levels_db, opt.min_threshold_db);
        const auto iso_off = extract_isolines(off_image, pol, opt.levels_db, opt.min_threshold_db);
        const auto regions_on = cluster_regions(iso_on, on_image, opt.linkage);
        const auto regions_off = cluster_regions(iso_off, off_image, opt.linkage);
        const auto matches = match_regions(regions_on, regions_off, sensors, grid, opt.gate);

        for (const auto& site : sensors) {
            const RegionMatch& m = matches.at(site.id);
            const Window fallback =
                detail::expected_window(grid, site.expected, opt.expected_halfwidth_steps);
            const Window* on_w = m.on ? &regions_on[*m.on].bbox
                                      : (m.off ? &regions_off[*m.off].bbox : &fallback);
            const Window* off_w = m.off ? &regions_off[*m.off].bbox
                                        : (m.on ? &regions_on[*m.on].bbox : &fallback);
            const double e_on = image_max_in_window(on_image, pol, *on_w).value_db;
            const double e_off = image_max_in_window(off_image, pol, *off_w).value_db;
            SensorReading& row = rows[site.id];
            if (pol == RxPol::V) {
                row.e_vv_on = e_on;
                row.e_vv_off = e_off;
                row.delta_vv = std::abs(e_on - e_off);
            } else {
                row.e_vh_on = e_on;
                row.e_vh_off = e_off;
                row.delta_vh = std::abs(e_on - e_off);
            }
            if (m.on || m.off) {
                any_match[site.id] = true;
                // report the range seen at the strongest matched peak
                const Region* src = m.on ? &regions_on[*m.on] : &regions_off[*m.off];
                if (m.on && m.off && regions_off[*m.off].peak.value_db > src->peak.value_db)
                    src = &regions_off[*m.off];
                if (src->peak.value_db > best_level[site.id]) {
                    best_level[site.id] = src->peak.value_db;
                    best_range[site.id] = grid.range_axis.bin_center_m(src->peak.bin);
                }
            }
        }
    }

    for (const auto& site : sensors) {
        if (best_range.count(site.id)) rows[site.id].range_m = best_range[site.id];
        if (!any_match[site.id]) report.unmatched.push_back(site.id);
        report.readings.push_back(rows[site.id]);
    }
    std::sort(report.readings.begin(), report.readings.end(),
              [](const SensorReading& a, const SensorReading& b) {
                  return std::tuple(a.range_m, a.sensor_id) < std::tuple(b.range_m, b.sensor_id);
              });
    return report;
}

/// Variant taking the sensor lists of both campaigns; they must agree.
inline AnalysisReport analyze_sensors(const PolarimetricImage& on_image,
                                      const PolarimetricImage& off_image,
                                      const std::vector<SensorSite>& on_sensors,
                                      const std::vector<SensorSite>& off_sensors,
                                      const AnalysisOptions& opt = {}) {
    auto ids = [](const std::vector<SensorSite>& v) {
        std::vector<std::string> out;
        for (const auto& s : v) out.push_back(s.id);
        std::sort(out.begin(), out.end());
        return out;
    };
    if (ids(on_sensors) != ids(off_sensors))
        throw validation_error("sensor lists differ between the on and off scenarios");
    return analyze_sensors(on_image, off_image, on_sensors, opt);
}

} // namespace isoscan
