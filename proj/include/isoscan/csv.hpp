#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "isoscan/analysis.hpp"
#include "isoscan/isolines.hpp"

namespace isoscan {

namespace detail {

inline std::string fmt_g(double v, int digits = 12) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}
inline std::string fmt_f1(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_num(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw validation_error(what + ": cannot parse number '" + s + "'");
    }
}

inline void check_id(const std::string& id) {
    if (id.find(',') != std::string::npos || id.find('\n') != std::string::npos)
        throw validation_error("id '" + id + "' contains a CSV delimiter");
}

} // namespace detail

// ---- isoline CSV: one row per vertex -------------------------------------

inline void write_isolines_csv(std::ostream& out, const IsolineSet& set, const RangeAxis& axis) {
    out << "polarization,level_db,range_m,vertex_index,theta_deg,phi_deg,closed\n";
    for (const auto& iso : set.isolines) {
        const std::string range = detail::fmt_g(axis.bin_center_m(iso.range_bin));
        for (std::size_t vi = 0; vi < iso.vertices.size(); ++vi)
            out << to_string(set.polarization) << ',' << detail::fmt_g(iso.level_db) << ','
                << range << ',' << vi << ',' << detail::fmt_g(iso.vertices[vi][0]) << ','
                << detail::fmt_g(iso.vertices[vi][1]) << ',' << (iso.closed ? 1 : 0) << '\n';
    }
}

inline IsolineSet read_isolines_csv(std::istream& in, const RangeAxis& axis) {
    std::string line;
    if (!std::getline(in, line) ||
        detail::split_csv_line(line).size() != 7)
        throw validation_error("isoline CSV: missing or malformed header row");
    IsolineSet set;
    bool have_pol = false;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        const std::string where = "isoline CSV row " + std::to_string(row);
        if (f.size() != 7) throw validation_error(where + ": expected 7 columns");
        const RxPol pol = f[0] == "VV" ? RxPol::V : RxPol::H;
        if (f[0] != "VV" && f[0] != "VH")
            throw validation_error(where + ": polarization must be VV or VH");
        if (!have_pol) {
            set.polarization = pol;
            have_pol = true;
        } else if (pol != set.polarization) {
            throw validation_error(where + ": mixed polarizations in one file");
        }
        const double level = detail::parse_num(f[1], where);
        const double range = detail::parse_num(f[2], where);
        const auto vertex_index = std::size_t(detail::parse_num(f[3], where));
        if (vertex_index == 0) {
            Isoline iso;
            iso.level_db = level;
            iso.range_bin = range_to_bin(axis, range);
            iso.closed = f[6] == "1";
            set.isolines.push_back(std::move(iso));
        }
        if (set.isolines.empty())
            throw validation_error(where + ": vertex indices must start at 0");
        set.isolines.back().vertices.push_back(
            {detail::parse_num(f[4], where), detail::parse_num(f[5], where)});
    }
    for (const auto& iso : set.isolines) {
        bool known = false;
        for (double l : set.levels_db) known |= l == iso.level_db;
        if (!known) set.levels_db.push_back(iso.level_db);
    }
    std::sort(set.levels_db.begin(), set.levels_db.end());
    set.min_threshold_db = set.levels_db.empty() ? 0.0 : set.levels_db.front();
    return set;
}

// ---- region CSV -----------------------------------------------------------

inline void write_regions_csv(std::ostream& out, const std::vector<Region>& regions,
                              const ScanGrid& grid) {
    out << "id,theta_min_deg,theta_max_deg,phi_min_deg,phi_max_deg,range_min_m,range_max_m,"
           "peak_db,peak_theta_deg,peak_phi_deg,peak_range_m\n";
    for (const auto& r : regions) {
        detail::check_id(r.id);
        out << r.id << ',' << detail::fmt_g(r.bbox.theta_min_deg) << ','
            << detail::fmt_g(r.bbox.theta_max_deg) << ',' << detail::fmt_g(r.bbox.phi_min_deg)
            << ',' << detail::fmt_g(r.bbox.phi_max_deg) << ','
            << detail::fmt_g(r.bbox.range_min_m) << ',' << detail::fmt_g(r.bbox.range_max_m)
            << ',' << detail::fmt_g(r.peak.value_db) << ','
            << detail::fmt_g(grid.theta_at(r.peak.theta_i)) << ','
            << detail::fmt_g(grid.phi_at(r.peak.phi_j)) << ','
            << detail::fmt_g(grid.range_axis.bin_center_m(r.peak.bin)) << '\n';
    }
}

inline std::vector<Region> read_regions_csv(std::istream& in, const ScanGrid& grid) {
    std::string line;
    if (!std::getline(in, line) || detail::split_csv_line(line).size() != 11)
        throw validation_error("region CSV: missing or malformed header row");
    std::vector<Region> regions;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        const std::string where = "region CSV row " + std::to_string(row);
        if (f.size() != 11) throw validation_error(where + ": expected 11 columns");
        Region r;
        r.id = f[0];
        r.bbox = Window{detail::parse_num(f[1], where), detail::parse_num(f[2], where),
                        detail::parse_num(f[3], where), detail::parse_num(f[4], where),
                        detail::parse_num(f[5], where), detail::parse_num(f[6], where)};
        r.peak.value_db = detail::parse_num(f[7], where);
        r.peak.theta_i = grid.nearest_theta_index(detail::parse_num(f[8], where));
        r.peak.phi_j = grid.nearest_phi_index(detail::parse_num(f[9], where));
        r.peak.bin = range_to_bin(grid.range_axis, detail::parse_num(f[10], where));
        regions.push_back(std::move(r));
    }
    return regions;
}

// ---- report CSV and text table ---------------------------------------------

inline void write_report_csv(std::ostream& out, const std::vector<SensorReading>& readings) {
    out << "sensor,R_m,evv_on,evv_off,dvv,evh_on,evh_off,dvh\n";
    for (const auto& r : readings) {
        detail::check_id(r.sensor_id);
        out << r.sensor_id << ',' << detail::fmt_f1(r.range_m) << ',' << detail::fmt_f1(r.e_vv_on)
            << ',' << detail::fmt_f1(r.e_vv_off) << ',' << detail::fmt_f1(r.delta_vv) << ','
            << detail::fmt_f1(r.e_vh_on) << ',' << detail::fmt_f1(r.e_vh_off) << ','
            << detail::fmt_f1(r.delta_vh) << '\n';
    }
}

inline std::vector<SensorReading> read_report_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || detail::split_csv_line(line).size() != 8)
        throw validation_error("report CSV: missing or malformed header row");
    std::vector<SensorReading> readings;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        const std::string where = "report CSV row " + std::to_string(row);
        if (f.size() != 8) throw validation_error(where + ": expected 8 columns");
        SensorReading r;
        r.sensor_id = f[0];
        r.range_m = detail::parse_num(f[1], where);
        r.e_vv_on = detail::parse_num(f[2], where);
        r.e_vv_off = detail::parse_num(f[3], where);
        r.delta_vv = detail::parse_num(f[4], where);
        r.e_vh_on = detail::parse_num(f[5], where);
        r.e_vh_off = detail::parse_num(f[6], where);
        r.delta_vh = detail::parse_num(f[7], where);
        readings.push_back(std::move(r));
    }
    return readings;
}

inline std::string format_report_table(const std::vector<SensorReading>& readings) {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-10s %6s %8s %8s %6s %8s %8s %6s\n", "sensor", "R_m",
                  "evv_on", "evv_off", "dvv", "evh_on", "evh_off", "dvh");
    out << buf;
    for (const auto& r : readings) {
        std::snprintf(buf, sizeof buf, "%-10s %6.1f %8.1f %8.1f %6.1f %8.1f %8.1f %6.1f\n",
                      r.sensor_id.c_str(), r.range_m, r.e_vv_on, r.e_vv_off, r.delta_vv,
                      r.e_vh_on, r.e_vh_off, r.delta_vh);
        out << buf;
    }
    return out.str();
}

// ---- 2D slice CSV -----------------------------------------------------------

/// Plain value matrix of one range slice: rows are theta ascending, columns
/// phi ascending.
inline void write_slice_csv(std::ostream& out, const PolarimetricImage& image, RxPol pol,
                            std::uint32_t bin) {
    if (bin >= image.grid.range_axis.bin_count)
        throw std::out_of_range("slice bin " + std::to_string(bin) + " out of range");
    const auto& f = image.field(pol);
    for (std::uint32_t ti = 0; ti < image.grid.theta_count(); ++ti) {
        for (std::uint32_t pj = 0; pj < image.grid.phi_count(); ++pj) {
            if (pj) out << ',';
            out << detail::fmt_g(f[image.index(ti, pj, bin)], 9);
        }
        out << '\n';
    }
}

inline Slice2D read_slice_csv(std::istream& in) {
    Slice2D slice;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (slice.cols == 0) slice.cols = std::uint32_t(f.size());
        if (f.size() != slice.cols)
            throw validation_error("slice CSV row " + std::to_string(row) + ": ragged row");
        for (const auto& s : f)
            slice.values.push_back(detail::parse_num(s, "slice CSV row " + std::to_string(row)));
        ++slice.rows;
    }
    return slice;
}

} // namespace isoscan
