#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "isoscan/imaging.hpp"

namespace isoscan {

/// 2D scalar field over (theta index = row, phi index = col).
struct Slice2D {
    std::uint32_t rows = 0, cols = 0;
    std::vector<double> values; // row-major

    double at(std::uint32_t r, std::uint32_t c) const { return values[std::size_t(r) * cols + c]; }
    double& at(std::uint32_t r, std::uint32_t c) { return values[std::size_t(r) * cols + c]; }
};

/// Contour vertex in continuous index coordinates (row = theta direction,
/// col = phi direction).
struct ContourVertex {
    double row = 0, col = 0;
};

/// Open or closed polyline at constant level, in index coordinates. The
/// region above the level lies on the left of the direction of travel; a
/// closed polyline repeats its first vertex at the end.
struct Contour {
    std::vector<ContourVertex> vertices;
    bool closed = false;
};

namespace detail {

// Edge key of the node grid: horizontal edge h(r,c) joins (r,c)-(r,c+1),
// vertical edge v(r,c) joins (r,c)-(r+1,c).
inline std::uint64_t edge_key(std::uint32_t r, std::uint32_t c, bool vertical) {
    return (std::uint64_t(r) << 33) | (std::uint64_t(c) << 1) | (vertical ? 1 : 0);
}

inline ContourVertex edge_crossing(const Slice2D& s, std::uint64_t key, double level) {
    const bool vertical = key & 1;
    const auto c = std::uint32_t((key >> 1) & 0xffffffffu);
    const auto r = std::uint32_t(key >> 33);
    // -inf interpolates as a finite value well below the level, keeping the
    // crossing strictly inside the edge
    auto finite = [level](double v) { return std::isinf(v) && v < 0 ? level - 20.0 : v; };
    const double a = finite(s.at(r, c));
    const double b = finite(vertical ? s.at(r + 1, c) : s.at(r, c + 1));
    const double t = (level - a) / (b - a);
    return vertical ? ContourVertex{r + t, double(c)} : ContourVertex{double(r), c + t};
}

} // namespace detail

/// Marching squares at a single level. Linear interpolation along cell
/// edges; saddle cells are disambiguated by the cell-center average. A node
/// counts as above the level only when strictly greater, and -inf values are
/// below every level. No length filtering here.
inline std::vector<Contour> extract_slice_contours(const Slice2D& slice, double level) {
    if (slice.rows < 2 || slice.cols < 2)
        throw validation_error("contour slice must be at least 2x2");
    if (std::isnan(level) || std::isinf(level))
        throw validation_error("contour level must be finite");

    using detail::edge_key;
    // Directed segments: key edge -> successor edge, region above on the left.
    std::unordered_map<std::uint64_t, std::uint64_t> next;
    std::unordered_map<std::uint64_t, int> incoming;
    next.reserve(64);

    for (std::uint32_t r = 0; r + 1 < slice.rows; ++r) {
        for (std::uint32_t c = 0; c + 1 < slice.cols; ++c) {
            const double v0 = slice.at(r, c), v1 = slice.at(r, c + 1);
            const double v2 = slice.at(r + 1, c + 1), v3 = slice.at(r + 1, c);
            const int code = (v0 > level ? 1 : 0) | (v1 > level ? 2 : 0) |
                             (v2 > level ? 4 : 0) | (v3 > level ? 8 : 0);
            if (code == 0 || code == 15) continue;

            const std::uint64_t e0 = edge_key(r, c, false);     // bottom
            const std::uint64_t e1 = edge_key(r, c + 1, true);  // right
            const std::uint64_t e2 = edge_key(r + 1, c, false); // top
            const std::uint64_t e3 = edge_key(r, c, true);      // left

            auto emit = [&](std::uint64_t from, std::uint64_t to) {
                next[from] = to;
                ++incoming[to];
            };
            switch (code) {
            case 1: emit(e0, e3); break;
            case 2: emit(e1, e0); break;
            case 3: emit(e1, e3); break;
            case 4: emit(e2, e1); break;
            case 5: {
                const bool center_above = (v0 + v1 + v2 + v3) / 4.0 > level;
                if (center_above) { emit(e0, e1); emit(e2, e3); }
                else { emit(e0, e3); emit(e2, e1); }
                break;
            }
            case 6: emit(e2, e0); break;
            case 7: emit(e2, e3); break;
            case 8: emit(e3, e2); break;
            case 9: emit(e0, e2); break;
            case 10: {
                const bool center_above = (v0 + v1 + v2 + v3) / 4.0 > level;
                if (center_above) { emit(e3, e0); emit(e1, e2); }
                else { emit(e1, e0); emit(e3, e2); }
                break;
            }
            case 11: emit(e1, e2); break;
            case 12: emit(e3, e1); break;
            case 13: emit(e0, e1); break;
            case 14: emit(e3, e0); break;
            default: break;
            }
        }
    }

    std::vector<Contour> contours;
    std::vector<std::uint64_t> starts;
    for (const auto& [from, _] : next)
        if (!incoming.count(from)) starts.push_back(from);
    std::sort(starts.begin(), starts.end());

    std::unordered_map<std::uint64_t, bool> visited;
    auto walk = [&](std::uint64_t start, bool closed) {
        Contour contour;
        contour.closed = closed;
        std::uint64_t e = start;
        while (true) {
            contour.vertices.push_back(detail::edge_crossing(slice, e, level));
            visited[e] = true;
            auto it = next.find(e);
            if (it == next.end()) break; // open end at the slice boundary
            e = it->second;
            if (e == start) {
                contour.vertices.push_back(contour.vertices.front());
                break;
            }
        }
        contours.push_back(std::move(contour));
    };

    for (std::uint64_t s : starts) walk(s, false);

    std::vector<std::uint64_t> loop_starts;
    for (const auto& [from, _] : next)
        if (!visited.count(from)) loop_starts.push_back(from);
    std::sort(loop_starts.begin(), loop_starts.end());
    for (std::uint64_t s : loop_starts)
        if (!visited.count(s)) walk(s, true);

    return contours;
}

/// Constant-level polyline within one range slice, vertices in scan degrees.
struct Isoline {
    double level_db = 0;
    std::uint32_t range_bin = 0;
    std::vector<std::array<double, 2>> vertices; // {theta_deg, phi_deg}
    bool closed = false;
};

struct IsolineSet {
    RxPol polarization = RxPol::V;
    double min_threshold_db = -10.0;
    std::vector<double> levels_db;
    std::vector<Isoline> isolines;
};

/// Level schedule used when none is requested: min_threshold up to 0 dB in
/// 2 dB increments.
inline std::vector<double> default_levels(double min_threshold_db) {
    std::vector<double> levels;
    for (double l = min_threshold_db; l <= 0.0 + 1e-12; l += 2.0) levels.push_back(l);
    return levels;
}

/// Extracts isolines of one polarization per (range bin, level), in that
/// order. Polylines with fewer than three stored vertices are dropped.
inline IsolineSet extract_isolines(const PolarimetricImage& image, RxPol polarization,
                                   std::vector<double> levels, double min_threshold_db) {
    if (levels.empty()) levels = default_levels(min_threshold_db);
    if (!std::is_sorted(levels.begin(), levels.end()))
        throw validation_error("isoline levels must be sorted ascending");
    for (double l : levels)
        if (l < min_threshold_db - 1e-12)
            throw validation_error("requested level " + std::to_string(l) +
                                   " dB below min threshold " +
                                   std::to_string(min_threshold_db) + " dB");

    const auto& grid = image.grid;
    const auto& f = image.field(polarization);
    const std::uint32_t tn = grid.theta_count(), pn = grid.phi_count();
    IsolineSet set{polarization, min_threshold_db, levels, {}};

    Slice2D slice{tn, pn, std::vector<double>(std::size_t(tn) * pn)};
    for (std::uint32_t bk = 0; bk < grid.range_axis.bin_count; ++bk) {
        double lo = kNegInf, hi = kNegInf;
        bool first = true;
        for (std::uint32_t ti = 0; ti < tn; ++ti)
            for (std::uint32_t pj = 0; pj < pn; ++pj) {
                const double v = f[image.index(ti, pj, bk)];
                slice.at(ti, pj) = v;
                if (first) { lo = hi = v; first = false; }
                else { lo = std::min(lo, v); hi = std::max(hi, v); }
            }
        for (double level : levels) {
            if (level >= hi || level < lo) continue; // no crossing in this slice
            for (auto& contour : extract_slice_contours(slice, level)) {
                if (contour.vertices.size() < 3) continue;
                Isoline iso;
                iso.level_db = level;
                iso.range_bin = bk;
                iso.closed = contour.closed;
                iso.vertices.reserve(contour.vertices.size());
                for (const auto& v : contour.vertices)
                    iso.vertices.push_back({grid.theta_start_deg + v.row * grid.theta_step_deg,
                                            grid.phi_start_deg + v.col * grid.phi_step_deg});
                set.isolines.push_back(std::move(iso));
            }
        }
    }
    return set;
}

/// Connected group of isolines with its bounding box and peak voxel.
struct Region {
    std::string id;
    std::vector<std::size_t> members; // indices into the source IsolineSet
    Window bbox;
    Peak peak;
};

struct LinkageOptions {
    double theta_steps = 2.0; // max bbox gap, in angular steps
    double phi_steps = 2.0;
    std::uint32_t range_bins = 3; // max range-bin separation
};

namespace detail {

struct IsoBox {
    double tmin, tmax, pmin, pmax;
    std::uint32_t bin;
};

inline double interval_gap(double alo, double ahi, double blo, double bhi) {
    return std::max(0.0, std::max(alo, blo) - std::min(ahi, bhi));
}

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

} // namespace detail

/// Single-linkage clustering of isolines whose bounding boxes lie within the
/// linkage distances. Each region records its peak over its bounding box.
inline std::vector<Region> cluster_regions(const IsolineSet& set, const PolarimetricImage& image,
                                           const LinkageOptions& opt = {}) {
    const auto& grid = image.grid;
    const std::size_t n = set.isolines.size();
    std::vector<detail::IsoBox> boxes(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& iso = set.isolines[i];
        detail::IsoBox b{iso.vertices[0][0], iso.vertices[0][0], iso.vertices[0][1],
                         iso.vertices[0][1], iso.range_bin};
        for (const auto& v : iso.vertices) {
            b.tmin = std::min(b.tmin, v[0]);
            b.tmax = std::max(b.tmax, v[0]);
            b.pmin = std::min(b.pmin, v[1]);
            b.pmax = std::max(b.pmax, v[1]);
        }
        boxes[i] = b;
    }

    detail::UnionFind uf(n);
    const double tlink = opt.theta_steps * grid.theta_step_deg * (1 + 1e-9);
    const double plink = opt.phi_steps * grid.phi_step_deg * (1 + 1e-9);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto &a = boxes[i], &b = boxes[j];
            const std::uint32_t bin_gap = a.bin > b.bin ? a.bin - b.bin : b.bin - a.bin;
            if (bin_gap > opt.range_bins) continue;
            if (detail::interval_gap(a.tmin, a.tmax, b.tmin, b.tmax) > tlink) continue;
            if (detail::interval_gap(a.pmin, a.pmax, b.pmin, b.pmax) > plink) continue;
            uf.unite(i, j);
        }

    std::map<std::size_t, Region> by_root;
    for (std::size_t i = 0; i < n; ++i) {
        Region& reg = by_root[uf.find(i)];
        reg.members.push_back(i);
    }

    std::vector<Region> regions;
    for (auto& [_, reg] : by_root) {
        std::sort(reg.members.begin(), reg.members.end());
        std::uint32_t bmin = boxes[reg.members[0]].bin, bmax = bmin;
        Window w{boxes[reg.members[0]].tmin, boxes[reg.members[0]].tmax,
                 boxes[reg.members[0]].pmin, boxes[reg.members[0]].pmax, 0, 0};
        for (std::size_t m : reg.members) {
            const auto& b = boxes[m];
            w.theta_min_deg = std::min(w.theta_min_deg, b.tmin);
            w.theta_max_deg = std::max(w.theta_max_deg, b.tmax);
            w.phi_min_deg = std::min(w.phi_min_deg, b.pmin);
            w.phi_max_deg = std::max(w.phi_max_deg, b.pmax);
            bmin = std::min(bmin, b.bin);
            bmax = std::max(bmax, b.bin);
        }
        w.range_min_m = grid.range_axis.bin_center_m(bmin);
        w.range_max_m = grid.range_axis.bin_center_m(bmax);
        reg.bbox = w;
        reg.peak = image_max_in_window(image, set.polarization, w);
        regions.push_back(std::move(reg));
    }

    std::sort(regions.begin(), regions.end(), [](const Region& a, const Region& b) {
        return std::tuple(a.bbox.range_min_m, a.bbox.theta_min_deg, a.bbox.phi_min_deg) <
               std::tuple(b.bbox.range_min_m, b.bbox.theta_min_deg, b.bbox.phi_min_deg);
    });
    for (std::size_t i = 0; i < regions.size(); ++i) regions[i].id = "r" + std::to_string(i);
    return regions;
}

} // namespace isoscan
