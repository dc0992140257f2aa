#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "isoscan/imaging.hpp"
#include "isoscan/isolines.hpp"

namespace isoscan {

/// 8-bit RGB raster, row 0 at the top.
struct Raster {
    std::uint32_t width = 0, height = 0;
    std::vector<std::uint8_t> rgb; // 3 bytes per pixel, row-major

    void set(std::uint32_t x, std::uint32_t y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        if (x >= width || y >= height) return;
        const std::size_t i = 3 * (std::size_t(y) * width + x);
        rgb[i] = r;
        rgb[i + 1] = g;
        rgb[i + 2] = b;
    }
};

/// Binary PPM (P6), a portable lossless raster format.
inline std::string encode_ppm(const Raster& raster) {
    std::string out = "P6\n" + std::to_string(raster.width) + " " +
                      std::to_string(raster.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(raster.rgb.data()), raster.rgb.size());
    return out;
}

inline void save_ppm(const Raster& raster, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot write raster file '" + path + "'");
    const std::string buf = encode_ppm(raster);
    out.write(buf.data(), std::streamsize(buf.size()));
}

namespace detail {

inline void draw_segment(Raster& raster, int x0, int y0, int x1, int y1) {
    // Bresenham; overlay polylines come out 8-connected.
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        if (x0 >= 0 && y0 >= 0) raster.set(std::uint32_t(x0), std::uint32_t(y0), 255, 0, 0);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

} // namespace detail

/// Renders one range slice (or the max over range) of a field as a grayscale
/// raster: one pixel per (theta, phi) cell, highest elevation on top, values
/// scaled linearly between the finite min and max. A constant field renders
/// mid-gray.
inline Raster render_field(const PolarimetricImage& image, RxPol pol,
                           std::optional<std::uint32_t> slice_bin) {
    const ScanGrid& g = image.grid;
    if (slice_bin && *slice_bin >= g.range_axis.bin_count)
        throw std::out_of_range("slice bin " + std::to_string(*slice_bin) +
                                " out of range (bin count " +
                                std::to_string(g.range_axis.bin_count) + ")");
    const std::uint32_t tn = g.theta_count(), pn = g.phi_count(), bn = g.range_axis.bin_count;
    const auto& f = image.field(pol);

    std::vector<double> cell(std::size_t(tn) * pn, kNegInf);
    double lo = 0, hi = 0;
    bool first = true;
    for (std::uint32_t ti = 0; ti < tn; ++ti)
        for (std::uint32_t pj = 0; pj < pn; ++pj) {
            double v;
            if (slice_bin) {
                v = f[image.index(ti, pj, *slice_bin)];
            } else {
                v = kNegInf;
                for (std::uint32_t bk = 0; bk < bn; ++bk)
                    v = std::max(v, double(f[image.index(ti, pj, bk)]));
            }
            cell[std::size_t(ti) * pn + pj] = v;
            if (std::isfinite(v)) {
                if (first) { lo = hi = v; first = false; }
                else { lo = std::min(lo, v); hi = std::max(hi, v); }
            }
        }

    Raster raster{pn, tn, std::vector<std::uint8_t>(std::size_t(3) * pn * tn, 0)};
    for (std::uint32_t ti = 0; ti < tn; ++ti)
        for (std::uint32_t pj = 0; pj < pn; ++pj) {
            const double v = cell[std::size_t(ti) * pn + pj];
            std::uint8_t shade = 0;
            if (std::isfinite(v))
                shade = (first || hi == lo)
                            ? std::uint8_t(128)
                            : std::uint8_t(std::lround(255.0 * (v - lo) / (hi - lo)));
            raster.set(pj, tn - 1 - ti, shade, shade, shade);
        }
    return raster;
}

/// Draws isoline polylines in red over a rendered raster. In slice mode only
/// the isolines of that range bin are drawn.
inline void overlay_isolines(Raster& raster, const PolarimetricImage& image, const IsolineSet& set,
                             std::optional<std::uint32_t> slice_bin) {
    const ScanGrid& g = image.grid;
    const std::uint32_t tn = g.theta_count();
    auto to_px = [&](double theta_deg, double phi_deg) {
        const int x = int(std::lround((phi_deg - g.phi_start_deg) / g.phi_step_deg));
        const int y = int(tn) - 1 - int(std::lround((theta_deg - g.theta_start_deg) / g.theta_step_deg));
        return std::pair<int, int>(x, y);
    };
    for (const auto& iso : set.isolines) {
        if (slice_bin && iso.range_bin != *slice_bin) continue;
        for (std::size_t i = 0; i + 1 < iso.vertices.size(); ++i) {
            const auto [x0, y0] = to_px(iso.vertices[i][0], iso.vertices[i][1]);
            const auto [x1, y1] = to_px(iso.vertices[i + 1][0], iso.vertices[i + 1][1]);
            detail::draw_segment(raster, x0, y0, x1, y1);
        }
    }
}

} // namespace isoscan
