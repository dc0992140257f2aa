#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "isoscan/imaging.hpp"

namespace isoscan {

// ISC1 voxel-grid file: 4-byte magic "ISC1", little-endian header, then the
// vv and vh fields as dense float32 arrays in theta-major order
// (theta, then phi, then range bin).
//
//   offset  size  field
//        0     4  magic "ISC1"
//        4     4  u32 version (1)
//        8     4  u32 theta_count
//       12     4  u32 phi_count
//       16     4  u32 bin_count
//       20     8  f64 theta_start_deg
//       28     8  f64 theta_stop_deg
//       36     8  f64 theta_step_deg
//       44     8  f64 phi_start_deg
//       52     8  f64 phi_stop_deg
//       60     8  f64 phi_step_deg
//       68     8  f64 bin_width_m
//       76     8  f64 origin_m
//       84     -  f32 vv[theta_count * phi_count * bin_count]
//        ...   -  f32 vh[same]

namespace detail {

inline void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(char((v >> (8 * i)) & 0xff));
}
inline void put_f64(std::string& buf, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) buf.push_back(char((bits >> (8 * i)) & 0xff));
}
inline void put_f32(std::string& buf, float v) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) buf.push_back(char((bits >> (8 * i)) & 0xff));
}

class ByteReader {
public:
    ByteReader(const std::string& data, const std::string& what) : data_(data), what_(what) {}
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(data_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(std::uint8_t(data_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return std::bit_cast<double>(v);
    }
    float f32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(data_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return std::bit_cast<float>(v);
    }
    std::size_t pos() const { return pos_; }
    void expect_magic(const char* magic) {
        need(4);
        if (std::memcmp(data_.data() + pos_, magic, 4) != 0)
            throw decode_error(what_ + ": bad magic, expected \"" + magic + "\"", pos_);
        pos_ += 4;
    }
    void need(std::size_t n) const {
        if (pos_ + n > data_.size())
            throw decode_error(what_ + ": truncated input", data_.size());
    }

private:
    const std::string& data_;
    std::string what_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline std::string encode_voxels(const PolarimetricImage& image) {
    const ScanGrid& g = image.grid;
    std::string buf;
    buf.reserve(84 + 8 * image.voxel_count());
    buf.append("ISC1");
    detail::put_u32(buf, 1);
    detail::put_u32(buf, g.theta_count());
    detail::put_u32(buf, g.phi_count());
    detail::put_u32(buf, g.range_axis.bin_count);
    detail::put_f64(buf, g.theta_start_deg);
    detail::put_f64(buf, g.theta_stop_deg);
    detail::put_f64(buf, g.theta_step_deg);
    detail::put_f64(buf, g.phi_start_deg);
    detail::put_f64(buf, g.phi_stop_deg);
    detail::put_f64(buf, g.phi_step_deg);
    detail::put_f64(buf, g.range_axis.bin_width_m);
    detail::put_f64(buf, g.range_axis.origin_m);
    for (float v : image.vv) detail::put_f32(buf, v);
    for (float v : image.vh) detail::put_f32(buf, v);
    return buf;
}

inline PolarimetricImage decode_voxels(const std::string& data, const std::string& what = "voxel data") {
    detail::ByteReader r(data, what);
    r.expect_magic("ISC1");
    const std::size_t version_at = r.pos();
    const std::uint32_t version = r.u32();
    if (version != 1)
        throw decode_error(what + ": unsupported version " + std::to_string(version), version_at);

    PolarimetricImage img;
    const std::size_t counts_at = r.pos();
    const std::uint32_t tn = r.u32(), pn = r.u32(), bn = r.u32();
    ScanGrid& g = img.grid;
    g.theta_start_deg = r.f64();
    g.theta_stop_deg = r.f64();
    g.theta_step_deg = r.f64();
    g.phi_start_deg = r.f64();
    g.phi_stop_deg = r.f64();
    g.phi_step_deg = r.f64();
    g.range_axis.bin_width_m = r.f64();
    g.range_axis.origin_m = r.f64();
    g.range_axis.bin_count = bn;
    if (!(g.theta_step_deg > 0) || !(g.phi_step_deg > 0) || !(g.range_axis.bin_width_m > 0) ||
        bn == 0 || tn == 0 || pn == 0)
        throw decode_error(what + ": degenerate grid header", counts_at);
    if (g.theta_count() != tn || g.phi_count() != pn)
        throw decode_error(what + ": angle counts disagree with bounds and steps", counts_at);

    const std::size_t n = img.voxel_count();
    img.vv.resize(n);
    img.vh.resize(n);
    for (std::size_t i = 0; i < n; ++i) img.vv[i] = r.f32();
    for (std::size_t i = 0; i < n; ++i) img.vh[i] = r.f32();
    if (r.pos() != data.size())
        throw decode_error(what + ": trailing bytes after voxel payload", r.pos());
    return img;
}

inline void save_voxels(const PolarimetricImage& image, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot write voxel file '" + path + "'");
    const std::string buf = encode_voxels(image);
    out.write(buf.data(), std::streamsize(buf.size()));
}

inline PolarimetricImage load_voxels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open voxel file '" + path + "'");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_voxels(data, path);
}

} // namespace isoscan
