#include "ps2r/pointcloud.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace ps2r {

void PointCloud::validate() const {
    for (const auto& p : points)
        if (!p.finite()) throw std::invalid_argument("point cloud contains non-finite coordinates");
}

namespace {

constexpr char kMagic[4] = {'P', 'S', '2', 'R'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("truncated PS2R stream");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& out, float v) {
    static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

float get_f32(std::istream& in) {
    const std::uint32_t bits = get_u32(in);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

} // namespace

void write_ps2r(std::ostream& out, const PointCloud& cloud) {
    out.write(kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(cloud.points.size()));
    for (const auto& p : cloud.points) {
        put_f32(out, static_cast<float>(p.x));
        put_f32(out, static_cast<float>(p.y));
        put_f32(out, static_cast<float>(p.z));
    }
    if (!out) throw std::runtime_error("PS2R write failed");
}

void write_ps2r_file(const std::string& path, const PointCloud& cloud) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write point cloud: " + path);
    write_ps2r(out, cloud);
}

PointCloud read_ps2r(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("not a PS2R stream (bad magic)");
    const std::uint32_t version = get_u32(in);
    if (version != kVersion)
        throw std::runtime_error("unsupported PS2R version " + std::to_string(version));
    const std::uint32_t count = get_u32(in);
    PointCloud cloud;
    cloud.points.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const float x = get_f32(in);
        const float y = get_f32(in);
        const float z = get_f32(in);
        cloud.points.emplace_back(x, y, z);
    }
    return cloud;
}

PointCloud read_ps2r_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open point cloud: " + path);
    return read_ps2r(in);
}

void write_ply(std::ostream& out, const PointCloud& cloud) {
    out << "ply\nformat ascii 1.0\nelement vertex " << cloud.points.size()
        << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
    char buf[40];
    for (const auto& p : cloud.points) {
        std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g\n", static_cast<float>(p.x),
                      static_cast<float>(p.y), static_cast<float>(p.z));
        out << buf;
    }
    if (!out) throw std::runtime_error("PLY write failed");
}

void write_ply_file(const std::string& path, const PointCloud& cloud) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write point cloud: " + path);
    write_ply(out, cloud);
}

} // namespace ps2r
