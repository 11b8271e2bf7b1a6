#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ps2r/vec3.hpp"

namespace ps2r {

enum class Domain : std::uint8_t { source = 0, target = 1 };

// A set of 3D points, optionally labeled and tagged with its provenance
// (which object and which simulated view it came from).
struct PointCloud {
    std::vector<Vec3> points;
    std::optional<std::uint32_t> label;
    Domain domain = Domain::source;
    std::uint32_t object_id = 0;
    std::uint32_t view_id = 0;

    std::size_t count() const { return points.size(); }

    // Throws std::invalid_argument on non-finite coordinates.
    void validate() const;
};

// Compact binary format: magic "PS2R", u32 LE version = 1, u32 LE point
// count, then count x 3 IEEE-754 32-bit LE floats (x, y, z interleaved).
// Coordinates are narrowed to float on write and widened back on read.
void write_ps2r(std::ostream& out, const PointCloud& cloud);
void write_ps2r_file(const std::string& path, const PointCloud& cloud);
PointCloud read_ps2r(std::istream& in);
PointCloud read_ps2r_file(const std::string& path);

// ASCII PLY with float x, y, z properties.
void write_ply(std::ostream& out, const PointCloud& cloud);
void write_ply_file(const std::string& path, const PointCloud& cloud);

} // namespace ps2r
