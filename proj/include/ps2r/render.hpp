#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "ps2r/camera.hpp"
#include "ps2r/mesh.hpp"
#include "ps2r/pointcloud.hpp"

namespace ps2r {

// Per-view depth image; invalid (miss) pixels hold a quiet NaN.
struct DepthMap {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<double> depths; // row-major, width*height

    static constexpr double invalid = std::numeric_limits<double>::quiet_NaN();

    double at(std::uint32_t u, std::uint32_t v) const { return depths[std::size_t(v) * width + u]; }
    bool valid(std::uint32_t u, std::uint32_t v) const { return std::isfinite(at(u, v)); }
    std::size_t valid_count() const;
};

// Smallest t > 1e-9 with origin + t*dir inside the triangle (edges
// inclusive); nullopt on miss or degenerate triangle. dir must be unit.
std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                   const Vec3& b, const Vec3& c);

// Median-split bounding-volume hierarchy over a mesh's triangles.
class Bvh {
public:
    explicit Bvh(const Mesh& mesh);

    // Nearest hit along the ray: (t, triangle index), or nullopt.
    std::optional<std::pair<double, std::uint32_t>> nearest_hit(const Vec3& origin,
                                                                const Vec3& dir) const;

private:
    struct Node {
        Vec3 lo, hi;
        std::uint32_t left = 0;   // child index, or first triangle for leaves
        std::uint32_t count = 0;  // 0 for inner nodes, triangle count for leaves
        std::uint32_t right = 0;  // second child index (inner nodes)
    };
    const Mesh& mesh_;
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> order_; // triangle indices grouped by leaf

    std::uint32_t build(std::vector<std::uint32_t>& tris, std::size_t lo, std::size_t hi,
                        const std::vector<Vec3>& centroids);
};

// Casts the pinhole ray through every pixel center (u+0.5, v+0.5) and
// records the camera-space z of the nearest hit; misses stay invalid.
DepthMap render_depth(const Mesh& mesh, const SensorView& view);

// Lifts every valid pixel back to a world-space point in row-major pixel
// order. Throws std::invalid_argument when resolutions disagree.
PointCloud back_project(const DepthMap& depth, const SensorView& view);

} // namespace ps2r
