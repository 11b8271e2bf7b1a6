#pragma once

#include <cstdint>
#include <vector>

#include "ps2r/camera.hpp"
#include "ps2r/mesh.hpp"
#include "ps2r/pointcloud.hpp"
#include "ps2r/rng.hpp"

namespace ps2r {

// n points drawn area-weighted over the mesh triangles with uniform
// barycentric coordinates inside each; deterministic per seed.
// Throws std::invalid_argument when every triangle is degenerate.
PointCloud sample_surface(const Mesh& mesh, std::size_t n, std::uint64_t seed);

// Viewpoint ranges plus the sensor intrinsics stamped on each sampled view.
struct ViewpointConfig {
    double elev_min_deg = 10.0;
    double elev_max_deg = 80.0;
    double r_min = 2.0; // multiples of the mesh bounding radius
    double r_max = 4.0;
    double focal_px = 128.0;
    std::uint32_t width = 128;
    std::uint32_t height = 128;

    void validate() const;
};

// One viewpoint: azimuth ~ U[0, 2pi), elevation ~ U[elev_min, elev_max],
// radius ~ U[r_min, r_max] * bounding_radius (draws in that order); the
// camera looks at the origin with up hint +z.
SensorView sample_viewpoint(double bounding_radius, Rng& rng, const ViewpointConfig& cfg);

struct SimConfig {
    ViewpointConfig viewpoint;
    std::size_t min_points = 30;
    int max_attempts = 16; // consecutive under-filled views tolerated per view slot
};

// M partially-occluded clouds of the mesh, one per sampled viewpoint;
// under-filled views are resampled, and a view slot that stays below
// min_points for max_attempts consecutive tries raises a simulation error
// naming the mesh. Clouds carry object_id and view_id = 0..M-1.
std::vector<PointCloud> simulate_views(const Mesh& mesh, std::size_t M, const SimConfig& cfg,
                                       std::uint64_t seed, std::uint32_t object_id = 0);

} // namespace ps2r
