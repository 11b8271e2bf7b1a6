#pragma once

#include <cstdint>
#include <stdexcept>

#include "ps2r/vec3.hpp"

namespace ps2r {

// Orthonormal right/up/forward frame of a look-at camera.
struct CameraBasis {
    Vec3 right, up, forward;
};

// Pinhole intrinsics + look-at extrinsics for one simulated scan viewpoint.
struct SensorView {
    Vec3 position{0.0, 0.0, 0.0};
    Vec3 target{0.0, 0.0, 1.0};
    Vec3 up_hint{0.0, -1.0, 0.0};
    double focal_px = 128.0;
    double cx = 64.0;
    double cy = 64.0;
    std::uint32_t width = 128;
    std::uint32_t height = 128;

    // Derives the orthonormal camera frame. forward points from position to
    // target; right = forward x up_hint normalized; up completes the frame.
    // Throws std::invalid_argument when the view is ill-formed (position at
    // target, up_hint parallel to the view direction, bad intrinsics).
    CameraBasis basis() const {
        if (focal_px <= 0.0) throw std::invalid_argument("sensor view: focal length must be positive");
        if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height)
            throw std::invalid_argument("sensor view: principal point outside image");
        const Vec3 dir = target - position;
        if (dir.norm() < 1e-12) throw std::invalid_argument("sensor view: position coincides with target");
        CameraBasis b;
        b.forward = dir.normalized();
        const Vec3 r = cross(b.forward, up_hint);
        if (r.norm() < 1e-12)
            throw std::invalid_argument("sensor view: up_hint parallel to view direction");
        b.right = r.normalized();
        b.up = cross(b.right, b.forward);
        return b;
    }

    // World->camera: camera x along right, y along down (-up), z along forward,
    // so +x is rightward and +y downward in image space.
    Vec3 world_to_camera(const CameraBasis& b, const Vec3& p) const {
        const Vec3 q = p - position;
        return Vec3{dot(q, b.right), dot(q, -b.up), dot(q, b.forward)};
    }

    Vec3 camera_to_world(const CameraBasis& b, const Vec3& c) const {
        return position + b.right * c.x + (-b.up) * c.y + b.forward * c.z;
    }

    // Unit world-space direction of the ray through pixel center (u+0.5, v+0.5).
    Vec3 pixel_ray(const CameraBasis& b, std::uint32_t u, std::uint32_t v) const {
        const double px = (u + 0.5 - cx) / focal_px;
        const double py = (v + 0.5 - cy) / focal_px;
        const Vec3 d = b.right * px + (-b.up) * py + b.forward;
        return d.normalized();
    }
};

} // namespace ps2r
