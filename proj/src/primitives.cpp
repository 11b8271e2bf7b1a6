#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "ps2r/dataset.hpp"

namespace ps2r {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Mesh make_box(const Vec3& half_extents) {
    Mesh m;
    m.name = "box";
    const double hx = half_extents.x, hy = half_extents.y, hz = half_extents.z;
    for (int i = 0; i < 8; ++i)
        m.vertices.emplace_back(i & 1 ? hx : -hx, i & 2 ? hy : -hy, i & 4 ? hz : -hz);
    const std::uint32_t quads[6][4] = {
        {0, 1, 3, 2}, {4, 6, 7, 5}, // z faces
        {0, 4, 5, 1}, {2, 3, 7, 6}, // y faces
        {0, 2, 6, 4}, {1, 5, 7, 3}, // x faces
    };
    for (const auto& q : quads) {
        m.triangles.push_back({q[0], q[1], q[2]});
        m.triangles.push_back({q[0], q[2], q[3]});
    }
    return m;
}

Mesh make_cylinder(double radius_x, double radius_y, double half_height, int segments) {
    Mesh m;
    m.name = "cylinder";
    for (int i = 0; i < segments; ++i) {
        const double a = 2.0 * kPi * i / segments;
        m.vertices.emplace_back(radius_x * std::cos(a), radius_y * std::sin(a), -half_height);
        m.vertices.emplace_back(radius_x * std::cos(a), radius_y * std::sin(a), half_height);
    }
    const std::uint32_t bottom_center = static_cast<std::uint32_t>(m.vertices.size());
    m.vertices.emplace_back(0.0, 0.0, -half_height);
    const std::uint32_t top_center = bottom_center + 1;
    m.vertices.emplace_back(0.0, 0.0, half_height);

    for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(segments); ++i) {
        const std::uint32_t j = (i + 1) % segments;
        const std::uint32_t b0 = 2 * i, t0 = 2 * i + 1, b1 = 2 * j, t1 = 2 * j + 1;
        m.triangles.push_back({b0, b1, t1});
        m.triangles.push_back({b0, t1, t0});
        m.triangles.push_back({bottom_center, b1, b0});
        m.triangles.push_back({top_center, t0, t1});
    }
    return m;
}

Mesh make_cone(double radius_x, double radius_y, double height, int segments) {
    Mesh m;
    m.name = "cone";
    const double zb = -0.5 * height;
    for (int i = 0; i < segments; ++i) {
        const double a = 2.0 * kPi * i / segments;
        m.vertices.emplace_back(radius_x * std::cos(a), radius_y * std::sin(a), zb);
    }
    const std::uint32_t apex = static_cast<std::uint32_t>(m.vertices.size());
    m.vertices.emplace_back(0.0, 0.0, 0.5 * height);
    const std::uint32_t base_center = apex + 1;
    m.vertices.emplace_back(0.0, 0.0, zb);

    for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(segments); ++i) {
        const std::uint32_t j = (i + 1) % segments;
        m.triangles.push_back({i, j, apex});
        m.triangles.push_back({base_center, j, i});
    }
    return m;
}

Mesh make_icosphere(const Vec3& radii, int subdivisions) {
    // icosahedron
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1},
    };
    for (auto& v : verts) v = v.normalized();
    std::vector<std::array<std::uint32_t, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
        {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1},
    };

    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoints;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) -> std::uint32_t {
        const std::pair<std::uint32_t, std::uint32_t> key = std::minmax(a, b);
        const auto it = midpoints.find(key);
        if (it != midpoints.end()) return it->second;
        const std::uint32_t idx = static_cast<std::uint32_t>(verts.size());
        verts.push_back(((verts[a] + verts[b]) / 2.0).normalized());
        midpoints.emplace(key, idx);
        return idx;
    };
    for (int s = 0; s < subdivisions; ++s) {
        std::vector<std::array<std::uint32_t, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            const std::uint32_t ab = midpoint(f[0], f[1]);
            const std::uint32_t bc = midpoint(f[1], f[2]);
            const std::uint32_t ca = midpoint(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }

    Mesh m;
    m.name = "icosphere";
    m.vertices.reserve(verts.size());
    for (const auto& v : verts) m.vertices.emplace_back(v.x * radii.x, v.y * radii.y, v.z * radii.z);
    m.triangles = std::move(faces);
    return m;
}

Mesh make_torus(double major_x, double major_y, double minor, int major_segments,
                int minor_segments) {
    Mesh m;
    m.name = "torus";
    for (int i = 0; i < major_segments; ++i) {
        const double theta = 2.0 * kPi * i / major_segments;
        for (int j = 0; j < minor_segments; ++j) {
            const double phi = 2.0 * kPi * j / minor_segments;
            const double ring = minor * std::cos(phi);
            m.vertices.emplace_back((major_x + ring) * std::cos(theta),
                                    (major_y + ring) * std::sin(theta), minor * std::sin(phi));
        }
    }
    auto vid = [&](int i, int j) {
        return static_cast<std::uint32_t>((i % major_segments) * minor_segments +
                                          (j % minor_segments));
    };
    for (int i = 0; i < major_segments; ++i) {
        for (int j = 0; j < minor_segments; ++j) {
            m.triangles.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
            m.triangles.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
        }
    }
    return m;
}

Mesh make_primitive(const std::string& class_name, const Vec3& scale) {
    if (class_name == "box") return make_box(Vec3{0.5 * scale.x, 0.5 * scale.y, 0.5 * scale.z});
    if (class_name == "cylinder") return make_cylinder(0.45 * scale.x, 0.45 * scale.y, 0.6 * scale.z);
    if (class_name == "cone") return make_cone(0.5 * scale.x, 0.5 * scale.y, scale.z);
    if (class_name == "icosphere")
        return make_icosphere(Vec3{0.55 * scale.x, 0.55 * scale.y, 0.55 * scale.z});
    if (class_name == "torus") return make_torus(0.45 * scale.x, 0.45 * scale.y, 0.2 * scale.z);
    throw std::invalid_argument("unknown corpus class '" + class_name + "'");
}

} // namespace ps2r
