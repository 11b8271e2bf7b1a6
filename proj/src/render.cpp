#include "ps2r/render.hpp"

#include <algorithm>
#include <stdexcept>

#include "ps2r/threads.hpp"

namespace ps2r {

std::size_t DepthMap::valid_count() const {
    std::size_t n = 0;
    for (double d : depths)
        if (std::isfinite(d)) ++n;
    return n;
}

std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                   const Vec3& b, const Vec3& c) {
    constexpr double eps_ray = 1e-9;
    const Vec3 edge1 = b - a;
    const Vec3 edge2 = c - a;
    const Vec3 pvec = cross(dir, edge2);
    const double det = dot(edge1, pvec);
    if (det == 0.0) return std::nullopt; // parallel ray or degenerate triangle
    const double inv_det = 1.0 / det;
    const Vec3 tvec = origin - a;
    const double u = dot(tvec, pvec) * inv_det;
    if (u < 0.0 || u > 1.0) return std::nullopt;
    const Vec3 qvec = cross(tvec, edge1);
    const double v = dot(dir, qvec) * inv_det;
    if (v < 0.0 || u + v > 1.0) return std::nullopt;
    const double t = dot(edge2, qvec) * inv_det;
    if (!(t > eps_ray)) return std::nullopt;
    return t;
}

namespace {

struct Aabb {
    Vec3 lo{1e300, 1e300, 1e300};
    Vec3 hi{-1e300, -1e300, -1e300};

    void grow(const Vec3& p) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        lo.z = std::min(lo.z, p.z);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
        hi.z = std::max(hi.z, p.z);
    }
};

// Slab test against [0, t_max]; conservative on 0*inf edge cases.
inline bool hits_box(const Vec3& lo, const Vec3& hi, const Vec3& origin, const Vec3& inv_dir,
                     double t_max) {
    double tmin = 0.0, tmax = t_max;
    const double* lop = &lo.x;
    const double* hip = &hi.x;
    const double* op = &origin.x;
    const double* ip = &inv_dir.x;
    for (int axis = 0; axis < 3; ++axis) {
        double t1 = (lop[axis] - op[axis]) * ip[axis];
        double t2 = (hip[axis] - op[axis]) * ip[axis];
        if (t1 > t2) std::swap(t1, t2);
        if (t1 > tmin) tmin = t1;
        if (t2 < tmax) tmax = t2;
        if (tmax < tmin) return false;
    }
    return true;
}

} // namespace

Bvh::Bvh(const Mesh& mesh) : mesh_(mesh) {
    const std::size_t n = mesh.triangles.size();
    if (n == 0) return;
    std::vector<Vec3> centroids(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& t = mesh.triangles[i];
        centroids[i] = (mesh.vertices[t[0]] + mesh.vertices[t[1]] + mesh.vertices[t[2]]) / 3.0;
    }
    std::vector<std::uint32_t> tris(n);
    for (std::size_t i = 0; i < n; ++i) tris[i] = static_cast<std::uint32_t>(i);
    nodes_.reserve(2 * n);
    order_.reserve(n);
    build(tris, 0, n, centroids);
}

std::uint32_t Bvh::build(std::vector<std::uint32_t>& tris, std::size_t lo, std::size_t hi,
                         const std::vector<Vec3>& centroids) {
    const std::uint32_t index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();

    Aabb box;
    Aabb cbox;
    for (std::size_t i = lo; i < hi; ++i) {
        const auto& t = mesh_.triangles[tris[i]];
        box.grow(mesh_.vertices[t[0]]);
        box.grow(mesh_.vertices[t[1]]);
        box.grow(mesh_.vertices[t[2]]);
        cbox.grow(centroids[tris[i]]);
    }
    nodes_[index].lo = box.lo;
    nodes_[index].hi = box.hi;

    const std::size_t count = hi - lo;
    const Vec3 extent = cbox.hi - cbox.lo;
    const int axis = (extent.x >= extent.y && extent.x >= extent.z) ? 0
                     : (extent.y >= extent.z)                       ? 1
                                                                    : 2;
    const double spread = (&extent.x)[axis];
    if (count <= 4 || spread <= 0.0) {
        nodes_[index].left = static_cast<std::uint32_t>(order_.size());
        nodes_[index].count = static_cast<std::uint32_t>(count);
        for (std::size_t i = lo; i < hi; ++i) order_.push_back(tris[i]);
        return index;
    }

    const std::size_t mid = lo + count / 2;
    std::nth_element(tris.begin() + lo, tris.begin() + mid, tris.begin() + hi,
                     [&](std::uint32_t a, std::uint32_t b) {
                         const double ca = (&centroids[a].x)[axis];
                         const double cb = (&centroids[b].x)[axis];
                         return ca < cb || (ca == cb && a < b);
                     });
    const std::uint32_t left = build(tris, lo, mid, centroids);
    const std::uint32_t right = build(tris, mid, hi, centroids);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
}

std::optional<std::pair<double, std::uint32_t>> Bvh::nearest_hit(const Vec3& origin,
                                                                 const Vec3& dir) const {
    if (nodes_.empty()) return std::nullopt;
    const Vec3 inv_dir{1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z};
    double best_t = std::numeric_limits<double>::infinity();
    std::uint32_t best_tri = 0;
    bool found = false;

    std::uint32_t stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        if (!hits_box(node.lo, node.hi, origin, inv_dir, best_t)) continue;
        if (node.count > 0) {
            for (std::uint32_t i = 0; i < node.count; ++i) {
                const std::uint32_t tri = order_[node.left + i];
                const auto& t = mesh_.triangles[tri];
                const auto hit = ray_triangle(origin, dir, mesh_.vertices[t[0]],
                                              mesh_.vertices[t[1]], mesh_.vertices[t[2]]);
                // strict < keeps the lowest triangle index on exact ties
                // (order_ holds ascending indices within each leaf only, so
                // compare explicitly)
                if (hit && (*hit < best_t || (*hit == best_t && (!found || tri < best_tri)))) {
                    best_t = *hit;
                    best_tri = tri;
                    found = true;
                }
            }
        } else {
            stack[top++] = node.right;
            stack[top++] = node.left;
        }
    }
    if (!found) return std::nullopt;
    return std::make_pair(best_t, best_tri);
}

DepthMap render_depth(const Mesh& mesh, const SensorView& view) {
    mesh.validate();
    const CameraBasis basis = view.basis();
    const Bvh bvh(mesh);

    DepthMap map;
    map.width = view.width;
    map.height = view.height;
    map.depths.assign(std::size_t(view.width) * view.height, DepthMap::invalid);

    parallel_for(view.height, [&](std::size_t v) {
        for (std::uint32_t u = 0; u < view.width; ++u) {
            const Vec3 dir = view.pixel_ray(basis, u, static_cast<std::uint32_t>(v));
            const auto hit = bvh.nearest_hit(view.position, dir);
            if (hit) map.depths[v * view.width + u] = hit->first * dot(dir, basis.forward);
        }
    });
    return map;
}

PointCloud back_project(const DepthMap& depth, const SensorView& view) {
    if (depth.width != view.width || depth.height != view.height)
        throw std::invalid_argument("back_project: depth map resolution does not match view");
    const CameraBasis basis = view.basis();
    const Vec3 down = -basis.up;

    PointCloud cloud;
    cloud.points.reserve(depth.valid_count());
    for (std::uint32_t v = 0; v < depth.height; ++v) {
        for (std::uint32_t u = 0; u < depth.width; ++u) {
            const double d = depth.at(u, v);
            if (!std::isfinite(d)) continue;
            const double x = (u + 0.5 - view.cx) * d / view.focal_px;
            const double y = (v + 0.5 - view.cy) * d / view.focal_px;
            cloud.points.push_back(view.position + basis.right * x + down * y +
                                   basis.forward * d);
        }
    }
    return cloud;
}

} // namespace ps2r
