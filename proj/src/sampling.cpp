#include "ps2r/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ps2r/render.hpp"

namespace ps2r {

PointCloud sample_surface(const Mesh& mesh, std::size_t n, std::uint64_t seed) {
    mesh.validate();

    // cumulative area table over non-degenerate triangles
    std::vector<double> cdf;
    cdf.reserve(mesh.triangles.size());
    double total = 0.0;
    for (const auto& t : mesh.triangles) {
        const Vec3 e1 = mesh.vertices[t[1]] - mesh.vertices[t[0]];
        const Vec3 e2 = mesh.vertices[t[2]] - mesh.vertices[t[0]];
        total += 0.5 * cross(e1, e2).norm();
        cdf.push_back(total);
    }
    if (total <= 0.0)
        throw std::invalid_argument("sample_surface: mesh '" + mesh.name +
                                    "' has no non-degenerate triangle");

    Rng rng(derive_seed(seed, {stream_tag("sample_surface")}));
    PointCloud cloud;
    cloud.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        // draws per point: triangle pick, then two barycentric coordinates
        const double r = rng.uniform() * total;
        const std::size_t k =
            std::lower_bound(cdf.begin(), cdf.end(), r) - cdf.begin();
        const std::size_t tri = std::min(k, cdf.size() - 1);
        double u = rng.uniform();
        double v = rng.uniform();
        if (u + v > 1.0) { // fold into the triangle half of the unit square
            u = 1.0 - u;
            v = 1.0 - v;
        }
        const auto& t = mesh.triangles[tri];
        const Vec3& a = mesh.vertices[t[0]];
        cloud.points.push_back(a + (mesh.vertices[t[1]] - a) * u + (mesh.vertices[t[2]] - a) * v);
    }
    return cloud;
}

void ViewpointConfig::validate() const {
    if (!(r_min <= r_max) || r_min <= 0.0)
        throw std::invalid_argument("viewpoint config: radius range invalid");
    if (!(elev_min_deg <= elev_max_deg) || elev_min_deg <= -90.0 || elev_max_deg >= 90.0)
        throw std::invalid_argument("viewpoint config: elevation range must lie within (-90, 90)");
    if (focal_px <= 0.0 || width == 0 || height == 0)
        throw std::invalid_argument("viewpoint config: bad intrinsics");
}

SensorView sample_viewpoint(double bounding_radius, Rng& rng, const ViewpointConfig& cfg) {
    cfg.validate();
    if (bounding_radius <= 0.0)
        throw std::invalid_argument("sample_viewpoint: bounding radius must be positive");

    constexpr double kPi = 3.14159265358979323846;
    const double azimuth = rng.uniform(0.0, 2.0 * kPi);
    const double elevation = rng.uniform(cfg.elev_min_deg, cfg.elev_max_deg) * kPi / 180.0;
    const double radius = rng.uniform(cfg.r_min, cfg.r_max) * bounding_radius;

    SensorView view;
    view.position = Vec3{radius * std::cos(elevation) * std::cos(azimuth),
                         radius * std::cos(elevation) * std::sin(azimuth),
                         radius * std::sin(elevation)};
    view.target = Vec3{0.0, 0.0, 0.0};
    view.up_hint = Vec3{0.0, 0.0, 1.0};
    view.focal_px = cfg.focal_px;
    view.width = cfg.width;
    view.height = cfg.height;
    view.cx = 0.5 * cfg.width;
    view.cy = 0.5 * cfg.height;
    return view;
}

std::vector<PointCloud> simulate_views(const Mesh& mesh, std::size_t M, const SimConfig& cfg,
                                       std::uint64_t seed, std::uint32_t object_id) {
    mesh.validate();
    cfg.viewpoint.validate();
    if (M < 1) throw std::invalid_argument("simulate_views: M must be >= 1");
    const double radius = mesh.bounding_radius();

    std::vector<PointCloud> clouds;
    clouds.reserve(M);
    for (std::uint32_t j = 0; j < M; ++j) {
        Rng rng(derive_seed(seed, {stream_tag("simulate"), object_id, j}));
        bool placed = false;
        for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
            const SensorView view = sample_viewpoint(radius, rng, cfg.viewpoint);
            const DepthMap depth = render_depth(mesh, view);
            PointCloud cloud = back_project(depth, view);
            if (cloud.count() < cfg.min_points) continue;
            cloud.object_id = object_id;
            cloud.view_id = j;
            clouds.push_back(std::move(cloud));
            placed = true;
            break;
        }
        if (!placed)
            throw std::runtime_error("simulate_views: mesh '" + mesh.name + "' produced " +
                                     std::to_string(cfg.max_attempts) +
                                     " consecutive views below min_points");
    }
    return clouds;
}

} // namespace ps2r
