#include "ps2r/augment.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ps2r {

void AugmentConfig::validate() const {
    if (noise_sigma < 0.0) throw std::invalid_argument("augment config: noise_sigma must be >= 0");
    if (target_points < 1) throw std::invalid_argument("augment config: target_points must be >= 1");
}

PointCloud rotate_z(const PointCloud& cloud, double phi) {
    if (!std::isfinite(phi)) throw std::invalid_argument("rotate_z: phi must be finite");
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    PointCloud out = cloud;
    for (auto& p : out.points) {
        const double x = p.x;
        const double y = p.y;
        p.x = c * x + s * y;
        p.y = -s * x + c * y;
    }
    return out;
}

PointCloud add_noise(const PointCloud& cloud, double sigma, double mu, Rng& rng) {
    if (sigma < 0.0) throw std::invalid_argument("add_noise: sigma must be >= 0");
    PointCloud out = cloud;
    const bool apply = sigma != 0.0 || mu != 0.0; // keep sigma=mu=0 bit-identical
    for (auto& p : out.points) {
        const double nx = rng.normal(mu, sigma);
        const double ny = rng.normal(mu, sigma);
        const double nz = rng.normal(mu, sigma);
        if (apply) {
            p.x += nx;
            p.y += ny;
            p.z += nz;
        }
    }
    return out;
}

PointCloud resample(const PointCloud& cloud, std::size_t n, Rng& rng) {
    const std::size_t count = cloud.points.size();
    if (count == 0) throw std::invalid_argument("resample: empty cloud");
    if (n < 1) throw std::invalid_argument("resample: target count must be >= 1");

    PointCloud out = cloud;
    out.points.clear();
    out.points.reserve(n);
    if (count >= n) {
        // partial Fisher-Yates: the first n slots are a uniform distinct draw
        std::vector<std::uint32_t> idx(count);
        std::iota(idx.begin(), idx.end(), 0u);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = i + rng.uniform_index(count - i);
            std::swap(idx[i], idx[j]);
            out.points.push_back(cloud.points[idx[i]]);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i)
            out.points.push_back(cloud.points[rng.uniform_index(count)]);
    }
    return out;
}

PointCloud normalize(const PointCloud& cloud) {
    if (cloud.points.empty()) throw std::invalid_argument("normalize: empty cloud");
    Vec3 centroid{0.0, 0.0, 0.0};
    for (const auto& p : cloud.points) centroid += p;
    centroid = centroid / static_cast<double>(cloud.points.size());

    PointCloud out = cloud;
    double max_norm = 0.0;
    for (auto& p : out.points) {
        p -= centroid;
        max_norm = std::max(max_norm, p.norm());
    }
    if (max_norm >= 1e-12) {
        const double inv = 1.0 / max_norm;
        for (auto& p : out.points) p *= inv;
    }
    return out;
}

PointCloud augment_pipeline(const PointCloud& cloud, const AugmentConfig& cfg, Rng& rng,
                            AugmentDrawCounts* counts) {
    cfg.validate();
    if (cloud.points.empty()) throw std::invalid_argument("augment_pipeline: empty cloud");

    PointCloud out = cfg.normalize ? normalize(cloud) : cloud;

    std::uint64_t mark = rng.draw_count();
    out = resample(out, cfg.target_points, rng);
    if (counts) counts->resample += rng.draw_count() - mark;

    if (cfg.rotation_enabled) {
        mark = rng.draw_count();
        const double phi = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        out = rotate_z(out, phi);
        if (counts) counts->rotation += rng.draw_count() - mark;
    }

    if (cfg.noise_sigma != 0.0 || cfg.noise_mean != 0.0) {
        mark = rng.draw_count();
        out = add_noise(out, cfg.noise_sigma, cfg.noise_mean, rng);
        if (counts) counts->noise += rng.draw_count() - mark;
    }
    return out;
}

} // namespace ps2r
