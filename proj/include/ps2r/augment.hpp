#pragma once

#include <cstdint>

#include "ps2r/pointcloud.hpp"
#include "ps2r/rng.hpp"

namespace ps2r {

struct AugmentConfig {
    bool rotation_enabled = true;
    double noise_sigma = 0.01; // in normalized units
    double noise_mean = 0.0;
    std::size_t target_points = 1024;
    bool normalize = true;

    void validate() const;
};

// RNG draws consumed by each augmentation stage, for stream audits.
struct AugmentDrawCounts {
    std::uint64_t resample = 0;
    std::uint64_t rotation = 0;
    std::uint64_t noise = 0;
};

// x' = cos(phi) x + sin(phi) y; y' = -sin(phi) x + cos(phi) y; z' = z.
// Label/domain/provenance tags are preserved (as in every op here).
PointCloud rotate_z(const PointCloud& cloud, double phi);

// Adds an independent N(mu, sigma^2) draw to every coordinate, consuming
// draws in row-major point order, x then y then z. sigma = mu = 0 leaves
// the cloud bit-identical.
PointCloud add_noise(const PointCloud& cloud, double sigma, double mu, Rng& rng);

// n distinct indices uniformly when the cloud has at least n points,
// otherwise n indices with replacement. Throws on an empty cloud.
PointCloud resample(const PointCloud& cloud, std::size_t n, Rng& rng);

// Subtracts the centroid and divides by the max point norm (factor 1 when
// that norm is below 1e-12).
PointCloud normalize(const PointCloud& cloud);

// normalize -> resample to cfg.target_points -> rotate_z with
// phi ~ U[0, 2pi) when enabled -> add_noise; one RNG stream, fixed
// consumption order (noise draws are skipped when sigma = mu = 0).
PointCloud augment_pipeline(const PointCloud& cloud, const AugmentConfig& cfg, Rng& rng,
                            AugmentDrawCounts* counts = nullptr);

} // namespace ps2r
