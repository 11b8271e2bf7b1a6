#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

#include "ps2r/augment.hpp"

using namespace ps2r;

namespace {

constexpr double kPi = 3.14159265358979323846;

PointCloud random_cloud(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    PointCloud cloud;
    for (std::size_t i = 0; i < n; ++i)
        cloud.points.push_back(
            {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)});
    cloud.label = 3;
    cloud.domain = Domain::target;
    cloud.object_id = 11;
    cloud.view_id = 4;
    return cloud;
}

} // namespace

TEST_CASE("rotate_z at phi = 0 is the identity") {
    const PointCloud cloud = random_cloud(50, 1);
    const PointCloud out = rotate_z(cloud, 0.0);
    CHECK(out.points == cloud.points);
}

TEST_CASE("rotate_z maps (1,0,0) to (0,-1,0) at phi = pi/2") {
    PointCloud cloud;
    cloud.points = {{1, 0, 0}};
    const PointCloud out = rotate_z(cloud, kPi / 2.0);
    CHECK(out.points[0].x == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(out.points[0].y == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(out.points[0].z == 0.0);
}

TEST_CASE("rotate_z preserves planar norm and z exactly") {
    PointCloud cloud;
    cloud.points = {{0.3, -0.4, 0.5}};
    Rng rng(2);
    for (int i = 0; i < 20; ++i) {
        const PointCloud out = rotate_z(cloud, rng.uniform(0.0, 2.0 * kPi));
        const Vec3& p = out.points[0];
        CHECK(std::sqrt(p.x * p.x + p.y * p.y) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(p.z == 0.5);
    }
}

TEST_CASE("rotate_z preserves pairwise distances and composes additively") {
    const PointCloud cloud = random_cloud(40, 3);
    const double a = 0.77, b = 1.31;
    const PointCloud ra = rotate_z(cloud, a);
    const PointCloud rab = rotate_z(ra, b);
    const PointCloud direct = rotate_z(cloud, a + b);
    for (std::size_t i = 0; i < cloud.count(); ++i) {
        CHECK((rab.points[i] - direct.points[i]).norm() < 1e-12);
        for (std::size_t j = i + 1; j < cloud.count(); ++j) {
            const double before = (cloud.points[i] - cloud.points[j]).norm();
            const double after = (ra.points[i] - ra.points[j]).norm();
            CHECK(after == doctest::Approx(before).epsilon(1e-12));
        }
    }
    CHECK(ra.label == cloud.label);
    CHECK(ra.domain == cloud.domain);
    CHECK(ra.object_id == cloud.object_id);
    CHECK(ra.view_id == cloud.view_id);
}

TEST_CASE("add_noise with sigma = mu = 0 is the identity bitwise") {
    const PointCloud cloud = random_cloud(64, 4);
    Rng rng(9);
    const PointCloud out = add_noise(cloud, 0.0, 0.0, rng);
    for (std::size_t i = 0; i < cloud.count(); ++i) {
        CHECK(std::memcmp(&out.points[i], &cloud.points[i], sizeof(Vec3)) == 0);
    }
}

TEST_CASE("add_noise statistics: mean, std, and x/y independence") {
    const std::size_t n = 1000000;
    PointCloud cloud;
    cloud.points.assign(n, Vec3{0, 0, 0});
    const double sigma = 0.01;
    Rng rng(111);
    const PointCloud noisy = add_noise(cloud, sigma, 0.0, rng);

    double sum = 0.0, sumsq = 0.0, cov_xy = 0.0, sum_x = 0.0, sum_y = 0.0;
    for (const Vec3& p : noisy.points) {
        for (double c : {p.x, p.y, p.z}) {
            sum += c;
            sumsq += c * c;
        }
        sum_x += p.x;
        sum_y += p.y;
        cov_xy += p.x * p.y;
    }
    const double coords = 3.0 * n;
    const double mean = sum / coords;
    const double sd = std::sqrt(sumsq / coords - mean * mean);
    CHECK(std::abs(mean) < 4.0 * sigma / std::sqrt(1e6));
    CHECK(std::abs(sd - sigma) < 0.01 * sigma);
    const double cxy = cov_xy / n - (sum_x / n) * (sum_y / n);
    CHECK(std::abs(cxy) < 4.0 / std::sqrt(1e6) * sigma * sigma);
}

TEST_CASE("add_noise consumes draws row-major, x then y then z") {
    PointCloud cloud;
    cloud.points = {{0, 0, 0}, {0, 0, 0}};
    Rng a(42), b(42);
    const PointCloud noisy = add_noise(cloud, 1.0, 0.0, a);
    for (const Vec3& p : noisy.points) {
        CHECK(p.x == b.normal());
        CHECK(p.y == b.normal());
        CHECK(p.z == b.normal());
    }
}

TEST_CASE("resample draws distinct indices when shrinking") {
    const PointCloud cloud = random_cloud(2048, 6);
    Rng rng(7);
    const PointCloud out = resample(cloud, 1024, rng);
    REQUIRE(out.count() == 1024);
    std::set<std::array<double, 3>> seen;
    for (const Vec3& p : out.points) {
        CHECK(seen.insert({p.x, p.y, p.z}).second); // all distinct
        CHECK(std::find(cloud.points.begin(), cloud.points.end(), p) != cloud.points.end());
    }
}

TEST_CASE("resample with replacement when growing") {
    const PointCloud cloud = random_cloud(100, 8);
    Rng rng(9);
    const PointCloud out = resample(cloud, 1024, rng);
    REQUIRE(out.count() == 1024);
    for (const Vec3& p : out.points)
        CHECK(std::find(cloud.points.begin(), cloud.points.end(), p) != cloud.points.end());
}

TEST_CASE("resample rejects an empty cloud") {
    PointCloud empty;
    Rng rng(1);
    CHECK_THROWS_AS(resample(empty, 10, rng), std::invalid_argument);
}

TEST_CASE("normalize centers and scales to the unit sphere") {
    const PointCloud cloud = random_cloud(200, 10);
    const PointCloud out = normalize(cloud);
    Vec3 centroid{0, 0, 0};
    double max_norm = 0.0;
    for (const Vec3& p : out.points) {
        centroid += p;
        max_norm = std::max(max_norm, p.norm());
    }
    centroid = centroid / double(out.count());
    CHECK(centroid.norm() < 1e-12);
    CHECK(max_norm == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normalize is idempotent") {
    const PointCloud once = normalize(random_cloud(64, 12));
    const PointCloud twice = normalize(once);
    for (std::size_t i = 0; i < once.count(); ++i)
        CHECK((once.points[i] - twice.points[i]).norm() < 1e-12);
}

TEST_CASE("normalize maps a single point to the origin") {
    PointCloud cloud;
    cloud.points = {{3.0, -4.0, 5.0}};
    const PointCloud out = normalize(cloud);
    CHECK(out.points[0] == Vec3{0, 0, 0});
}

TEST_CASE("augment_pipeline with rotation and noise off is a plain subsample") {
    const PointCloud cloud = random_cloud(300, 14);
    AugmentConfig cfg;
    cfg.rotation_enabled = false;
    cfg.noise_sigma = 0.0;
    cfg.noise_mean = 0.0;
    cfg.target_points = 128;
    Rng a(21);
    const PointCloud out = augment_pipeline(cloud, cfg, a);
    REQUIRE(out.count() == 128);
    // equals normalize + resample with the same stream
    Rng b(21);
    const PointCloud expect = resample(normalize(cloud), 128, b);
    CHECK(out.points == expect.points);
}

TEST_CASE("augment_pipeline is deterministic and preserves tags") {
    const PointCloud cloud = random_cloud(300, 15);
    AugmentConfig cfg;
    cfg.target_points = 256;
    Rng a(33), b(33);
    AugmentDrawCounts counts_a, counts_b;
    const PointCloud out_a = augment_pipeline(cloud, cfg, a, &counts_a);
    const PointCloud out_b = augment_pipeline(cloud, cfg, b, &counts_b);
    CHECK(out_a.points == out_b.points);
    CHECK(out_a.count() == 256);
    CHECK(out_a.label == cloud.label);
    CHECK(out_a.domain == cloud.domain);
    CHECK(out_a.object_id == cloud.object_id);
    CHECK(out_a.view_id == cloud.view_id);
    CHECK(counts_a.rotation == 1);
    CHECK(counts_a.noise == counts_b.noise);
    CHECK(counts_a.noise >= 256 * 3 / 2); // Box-Muller pairs: >= ceil(3N/2) raw draws
}

TEST_CASE("augment_pipeline draw-count audit: disabled stages consume nothing") {
    const PointCloud cloud = random_cloud(100, 16);
    AugmentConfig cfg;
    cfg.rotation_enabled = false;
    cfg.noise_sigma = 0.0;
    cfg.target_points = 64;
    Rng rng(5);
    AugmentDrawCounts counts;
    augment_pipeline(cloud, cfg, rng, &counts);
    CHECK(counts.rotation == 0);
    CHECK(counts.noise == 0);
    CHECK(counts.resample > 0);
}

TEST_CASE("augment_pipeline output count matches target_points for any input size") {
    AugmentConfig cfg;
    cfg.target_points = 77;
    for (std::size_t n : {1, 5, 77, 200}) {
        Rng rng(n);
        const PointCloud out = augment_pipeline(random_cloud(n, n), cfg, rng);
        CHECK(out.count() == 77);
    }
    Rng rng(0);
    PointCloud empty;
    CHECK_THROWS_AS(augment_pipeline(empty, cfg, rng), std::invalid_argument);
}
