#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ps2r/mesh.hpp"
#include "ps2r/pointcloud.hpp"
#include "ps2r/sampling.hpp"

namespace ps2r {

struct ManifestItem {
    std::string path; // relative to the manifest directory
    std::optional<std::uint32_t> class_index;
    std::uint32_t object_id = 0;
};

// Class list plus per-split item lists; the canonical splits are
// source_train, target_train_unlabeled, target_val, and target_test.
struct DatasetManifest {
    std::vector<std::string> classes;
    std::map<std::string, std::vector<ManifestItem>> splits;
    std::string base_dir; // directory of the manifest file, set on load

    const std::vector<ManifestItem>& split(const std::string& name) const; // throws if unknown
    std::vector<std::uint64_t> class_counts(const std::string& split_name) const;
    void validate() const;
};

void save_manifest(const std::string& path, const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::string& path);

// w_c = S/(C*N_c) with S the total count; zero-count classes get weight 0
// with a warning on stderr. Throws when every count is zero.
Eigen::VectorXd class_weights(const std::vector<std::uint64_t>& counts);

// Procedural primitives, centered at the origin.
Mesh make_box(const Vec3& half_extents);
Mesh make_cylinder(double radius_x, double radius_y, double half_height, int segments = 24);
Mesh make_cone(double radius_x, double radius_y, double height, int segments = 24);
Mesh make_icosphere(const Vec3& radii, int subdivisions = 2);
Mesh make_torus(double major_x, double major_y, double minor, int major_segments = 20,
                int minor_segments = 10);

// Instance of a corpus class with per-axis scale jitter applied.
// Throws std::invalid_argument for unknown class names.
Mesh make_primitive(const std::string& class_name, const Vec3& scale);

struct CorpusConfig {
    std::vector<std::string> classes{"box", "cylinder", "cone", "icosphere", "torus"};
    // mild 4:2:2:1:1 imbalance by default so class weighting has bite
    std::vector<std::size_t> source_per_class{80, 40, 40, 20, 20};
    std::vector<std::size_t> target_per_class{40, 40, 40, 40, 40};
    double jitter_min = 0.6;
    double jitter_max = 1.4;
    double val_fraction = 0.1;  // of target objects, per class
    double test_fraction = 0.3; // likewise; the rest is unlabeled train
    std::size_t views_per_object = 10;
    double noise_sigma = 0.01;
    SimConfig sim;
    std::uint64_t seed = 0;

    void validate() const;
};

// Writes meshes/ (source: clean OFF meshes) and clouds/ (target: partial
// multi-view scans with random z-orientation and Gaussian noise, PS2R) under
// out_dir plus manifest.json; byte-identical trees per config and seed.
DatasetManifest gen_corpus(const std::string& out_dir, const CorpusConfig& cfg);

struct LoadedItem {
    std::variant<Mesh, PointCloud> data;
    std::optional<std::uint32_t> label;
    std::uint32_t object_id = 0;
};

// Items of a split in manifest order; clouds carry label/object_id/view_id
// tags. Throws on unknown splits and on unreadable files, naming the path.
std::vector<LoadedItem> load_split(const DatasetManifest& manifest, const std::string& split_name);

} // namespace ps2r
