#include "ps2r/dataset.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <stdexcept>

#include "ps2r/augment.hpp"
#include "ps2r/rng.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace ps2r {

namespace {

const char* kCanonicalSplits[] = {"source_train", "target_train_unlabeled", "target_val",
                                  "target_test"};

} // namespace

const std::vector<ManifestItem>& DatasetManifest::split(const std::string& name) const {
    const auto it = splits.find(name);
    if (it == splits.end()) throw std::invalid_argument("unknown split '" + name + "'");
    return it->second;
}

std::vector<std::uint64_t> DatasetManifest::class_counts(const std::string& split_name) const {
    std::vector<std::uint64_t> counts(classes.size(), 0);
    for (const auto& item : split(split_name))
        if (item.class_index) ++counts[*item.class_index];
    return counts;
}

void DatasetManifest::validate() const {
    if (classes.empty()) throw std::invalid_argument("manifest: empty class list");
    for (const auto& [name, items] : splits) {
        for (const auto& item : items) {
            if (item.path.empty())
                throw std::invalid_argument("manifest: empty path in split '" + name + "'");
            if (item.class_index && *item.class_index >= classes.size())
                throw std::invalid_argument("manifest: class index out of range for '" +
                                            item.path + "'");
            if (name == std::string("target_train_unlabeled") && item.class_index)
                throw std::invalid_argument(
                    "manifest: target_train_unlabeled items must be unlabeled");
        }
    }
}

void save_manifest(const std::string& path, const DatasetManifest& manifest) {
    manifest.validate();
    ordered_json j;
    j["classes"] = manifest.classes;
    ordered_json splits = ordered_json::object();
    auto emit = [&](const std::string& name, const std::vector<ManifestItem>& items) {
        ordered_json arr = ordered_json::array();
        for (const auto& item : items) {
            ordered_json o;
            o["path"] = item.path;
            if (item.class_index)
                o["class"] = *item.class_index;
            else
                o["class"] = nullptr;
            o["object_id"] = item.object_id;
            arr.push_back(std::move(o));
        }
        splits[name] = std::move(arr);
    };
    for (const char* name : kCanonicalSplits) {
        const auto it = manifest.splits.find(name);
        if (it != manifest.splits.end()) emit(name, it->second);
    }
    for (const auto& [name, items] : manifest.splits) {
        if (std::find_if(std::begin(kCanonicalSplits), std::end(kCanonicalSplits),
                         [&](const char* c) { return name == c; }) == std::end(kCanonicalSplits))
            emit(name, items);
    }
    j["splits"] = std::move(splits);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("manifest write failed: " + path);
}

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error("manifest parse error in " + path + ": " + e.what());
    }

    DatasetManifest m;
    if (!j.is_object() || !j.contains("classes") || !j.contains("splits"))
        throw std::runtime_error("manifest " + path + ": expected {classes, splits}");
    for (const auto& c : j.at("classes")) m.classes.push_back(c.get<std::string>());
    for (const auto& [name, items] : j.at("splits").items()) {
        std::vector<ManifestItem> list;
        for (const auto& o : items) {
            for (const auto& [key, val] : o.items()) {
                (void)val;
                if (key != "path" && key != "class" && key != "object_id")
                    throw std::runtime_error("manifest " + path + ": unknown item key '" + key +
                                             "'");
            }
            ManifestItem item;
            item.path = o.at("path").get<std::string>();
            if (!o.at("class").is_null()) item.class_index = o.at("class").get<std::uint32_t>();
            item.object_id = o.at("object_id").get<std::uint32_t>();
            list.push_back(std::move(item));
        }
        m.splits.emplace(name, std::move(list));
    }
    m.base_dir = fs::path(path).parent_path().string();
    if (m.base_dir.empty()) m.base_dir = ".";
    m.validate();
    return m;
}

Eigen::VectorXd class_weights(const std::vector<std::uint64_t>& counts) {
    const std::size_t C = counts.size();
    if (C == 0) throw std::invalid_argument("class_weights: empty counts");
    double total = 0.0;
    for (auto n : counts) total += static_cast<double>(n);
    if (total == 0.0) throw std::invalid_argument("class_weights: all counts zero");

    Eigen::VectorXd w(C);
    for (std::size_t c = 0; c < C; ++c) {
        if (counts[c] == 0) {
            std::cerr << "warning: class " << c << " has zero training instances; weight set to 0\n";
            w(c) = 0.0;
        } else {
            w(c) = total / (static_cast<double>(C) * static_cast<double>(counts[c]));
        }
    }
    return w;
}

void CorpusConfig::validate() const {
    if (classes.size() < 2) throw std::invalid_argument("corpus config: need >= 2 classes");
    if (source_per_class.size() != classes.size() || target_per_class.size() != classes.size())
        throw std::invalid_argument("corpus config: per-class count lists must match class list");
    for (std::size_t n : source_per_class)
        if (n == 0) throw std::invalid_argument("corpus config: source counts must be positive");
    for (std::size_t n : target_per_class)
        if (n == 0) throw std::invalid_argument("corpus config: target counts must be positive");
    if (!(jitter_min > 0.0) || !(jitter_max >= jitter_min))
        throw std::invalid_argument("corpus config: bad jitter range");
    if (val_fraction < 0.0 || test_fraction < 0.0 || val_fraction + test_fraction >= 1.0)
        throw std::invalid_argument("corpus config: bad split fractions");
    if (views_per_object < 1)
        throw std::invalid_argument("corpus config: views_per_object must be >= 1");
    if (noise_sigma < 0.0) throw std::invalid_argument("corpus config: noise_sigma must be >= 0");
    sim.viewpoint.validate();
}

DatasetManifest gen_corpus(const std::string& out_dir, const CorpusConfig& cfg) {
    cfg.validate();
    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "meshes", ec);
    fs::create_directories(fs::path(out_dir) / "clouds", ec);
    if (ec) throw std::runtime_error("cannot create corpus directories under " + out_dir);

    DatasetManifest manifest;
    manifest.classes = cfg.classes;
    manifest.base_dir = out_dir;
    for (const char* name : kCanonicalSplits) manifest.splits.emplace(name, std::vector<ManifestItem>{});

    std::uint32_t object_id = 0;
    auto draw_scale = [&cfg](Rng& rng) {
        const double sx = rng.uniform(cfg.jitter_min, cfg.jitter_max);
        const double sy = rng.uniform(cfg.jitter_min, cfg.jitter_max);
        const double sz = rng.uniform(cfg.jitter_min, cfg.jitter_max);
        return Vec3{sx, sy, sz};
    };

    // source: clean meshes
    for (std::size_t ci = 0; ci < cfg.classes.size(); ++ci) {
        for (std::size_t inst = 0; inst < cfg.source_per_class[ci]; ++inst) {
            Rng rng(derive_seed(cfg.seed, {stream_tag("corpus"), 0, ci, inst}));
            Mesh mesh = make_primitive(cfg.classes[ci], draw_scale(rng));
            mesh.name = std::to_string(object_id);
            const std::string rel = "meshes/" + std::to_string(object_id) + ".off";
            write_off_file((fs::path(out_dir) / rel).string(), mesh);
            manifest.splits["source_train"].push_back(
                {rel, static_cast<std::uint32_t>(ci), object_id});
            ++object_id;
        }
    }

    // target: partial multi-view scans with random orientation + noise
    for (std::size_t ci = 0; ci < cfg.classes.size(); ++ci) {
        const std::size_t n = cfg.target_per_class[ci];
        const std::size_t n_val =
            std::max<std::size_t>(1, static_cast<std::size_t>(n * cfg.val_fraction));
        const std::size_t n_test =
            std::max<std::size_t>(1, static_cast<std::size_t>(n * cfg.test_fraction));
        if (n_val + n_test >= n)
            throw std::invalid_argument("corpus config: too few target objects for the split "
                                        "fractions in class " +
                                        cfg.classes[ci]);
        const std::size_t n_unlabeled = n - n_val - n_test;

        for (std::size_t inst = 0; inst < n; ++inst) {
            Rng rng(derive_seed(cfg.seed, {stream_tag("corpus"), 1, ci, inst}));
            Mesh mesh = make_primitive(cfg.classes[ci], draw_scale(rng));
            mesh.name = std::to_string(object_id);
            const auto clouds =
                simulate_views(mesh, cfg.views_per_object, cfg.sim,
                               derive_seed(cfg.seed, {stream_tag("corpus_sim"), ci, inst}),
                               object_id);

            const std::string split_name = inst < n_unlabeled ? "target_train_unlabeled"
                                           : inst < n_unlabeled + n_val ? "target_val"
                                                                        : "target_test";
            const bool labeled = split_name != std::string("target_train_unlabeled");
            for (const auto& cloud : clouds) {
                Rng ar(derive_seed(cfg.seed,
                                   {stream_tag("corpus_aug"), ci, inst, cloud.view_id}));
                PointCloud c = rotate_z(cloud, ar.uniform(0.0, 2.0 * 3.14159265358979323846));
                c = add_noise(c, cfg.noise_sigma, 0.0, ar);
                const std::string rel = "clouds/" + std::to_string(object_id) + "_v" +
                                        std::to_string(cloud.view_id) + ".ps2r";
                write_ps2r_file((fs::path(out_dir) / rel).string(), c);
                ManifestItem item;
                item.path = rel;
                if (labeled) item.class_index = static_cast<std::uint32_t>(ci);
                item.object_id = object_id;
                manifest.splits[split_name].push_back(std::move(item));
            }
            ++object_id;
        }
    }

    save_manifest((fs::path(out_dir) / "manifest.json").string(), manifest);
    return manifest;
}

std::vector<LoadedItem> load_split(const DatasetManifest& manifest,
                                   const std::string& split_name) {
    const auto& items = manifest.split(split_name);
    std::vector<LoadedItem> out;
    out.reserve(items.size());
    for (const auto& item : items) {
        const std::string full =
            (manifest.base_dir.empty() ? fs::path(item.path)
                                       : fs::path(manifest.base_dir) / item.path)
                .string();
        LoadedItem loaded;
        loaded.label = item.class_index;
        loaded.object_id = item.object_id;
        try {
            if (full.size() >= 5 && full.substr(full.size() - 5) == ".ps2r") {
                PointCloud cloud = read_ps2r_file(full);
                cloud.label = item.class_index;
                cloud.object_id = item.object_id;
                cloud.domain = Domain::target;
                // view index from the "<object>_v<view>" naming convention
                const auto vpos = item.path.rfind("_v");
                if (vpos != std::string::npos)
                    cloud.view_id =
                        static_cast<std::uint32_t>(std::strtoul(item.path.c_str() + vpos + 2,
                                                                nullptr, 10));
                loaded.data = std::move(cloud);
            } else if (full.size() >= 4 && full.substr(full.size() - 4) == ".obj") {
                loaded.data = parse_obj_file(full);
            } else {
                loaded.data = parse_off_file(full);
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("load_split: failed to load '" + full + "': " + e.what());
        }
        out.push_back(std::move(loaded));
    }
    return out;
}

} // namespace ps2r
