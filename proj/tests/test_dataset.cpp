#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ps2r/dataset.hpp"

using namespace ps2r;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::path("/tmp") / ("ps2r_ds_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::map<std::string, std::string> tree_contents(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        out[fs::relative(entry.path(), root).string()] =
            std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    return out;
}

CorpusConfig tiny_corpus(std::uint64_t seed) {
    CorpusConfig cfg;
    cfg.classes = {"box", "cylinder"};
    cfg.source_per_class = {3, 2};
    cfg.target_per_class = {5, 5};
    cfg.val_fraction = 0.2;
    cfg.test_fraction = 0.3;
    cfg.views_per_object = 2;
    cfg.sim.viewpoint.width = 32;
    cfg.sim.viewpoint.height = 32;
    cfg.sim.viewpoint.focal_px = 32.0;
    cfg.sim.min_points = 10;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("class weights follow S/(C*N_c)") {
    const Eigen::VectorXd balanced = class_weights({7, 7, 7});
    for (int c = 0; c < 3; ++c) CHECK(balanced(c) == 1.0);

    const Eigen::VectorXd two = class_weights({10, 30});
    CHECK(two(0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(two(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    // five classes, 3116 instances total, 2458 of them in class 0
    const Eigen::VectorXd five = class_weights({2458, 500, 100, 50, 8});
    CHECK(five(0) == doctest::Approx(0.2535394629780309).epsilon(1e-15));

    // count-weighted mean weight is 1 when every class is populated
    const std::vector<std::uint64_t> counts{12, 3, 45, 6, 9};
    const Eigen::VectorXd w = class_weights(counts);
    double total = 0.0, weighted = 0.0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        total += double(counts[c]);
        weighted += double(counts[c]) * w(c);
    }
    CHECK(weighted / total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("class weights handle zero-count classes") {
    const Eigen::VectorXd w = class_weights({4, 0, 4});
    CHECK(w(1) == 0.0);
    CHECK(w(0) == doctest::Approx(8.0 / 12.0).epsilon(1e-15));
    CHECK_THROWS_AS(class_weights({0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(class_weights({}), std::invalid_argument);
}

TEST_CASE("manifest survives a save/load round-trip") {
    DatasetManifest m;
    m.classes = {"box", "cylinder"};
    m.splits["source_train"] = {{"meshes/0.off", 0u, 0}, {"meshes/1.off", 1u, 1}};
    m.splits["target_train_unlabeled"] = {{"clouds/2_v0.ps2r", std::nullopt, 2}};
    m.splits["target_test"] = {{"clouds/3_v1.ps2r", 1u, 3}};

    TempDir dir("manifest");
    const std::string path = (dir.path / "manifest.json").string();
    save_manifest(path, m);
    const DatasetManifest r = load_manifest(path);

    CHECK(r.classes == m.classes);
    CHECK(r.base_dir == dir.path.string());
    REQUIRE(r.split("source_train").size() == 2);
    CHECK(r.split("source_train")[1].path == "meshes/1.off");
    CHECK(r.split("source_train")[1].class_index == 1u);
    CHECK(r.split("source_train")[1].object_id == 1);
    CHECK(!r.split("target_train_unlabeled")[0].class_index.has_value());
    CHECK(r.split("target_test")[0].class_index == 1u);
    CHECK_THROWS_AS(r.split("nope"), std::invalid_argument);
}

TEST_CASE("manifest loading rejects malformed input") {
    TempDir dir("badmanifest");
    const auto write = [&](const std::string& name, const std::string& body) {
        std::ofstream out(dir.path / name);
        out << body;
        return (dir.path / name).string();
    };

    const std::string unknown_key = write("extra.json", R"({
      "classes": ["a", "b"],
      "splits": {"source_train": [{"path": "x.off", "class": 0, "object_id": 1, "extra": 5}]}
    })");
    CHECK_THROWS_WITH_AS(load_manifest(unknown_key),
                         doctest::Contains("unknown item key 'extra'"), std::runtime_error);

    const std::string labeled_unlabeled = write("labeled.json", R"({
      "classes": ["a", "b"],
      "splits": {"target_train_unlabeled": [{"path": "x.ps2r", "class": 0, "object_id": 1}]}
    })");
    CHECK_THROWS_AS(load_manifest(labeled_unlabeled), std::invalid_argument);

    const std::string bad_index = write("range.json", R"({
      "classes": ["a"],
      "splits": {"source_train": [{"path": "x.off", "class": 3, "object_id": 1}]}
    })");
    CHECK_THROWS_AS(load_manifest(bad_index), std::invalid_argument);

    const std::string not_json = write("garbage.json", "not json at all {");
    CHECK_THROWS_AS(load_manifest(not_json), std::runtime_error);

    CHECK_THROWS_AS(load_manifest((dir.path / "missing.json").string()), std::runtime_error);
}

TEST_CASE("generated corpus has the configured shape") {
    TempDir dir("corpus");
    const CorpusConfig cfg = tiny_corpus(5);
    const DatasetManifest m = gen_corpus(dir.path.string(), cfg);

    CHECK(m.split("source_train").size() == 5);
    // per class: 5 targets -> 1 val, 1 test, 3 unlabeled; 2 views each
    CHECK(m.split("target_train_unlabeled").size() == 2 * 3 * 2);
    CHECK(m.split("target_val").size() == 2 * 1 * 2);
    CHECK(m.split("target_test").size() == 2 * 1 * 2);

    for (const auto& item : m.split("target_train_unlabeled"))
        CHECK(!item.class_index.has_value());
    for (const auto& item : m.split("target_val")) CHECK(item.class_index.has_value());

    // target splits partition the target objects
    std::set<std::uint32_t> seen;
    for (const char* split : {"target_train_unlabeled", "target_val", "target_test"}) {
        std::set<std::uint32_t> ids;
        for (const auto& item : m.split(split)) ids.insert(item.object_id);
        for (auto id : ids) CHECK(seen.insert(id).second);
    }
    CHECK(seen.size() == 10);

    for (const char* split :
         {"source_train", "target_train_unlabeled", "target_val", "target_test"})
        for (const auto& item : m.split(split))
            CHECK(fs::exists(dir.path / item.path));

    // the saved manifest re-loads to the same structure
    const DatasetManifest r = load_manifest((dir.path / "manifest.json").string());
    CHECK(r.classes == m.classes);
    for (const char* split :
         {"source_train", "target_train_unlabeled", "target_val", "target_test"})
        CHECK(r.split(split).size() == m.split(split).size());
}

TEST_CASE("corpus generation is byte-identical per seed") {
    TempDir a("corpus_a");
    TempDir b("corpus_b");
    TempDir c("corpus_c");
    gen_corpus(a.path.string(), tiny_corpus(9));
    gen_corpus(b.path.string(), tiny_corpus(9));
    gen_corpus(c.path.string(), tiny_corpus(10));

    const auto ta = tree_contents(a.path);
    const auto tb = tree_contents(b.path);
    const auto tc = tree_contents(c.path);
    CHECK(ta == tb);

    REQUIRE(tc.size() == ta.size());
    bool any_diff = false;
    for (const auto& [rel, bytes] : ta)
        if (tc.at(rel) != bytes) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("load_split returns tagged items in manifest order") {
    TempDir dir("load");
    const CorpusConfig cfg = tiny_corpus(3);
    const DatasetManifest m = gen_corpus(dir.path.string(), cfg);

    const auto meshes = load_split(m, "source_train");
    REQUIRE(meshes.size() == 5);
    for (std::size_t i = 0; i < meshes.size(); ++i) {
        CHECK(std::holds_alternative<Mesh>(meshes[i].data));
        CHECK(meshes[i].label == m.split("source_train")[i].class_index);
        CHECK(meshes[i].object_id == m.split("source_train")[i].object_id);
    }

    const auto clouds = load_split(m, "target_val");
    REQUIRE(clouds.size() == 4);
    for (std::size_t i = 0; i < clouds.size(); ++i) {
        REQUIRE(std::holds_alternative<PointCloud>(clouds[i].data));
        const PointCloud& pc = std::get<PointCloud>(clouds[i].data);
        CHECK(pc.domain == Domain::target);
        CHECK(pc.label == m.split("target_val")[i].class_index);
        CHECK(pc.object_id == m.split("target_val")[i].object_id);
        const auto& path = m.split("target_val")[i].path;
        const auto vpos = path.rfind("_v");
        CHECK(pc.view_id == std::stoul(path.substr(vpos + 2)));
        CHECK(pc.count() >= cfg.sim.min_points);
    }

    const auto unlabeled = load_split(m, "target_train_unlabeled");
    for (const auto& item : unlabeled) {
        CHECK(!item.label.has_value());
        CHECK(!std::get<PointCloud>(item.data).label.has_value());
    }
}

TEST_CASE("load_split names the offending path on failure") {
    DatasetManifest m;
    m.classes = {"a"};
    m.splits["source_train"] = {{"meshes/ghost.off", 0u, 0}};
    m.base_dir = "/tmp/ps2r_ds_nowhere";
    try {
        load_split(m, "source_train");
        FAIL("expected error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("meshes/ghost.off") != std::string::npos);
    }
    CHECK_THROWS_AS(load_split(m, "bogus"), std::invalid_argument);
}

TEST_CASE("make_box spans exactly the half-extents") {
    const Vec3 h{0.5, 1.0, 0.25};
    const Mesh box = make_box(h);
    box.validate();
    CHECK(box.vertices.size() == 8);
    CHECK(box.triangles.size() == 12);
    Vec3 lo{1e9, 1e9, 1e9}, hi{-1e9, -1e9, -1e9};
    for (const auto& v : box.vertices) {
        lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
        hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
    }
    CHECK(lo.x == -h.x);
    CHECK(lo.y == -h.y);
    CHECK(lo.z == -h.z);
    CHECK(hi.x == h.x);
    CHECK(hi.y == h.y);
    CHECK(hi.z == h.z);
}

TEST_CASE("every corpus class yields a valid primitive") {
    for (const std::string name : {"box", "cylinder", "cone", "icosphere", "torus"}) {
        const Mesh m = make_primitive(name, {1.0, 0.8, 1.2});
        m.validate();
        CHECK(!m.triangles.empty());
        CHECK(!m.vertices.empty());
    }
    CHECK_THROWS_AS(make_primitive("teapot", {1, 1, 1}), std::invalid_argument);
}

TEST_CASE("corpus config validation rejects bad settings") {
    CorpusConfig cfg = tiny_corpus(1);
    cfg.classes = {"box"};
    cfg.source_per_class = {3};
    cfg.target_per_class = {5};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg = tiny_corpus(1);
    cfg.source_per_class = {3};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg = tiny_corpus(1);
    cfg.jitter_min = -0.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg = tiny_corpus(1);
    cfg.jitter_max = 0.1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg = tiny_corpus(1);
    cfg.val_fraction = 0.7;
    cfg.test_fraction = 0.4;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg = tiny_corpus(1);
    cfg.views_per_object = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    // too few target objects for the fractions
    TempDir dir("fracfail");
    cfg = tiny_corpus(1);
    cfg.target_per_class = {2, 2};
    CHECK_THROWS_AS(gen_corpus(dir.path.string(), cfg), std::invalid_argument);
}
