#include "ps2r/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>

#include "ps2r/checkpoint.hpp"
#include "ps2r/dataset.hpp"
#include "ps2r/metrics.hpp"
#include "ps2r/nn.hpp"
#include "ps2r/render.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace ps2r::cli {

namespace {

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Binds JSON config keys to CLI11 options; a config value applies only when
// the flag was not given on the command line. Unknown keys are rejected.
class ConfigBinder {
public:
    template <typename T>
    void bind(CLI::Option* opt, const std::string& key, T& target) {
        entries_.push_back({key, opt, [&target](const nlohmann::json& v) {
                                target = v.get<T>();
                            }});
    }

    void merge(const std::string& config_path) const {
        if (config_path.empty()) return;
        std::ifstream in(config_path);
        if (!in) throw UsageError("cannot open config file: " + config_path);
        nlohmann::json cfg;
        try {
            in >> cfg;
        } catch (const std::exception& e) {
            throw UsageError("config parse error in " + config_path + ": " + e.what());
        }
        if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");
        for (const auto& [key, value] : cfg.items()) {
            const auto it =
                std::find_if(entries_.begin(), entries_.end(),
                             [&](const Entry& e) { return e.key == key; });
            if (it == entries_.end()) throw UsageError("unknown config key '" + key + "'");
            if (it->opt->count() == 0) {
                try {
                    it->apply(value);
                } catch (const std::exception& e) {
                    throw UsageError("bad config value for '" + key + "': " + e.what());
                }
            }
        }
    }

private:
    struct Entry {
        std::string key;
        CLI::Option* opt;
        std::function<void(const nlohmann::json&)> apply;
    };
    std::vector<Entry> entries_;
};

struct ViewFlags {
    std::uint32_t res = 128;
    double focal = 128.0;
    std::size_t min_points = 30;
    double elev_min = 10.0;
    double elev_max = 80.0;
    double r_min = 2.0;
    double r_max = 4.0;

    void bind(CLI::App* cmd, ConfigBinder& cfgb) {
        cfgb.bind(cmd->add_option("--res", res, "square render resolution in pixels"), "res", res);
        cfgb.bind(cmd->add_option("--focal", focal, "focal length in pixels"), "focal", focal);
        cfgb.bind(cmd->add_option("--min-points", min_points, "minimum points per view"),
                  "min-points", min_points);
        cfgb.bind(cmd->add_option("--elev-min", elev_min, "min elevation (degrees)"), "elev-min",
                  elev_min);
        cfgb.bind(cmd->add_option("--elev-max", elev_max, "max elevation (degrees)"), "elev-max",
                  elev_max);
        cfgb.bind(cmd->add_option("--r-min", r_min, "min camera distance (x bounding radius)"),
                  "r-min", r_min);
        cfgb.bind(cmd->add_option("--r-max", r_max, "max camera distance (x bounding radius)"),
                  "r-max", r_max);
    }

    SimConfig sim_config() const {
        SimConfig sim;
        sim.viewpoint.width = res;
        sim.viewpoint.height = res;
        sim.viewpoint.focal_px = focal;
        sim.viewpoint.elev_min_deg = elev_min;
        sim.viewpoint.elev_max_deg = elev_max;
        sim.viewpoint.r_min = r_min;
        sim.viewpoint.r_max = r_max;
        sim.min_points = min_points;
        return sim;
    }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------- gen-corpus

struct GenCorpusArgs {
    std::string out;
    std::string config;
    CorpusConfig corpus;
    ViewFlags view;
    std::vector<std::size_t> source_counts;
    std::vector<std::size_t> target_counts;
};

int run_gen_corpus(GenCorpusArgs& a) {
    // per-class counts: broadcast a single value, otherwise sizes must match
    auto resolve_counts = [&](std::vector<std::size_t>& given,
                              const std::vector<std::size_t>& ratio_defaults) {
        if (given.empty()) {
            std::vector<std::size_t> counts(a.corpus.classes.size());
            for (std::size_t i = 0; i < counts.size(); ++i)
                counts[i] = ratio_defaults[i % ratio_defaults.size()];
            return counts;
        }
        if (given.size() == 1)
            return std::vector<std::size_t>(a.corpus.classes.size(), given[0]);
        if (given.size() != a.corpus.classes.size())
            throw UsageError("per-class count list must have one entry or match --classes");
        return given;
    };
    a.corpus.source_per_class = resolve_counts(a.source_counts, {80, 40, 40, 20, 20});
    a.corpus.target_per_class = resolve_counts(a.target_counts, {40});
    a.corpus.sim = a.view.sim_config();

    const DatasetManifest manifest = gen_corpus(a.out, a.corpus);
    std::size_t total = 0;
    for (const auto& [name, items] : manifest.splits) total += items.size();
    std::cout << "corpus written to " << a.out << " (" << manifest.classes.size() << " classes, "
              << total << " items)\n";
    return 0;
}

// ------------------------------------------------------------------ simulate

struct SimulateArgs {
    std::string mesh_path;
    std::string manifest_path;
    std::string out;
    std::string config;
    std::size_t views = 10;
    std::uint64_t seed = 0;
    int max_attempts = 16;
    ViewFlags view;
};

int run_simulate(SimulateArgs& a) {
    if (a.mesh_path.empty() == a.manifest_path.empty())
        throw UsageError("simulate: give exactly one of --mesh or --manifest");
    if (a.views < 1) throw UsageError("simulate: --views must be >= 1");
    SimConfig sim = a.view.sim_config();
    sim.max_attempts = a.max_attempts;

    std::error_code ec;
    fs::create_directories(a.out, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + a.out);

    struct Job {
        Mesh mesh;
        std::uint32_t object_id;
    };
    std::vector<Job> jobs;
    if (!a.mesh_path.empty()) {
        Mesh mesh = a.mesh_path.size() >= 4 && a.mesh_path.substr(a.mesh_path.size() - 4) == ".obj"
                        ? parse_obj_file(a.mesh_path)
                        : parse_off_file(a.mesh_path);
        jobs.push_back({std::move(mesh), 0});
    } else {
        const DatasetManifest manifest = load_manifest(a.manifest_path);
        for (const auto& item : load_split(manifest, "source_train")) {
            if (!std::holds_alternative<Mesh>(item.data))
                throw std::runtime_error("simulate: source_train item is not a mesh");
            jobs.push_back({std::get<Mesh>(item.data), item.object_id});
        }
    }

    std::size_t written = 0;
    for (const auto& job : jobs) {
        const auto clouds =
            simulate_views(job.mesh, a.views, sim,
                           derive_seed(a.seed, {stream_tag("simulate"), job.object_id}),
                           job.object_id);
        for (const auto& cloud : clouds) {
            const std::string name = std::to_string(job.object_id) + "_v" +
                                     std::to_string(cloud.view_id) + ".ps2r";
            write_ps2r_file((fs::path(a.out) / name).string(), cloud);
            ++written;
        }
    }
    std::cout << written << " clouds written to " << a.out << "\n";
    return 0;
}

// --------------------------------------------------------------------- train

struct TrainArgs {
    std::string manifest_path;
    std::string out;
    std::string config;
    std::string ablation = "baseline"; // baseline | a | as | ase
    std::string encoder = "point_mlp";
    std::vector<int> widths{64, 128, 256};
    std::vector<int> hidden{128, 64};
    int k = 20;
    std::size_t target_points = 1024;
    std::size_t source_samples = 0; // 0 = 2 * target_points
    std::size_t views = 10;
    double aug_sigma = 0.01;
    double aug_mean = 0.0;
    TrainConfig tc;
    ViewFlags view;
};

struct AblationFlags {
    bool augment = false;
    bool multiview = false;
    bool entropy = false;
};

AblationFlags parse_ablation(const std::string& name) {
    if (name == "baseline") return {false, false, false};
    if (name == "a") return {true, false, false};
    if (name == "as") return {true, true, false};
    if (name == "ase") return {true, true, true};
    throw UsageError("unknown ablation '" + name + "' (use baseline, a, as, or ase)");
}

int run_train(TrainArgs& a) {
    const AblationFlags flags = parse_ablation(a.ablation);

    EncoderConfig enc;
    enc.kind = [&] {
        if (a.encoder == "point_mlp") return EncoderKind::point_mlp;
        if (a.encoder == "edge_conv") return EncoderKind::edge_conv;
        throw UsageError("unknown encoder '" + a.encoder + "' (use point_mlp or edge_conv)");
    }();
    enc.layer_widths = a.widths;
    enc.k = a.k;
    enc.validate();

    const DatasetManifest manifest = load_manifest(a.manifest_path);
    ClassifierConfig cls;
    cls.hidden_widths = a.hidden;
    cls.num_classes = static_cast<int>(manifest.classes.size());
    cls.validate();

    TrainConfig tc = a.tc;
    tc.use_augment = flags.augment;
    tc.use_entropy = flags.entropy;
    tc.augment.target_points = a.target_points;
    tc.augment.noise_sigma = a.aug_sigma;
    tc.augment.noise_mean = a.aug_mean;
    tc.augment.rotation_enabled = true;
    tc.augment.normalize = true;
    tc.validate();

    const std::size_t source_samples =
        a.source_samples > 0 ? a.source_samples : 2 * a.target_points;
    const SimConfig sim = a.view.sim_config();

    // source data: clean surface samples, or simulated multi-view scans (S)
    std::vector<PointCloud> source;
    for (const auto& item : load_split(manifest, "source_train")) {
        if (!std::holds_alternative<Mesh>(item.data))
            throw std::runtime_error("train: source_train item is not a mesh");
        if (!item.label) throw std::runtime_error("train: source_train item without class");
        const Mesh& mesh = std::get<Mesh>(item.data);
        if (flags.multiview) {
            auto clouds = simulate_views(
                mesh, a.views, sim,
                derive_seed(tc.seed, {stream_tag("simulate"), item.object_id}), item.object_id);
            for (auto& c : clouds) {
                c.label = item.label;
                source.push_back(std::move(c));
            }
        } else {
            PointCloud c = sample_surface(
                mesh, source_samples,
                derive_seed(tc.seed, {stream_tag("sample"), item.object_id}));
            c.label = item.label;
            c.object_id = item.object_id;
            c.view_id = 0;
            source.push_back(std::move(c));
        }
    }

    std::vector<PointCloud> target;
    if (flags.entropy) {
        for (auto& item : load_split(manifest, "target_train_unlabeled"))
            target.push_back(std::move(std::get<PointCloud>(item.data)));
    }
    std::vector<PointCloud> val;
    for (auto& item : load_split(manifest, "target_val")) {
        if (!item.label) throw std::runtime_error("train: target_val item without class");
        val.push_back(std::move(std::get<PointCloud>(item.data)));
    }

    std::vector<std::uint64_t> counts(manifest.classes.size(), 0);
    for (const auto& c : source) ++counts[*c.label];
    const Eigen::VectorXd weights = class_weights(counts);

    const TrainResult result = train(source, target, val, weights, tc, enc, cls);

    std::error_code ec;
    fs::create_directories(a.out, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + a.out);
    save_checkpoint((fs::path(a.out) / "checkpoint.ps2w").string(), result.params, enc, cls,
                    a.target_points);

    std::string history;
    for (const auto& e : result.history) {
        ordered_json line;
        line["epoch"] = e.epoch;
        line["train_loss"] = e.train_loss;
        if (e.val_acc)
            line["val_acc"] = *e.val_acc;
        else
            line["val_acc"] = nullptr;
        history += line.dump() + "\n";
    }
    write_text((fs::path(a.out) / "history.jsonl").string(), history);

    ordered_json report;
    report["ablation"] = a.ablation;
    report["seed"] = tc.seed;
    report["epochs"] = tc.epochs;
    report["best_epoch"] = result.best_epoch;
    report["rotation_draws"] = result.draw_counts.rotation;
    report["noise_draws"] = result.draw_counts.noise;
    report["resample_draws"] = result.draw_counts.resample;
    write_text((fs::path(a.out) / "run_report.json").string(), report.dump(2) + "\n");

    std::cout << "checkpoint written to " << (fs::path(a.out) / "checkpoint.ps2w").string()
              << " (best epoch " << result.best_epoch << ")\n";
    return 0;
}

// ---------------------------------------------------------------------- eval

struct EvalArgs {
    std::string checkpoint;
    std::string manifest_path;
    std::string split = "target_test";
    std::string out;
    std::string config;
    std::uint64_t seed = 0;
};

PointCloud item_cloud(const LoadedItem& item, std::size_t surface_samples, std::uint64_t seed) {
    if (std::holds_alternative<PointCloud>(item.data)) return std::get<PointCloud>(item.data);
    const Mesh& mesh = std::get<Mesh>(item.data);
    PointCloud c = sample_surface(mesh, surface_samples,
                                  derive_seed(seed, {stream_tag("eval_sample"), item.object_id}));
    c.label = item.label;
    c.object_id = item.object_id;
    return c;
}

int run_eval(EvalArgs& a) {
    const LoadedCheckpoint ck = load_checkpoint(a.checkpoint);
    const DatasetManifest manifest = load_manifest(a.manifest_path);
    if (ck.cls.num_classes != static_cast<int>(manifest.classes.size()))
        throw UsageError("eval: checkpoint has " + std::to_string(ck.cls.num_classes) +
                         " classes but manifest has " + std::to_string(manifest.classes.size()));

    const auto items = load_split(manifest, a.split);
    ConfusionMatrix cm(manifest.classes.size());
    for (const auto& item : items) {
        if (!item.label) throw UsageError("eval: split '" + a.split + "' has unlabeled items");
        const PointCloud cloud = item_cloud(item, 2 * ck.target_points, a.seed);
        const Prediction pred =
            predict(cloud, ck.params, ck.enc, ck.cls, ck.target_points,
                    derive_seed(a.seed, {stream_tag("eval"), cloud.object_id, cloud.view_id}));
        cm.add(*item.label, static_cast<std::size_t>(predicted_class(pred.probs)));
    }

    ordered_json metrics;
    metrics["accuracy"] = accuracy(cm);
    metrics["weighted_f1"] = weighted_f1(cm);
    metrics["mcc"] = mcc(cm);
    const std::string metrics_text = metrics.dump(2) + "\n";
    std::cout << metrics_text;

    if (!a.out.empty()) {
        std::error_code ec;
        fs::create_directories(a.out, ec);
        if (ec) throw std::runtime_error("cannot create output directory " + a.out);
        write_text((fs::path(a.out) / "metrics.json").string(), metrics_text);
        write_text((fs::path(a.out) / "confusion.csv").string(),
                   confusion_csv(cm, manifest.classes));
        write_text((fs::path(a.out) / "class_accuracy.csv").string(),
                   class_accuracy_csv(cm, manifest.classes));
    }
    return 0;
}

// ----------------------------------------------------------- export-features

struct ExportArgs {
    std::string checkpoint;
    std::string manifest_path;
    std::string split = "target_test";
    std::string out;
    std::string config;
    std::uint64_t seed = 0;
};

int run_export_features(ExportArgs& a) {
    const LoadedCheckpoint ck = load_checkpoint(a.checkpoint);
    const DatasetManifest manifest = load_manifest(a.manifest_path);
    if (ck.cls.num_classes != static_cast<int>(manifest.classes.size()))
        throw UsageError("export-features: checkpoint class count does not match manifest");

    const auto items = load_split(manifest, a.split);
    std::string csv = "object_id,label";
    for (int d = 0; d < ck.enc.feature_dim(); ++d) csv += ",f" + std::to_string(d);
    csv += "\n";
    char buf[40];
    for (const auto& item : items) {
        const PointCloud cloud = item_cloud(item, 2 * ck.target_points, a.seed);
        const Prediction pred =
            predict(cloud, ck.params, ck.enc, ck.cls, ck.target_points,
                    derive_seed(a.seed, {stream_tag("eval"), cloud.object_id, cloud.view_id}));
        csv += std::to_string(item.object_id) + ",";
        csv += item.label ? std::to_string(*item.label) : "-1";
        for (Eigen::Index d = 0; d < pred.global_feature.size(); ++d) {
            std::snprintf(buf, sizeof(buf), "%.17g", pred.global_feature(d));
            csv += ",";
            csv += buf;
        }
        csv += "\n";
    }
    write_text(a.out, csv);
    std::cout << items.size() << " feature rows written to " << a.out << "\n";
    return 0;
}

// -------------------------------------------------------------- render-depth

struct RenderDepthArgs {
    std::string mesh_path;
    std::string out;
    std::string config;
    std::uint64_t seed = 0;
    double azimuth = -1.0;   // degrees; < 0 = sample from seed
    double elevation = 45.0; // degrees
    double radius = 3.0;     // x bounding radius
    ViewFlags view;
};

int run_render_depth(RenderDepthArgs& a) {
    const Mesh mesh =
        a.mesh_path.size() >= 4 && a.mesh_path.substr(a.mesh_path.size() - 4) == ".obj"
            ? parse_obj_file(a.mesh_path)
            : parse_off_file(a.mesh_path);

    SensorView view;
    Rng rng(derive_seed(a.seed, {stream_tag("render")}));
    if (a.azimuth < 0.0) {
        view = sample_viewpoint(mesh.bounding_radius(), rng, a.view.sim_config().viewpoint);
    } else {
        constexpr double kDeg = 3.14159265358979323846 / 180.0;
        const double az = a.azimuth * kDeg;
        const double el = a.elevation * kDeg;
        const double r = a.radius * mesh.bounding_radius();
        view.position = Vec3{r * std::cos(el) * std::cos(az), r * std::cos(el) * std::sin(az),
                             r * std::sin(el)};
        view.target = Vec3{0.0, 0.0, 0.0};
        view.up_hint = Vec3{0.0, 0.0, 1.0};
        view.width = a.view.res;
        view.height = a.view.res;
        view.focal_px = a.view.focal;
        view.cx = 0.5 * a.view.res;
        view.cy = 0.5 * a.view.res;
    }

    const DepthMap depth = render_depth(mesh, view);
    double dmin = 0.0, dmax = 0.0;
    bool any = false;
    for (double d : depth.depths) {
        if (!std::isfinite(d)) continue;
        if (!any || d < dmin) dmin = d;
        if (!any || d > dmax) dmax = d;
        any = true;
    }

    // binary PGM, near = bright, misses black
    std::string pgm = "P5\n" + std::to_string(depth.width) + " " + std::to_string(depth.height) +
                      "\n255\n";
    for (std::uint32_t v = 0; v < depth.height; ++v) {
        for (std::uint32_t u = 0; u < depth.width; ++u) {
            const double d = depth.at(u, v);
            unsigned char g = 0;
            if (std::isfinite(d))
                g = dmax > dmin
                        ? static_cast<unsigned char>(
                              255.0 - std::floor((d - dmin) / (dmax - dmin) * 205.0))
                        : 255;
            pgm.push_back(static_cast<char>(g));
        }
    }
    write_text(a.out, pgm);
    std::cout << "depth image written to " << a.out << " (" << depth.valid_count()
              << " valid pixels)\n";
    return 0;
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"multi-view point-cloud simulation and semi-supervised classification"};
    app.require_subcommand(1);

    GenCorpusArgs gen;
    ConfigBinder gen_cfg;
    auto* gen_cmd = app.add_subcommand("gen-corpus", "generate the procedural benchmark corpus");
    gen_cmd->add_option("--out", gen.out, "output directory")->required();
    gen_cmd->add_option("--config", gen.config, "JSON config file (flags override)");
    gen_cfg.bind(gen_cmd->add_option("--seed", gen.corpus.seed, "corpus seed"), "seed",
                 gen.corpus.seed);
    gen_cfg.bind(gen_cmd->add_option("--classes", gen.corpus.classes, "class names")
                     ->delimiter(','),
                 "classes", gen.corpus.classes);
    auto* src_opt = gen_cmd->add_option("--source-per-class", gen.source_counts,
                                        "source meshes per class (single value broadcasts)");
    src_opt->delimiter(',');
    gen_cfg.bind(src_opt, "source-per-class", gen.source_counts);
    auto* tgt_opt = gen_cmd->add_option("--target-per-class", gen.target_counts,
                                        "target objects per class (single value broadcasts)");
    tgt_opt->delimiter(',');
    gen_cfg.bind(tgt_opt, "target-per-class", gen.target_counts);
    gen_cfg.bind(gen_cmd->add_option("--views", gen.corpus.views_per_object,
                                     "simulated views per target object"),
                 "views", gen.corpus.views_per_object);
    gen_cfg.bind(gen_cmd->add_option("--jitter-min", gen.corpus.jitter_min, "scale jitter lower"),
                 "jitter-min", gen.corpus.jitter_min);
    gen_cfg.bind(gen_cmd->add_option("--jitter-max", gen.corpus.jitter_max, "scale jitter upper"),
                 "jitter-max", gen.corpus.jitter_max);
    gen_cfg.bind(gen_cmd->add_option("--val-fraction", gen.corpus.val_fraction,
                                     "target objects reserved for validation"),
                 "val-fraction", gen.corpus.val_fraction);
    gen_cfg.bind(gen_cmd->add_option("--test-fraction", gen.corpus.test_fraction,
                                     "target objects reserved for test"),
                 "test-fraction", gen.corpus.test_fraction);
    gen_cfg.bind(gen_cmd->add_option("--noise-sigma", gen.corpus.noise_sigma,
                                     "target scan noise sigma"),
                 "noise-sigma", gen.corpus.noise_sigma);
    gen.view.bind(gen_cmd, gen_cfg);

    SimulateArgs sim;
    ConfigBinder sim_cfg;
    auto* sim_cmd = app.add_subcommand("simulate", "render multi-view scans of meshes");
    sim_cmd->add_option("--mesh", sim.mesh_path, "single OFF/OBJ mesh");
    sim_cmd->add_option("--manifest", sim.manifest_path, "corpus manifest (source_train meshes)");
    sim_cmd->add_option("--out", sim.out, "output directory")->required();
    sim_cmd->add_option("--config", sim.config, "JSON config file (flags override)");
    sim_cfg.bind(sim_cmd->add_option("--views", sim.views, "views per mesh"), "views", sim.views);
    sim_cfg.bind(sim_cmd->add_option("--seed", sim.seed, "simulation seed"), "seed", sim.seed);
    sim_cfg.bind(sim_cmd->add_option("--max-attempts", sim.max_attempts,
                                     "viewpoint retries before failing"),
                 "max-attempts", sim.max_attempts);
    sim.view.bind(sim_cmd, sim_cfg);

    TrainArgs tr;
    ConfigBinder tr_cfg;
    auto* tr_cmd = app.add_subcommand("train", "train the point-cloud classifier");
    tr_cmd->add_option("--manifest", tr.manifest_path, "corpus manifest")->required();
    tr_cmd->add_option("--out", tr.out, "output directory")->required();
    tr_cmd->add_option("--config", tr.config, "JSON config file (flags override)");
    tr_cfg.bind(tr_cmd->add_option("--ablation", tr.ablation, "baseline | a | as | ase"),
                "ablation", tr.ablation);
    tr_cfg.bind(tr_cmd->add_option("--seed", tr.tc.seed, "run seed"), "seed", tr.tc.seed);
    tr_cfg.bind(tr_cmd->add_option("--epochs", tr.tc.epochs, "training epochs"), "epochs",
                tr.tc.epochs);
    tr_cfg.bind(tr_cmd->add_option("--batch-size", tr.tc.batch_size, "batch size"), "batch-size",
                tr.tc.batch_size);
    tr_cfg.bind(tr_cmd->add_option("--lr", tr.tc.learning_rate, "learning rate"), "lr",
                tr.tc.learning_rate);
    tr_cfg.bind(tr_cmd->add_option("--weight-decay", tr.tc.weight_decay, "L2 weight decay"),
                "weight-decay", tr.tc.weight_decay);
    tr_cfg.bind(tr_cmd->add_option("--lambda", tr.tc.lambda_entropy, "entropy loss weight"),
                "lambda", tr.tc.lambda_entropy);
    tr_cfg.bind(tr_cmd->add_option("--encoder", tr.encoder, "point_mlp | edge_conv"), "encoder",
                tr.encoder);
    auto* widths_opt = tr_cmd->add_option("--widths", tr.widths, "encoder layer widths");
    widths_opt->delimiter(',');
    tr_cfg.bind(widths_opt, "widths", tr.widths);
    auto* hidden_opt = tr_cmd->add_option("--hidden", tr.hidden, "classifier hidden widths");
    hidden_opt->delimiter(',');
    tr_cfg.bind(hidden_opt, "hidden", tr.hidden);
    tr_cfg.bind(tr_cmd->add_option("--k", tr.k, "edge_conv neighborhood size"), "k", tr.k);
    tr_cfg.bind(tr_cmd->add_option("--target-points", tr.target_points, "points per cloud"),
                "target-points", tr.target_points);
    tr_cfg.bind(tr_cmd->add_option("--source-samples", tr.source_samples,
                                   "surface samples per source mesh (0 = 2x target points)"),
                "source-samples", tr.source_samples);
    tr_cfg.bind(tr_cmd->add_option("--views", tr.views, "simulated views per mesh (S ablation)"),
                "views", tr.views);
    tr_cfg.bind(tr_cmd->add_option("--aug-sigma", tr.aug_sigma, "augmentation noise sigma"),
                "aug-sigma", tr.aug_sigma);
    tr_cfg.bind(tr_cmd->add_option("--aug-mean", tr.aug_mean, "augmentation noise mean"),
                "aug-mean", tr.aug_mean);
    tr.view.bind(tr_cmd, tr_cfg);

    EvalArgs ev;
    ConfigBinder ev_cfg;
    auto* ev_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a split");
    ev_cmd->add_option("--checkpoint", ev.checkpoint, "PS2W checkpoint")->required();
    ev_cmd->add_option("--manifest", ev.manifest_path, "corpus manifest")->required();
    ev_cmd->add_option("--config", ev.config, "JSON config file (flags override)");
    ev_cfg.bind(ev_cmd->add_option("--split", ev.split, "split to evaluate"), "split", ev.split);
    ev_cfg.bind(ev_cmd->add_option("--out", ev.out, "metrics output directory"), "out", ev.out);
    ev_cfg.bind(ev_cmd->add_option("--seed", ev.seed, "evaluation resample seed"), "seed",
                ev.seed);

    ExportArgs ex;
    ConfigBinder ex_cfg;
    auto* ex_cmd = app.add_subcommand("export-features", "dump global features as CSV");
    ex_cmd->add_option("--checkpoint", ex.checkpoint, "PS2W checkpoint")->required();
    ex_cmd->add_option("--manifest", ex.manifest_path, "corpus manifest")->required();
    ex_cmd->add_option("--out", ex.out, "output CSV path")->required();
    ex_cmd->add_option("--config", ex.config, "JSON config file (flags override)");
    ex_cfg.bind(ex_cmd->add_option("--split", ex.split, "split to export"), "split", ex.split);
    ex_cfg.bind(ex_cmd->add_option("--seed", ex.seed, "resample seed"), "seed", ex.seed);

    RenderDepthArgs rd;
    ConfigBinder rd_cfg;
    auto* rd_cmd = app.add_subcommand("render-depth", "debug: write a PGM depth image");
    rd_cmd->add_option("--mesh", rd.mesh_path, "OFF/OBJ mesh")->required();
    rd_cmd->add_option("--out", rd.out, "output PGM path")->required();
    rd_cmd->add_option("--config", rd.config, "JSON config file (flags override)");
    rd_cfg.bind(rd_cmd->add_option("--seed", rd.seed, "viewpoint seed"), "seed", rd.seed);
    rd_cfg.bind(rd_cmd->add_option("--azimuth", rd.azimuth, "azimuth degrees (omit for random)"),
                "azimuth", rd.azimuth);
    rd_cfg.bind(rd_cmd->add_option("--elevation", rd.elevation, "elevation degrees"), "elevation",
                rd.elevation);
    rd_cfg.bind(rd_cmd->add_option("--radius", rd.radius, "distance (x bounding radius)"),
                "radius", rd.radius);
    rd.view.bind(rd_cmd, rd_cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*gen_cmd) {
            gen_cfg.merge(gen.config);
            return run_gen_corpus(gen);
        }
        if (*sim_cmd) {
            sim_cfg.merge(sim.config);
            return run_simulate(sim);
        }
        if (*tr_cmd) {
            tr_cfg.merge(tr.config);
            return run_train(tr);
        }
        if (*ev_cmd) {
            ev_cfg.merge(ev.config);
            return run_eval(ev);
        }
        if (*ex_cmd) {
            ex_cfg.merge(ex.config);
            return run_export_features(ex);
        }
        if (*rd_cmd) {
            rd_cfg.merge(rd.config);
            return run_render_depth(rd);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace ps2r::cli
