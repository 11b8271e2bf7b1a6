#include "ps2r/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ps2r/adam.hpp"

namespace ps2r {

void EncoderConfig::validate() const {
    if (layer_widths.empty()) throw std::invalid_argument("encoder config: layer_widths empty");
    for (int w : layer_widths)
        if (w < 1) throw std::invalid_argument("encoder config: non-positive layer width");
    if (k < 1) throw std::invalid_argument("encoder config: k must be >= 1");
}

void ClassifierConfig::validate() const {
    if (num_classes < 2) throw std::invalid_argument("classifier config: need >= 2 classes");
    for (int w : hidden_widths)
        if (w < 1) throw std::invalid_argument("classifier config: non-positive hidden width");
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
    if (epochs < 0) throw std::invalid_argument("train config: epochs must be >= 0");
    if (learning_rate <= 0.0) throw std::invalid_argument("train config: learning_rate must be > 0");
    if (weight_decay < 0.0) throw std::invalid_argument("train config: weight_decay must be >= 0");
    if (lambda_entropy < 0.0) throw std::invalid_argument("train config: lambda must be >= 0");
    if (beta1 <= 0.0 || beta1 >= 1.0 || beta2 <= 0.0 || beta2 >= 1.0)
        throw std::invalid_argument("train config: betas must lie in (0, 1)");
    if (adam_eps <= 0.0) throw std::invalid_argument("train config: adam eps must be > 0");
    augment.validate();
}

void ModelParams::zero_grads() {
    for (auto& d : encoder) {
        d.gW.setZero();
        d.gb.setZero();
    }
    for (auto& d : classifier) {
        d.gW.setZero();
        d.gb.setZero();
    }
}

std::string ModelParams::tensor_name(bool is_encoder, std::size_t layer, bool is_weight) {
    return std::string(is_encoder ? "enc." : "cls.") + std::to_string(layer) +
           (is_weight ? ".weight" : ".bias");
}

ModelParams init_params(const EncoderConfig& enc, const ClassifierConfig& cls,
                        std::uint64_t seed) {
    enc.validate();
    cls.validate();
    ModelParams p;
    int in = enc.kind == EncoderKind::edge_conv ? 6 : 3;
    for (int w : enc.layer_widths) {
        p.encoder.emplace_back(w, in);
        in = w;
    }
    in = enc.feature_dim();
    for (int w : cls.hidden_widths) {
        p.classifier.emplace_back(w, in);
        in = w;
    }
    p.classifier.emplace_back(cls.num_classes, in);

    Rng rng(derive_seed(seed, {stream_tag("init")}));
    auto fill = [&rng](Dense& d) {
        const double a = std::sqrt(6.0 / static_cast<double>(d.W.rows() + d.W.cols()));
        for (Eigen::Index r = 0; r < d.W.rows(); ++r)
            for (Eigen::Index c = 0; c < d.W.cols(); ++c) d.W(r, c) = rng.uniform(-a, a);
    };
    for (auto& d : p.encoder) fill(d);
    for (auto& d : p.classifier) fill(d);
    return p;
}

void validate_params(const ModelParams& params, const EncoderConfig& enc,
                     const ClassifierConfig& cls) {
    enc.validate();
    cls.validate();
    const std::size_t enc_n = enc.layer_widths.size();
    const std::size_t cls_n = cls.hidden_widths.size() + 1;
    if (params.encoder.size() != enc_n || params.classifier.size() != cls_n)
        throw std::invalid_argument("model params: layer count mismatch");
    int in = enc.kind == EncoderKind::edge_conv ? 6 : 3;
    for (std::size_t l = 0; l < enc_n; ++l) {
        const auto& d = params.encoder[l];
        if (d.W.rows() != enc.layer_widths[l] || d.W.cols() != in || d.b.size() != d.W.rows())
            throw std::invalid_argument("model params: encoder shape mismatch at layer " +
                                        std::to_string(l));
        in = enc.layer_widths[l];
    }
    in = enc.feature_dim();
    for (std::size_t l = 0; l < cls_n; ++l) {
        const int out = l + 1 < cls_n ? cls.hidden_widths[l] : cls.num_classes;
        const auto& d = params.classifier[l];
        if (d.W.rows() != out || d.W.cols() != in || d.b.size() != out)
            throw std::invalid_argument("model params: classifier shape mismatch at layer " +
                                        std::to_string(l));
        in = out;
    }
}

std::vector<std::uint32_t> knn_graph(const std::vector<Vec3>& points, int k) {
    const std::size_t n = points.size();
    if (k < 1) throw std::invalid_argument("knn_graph: k must be >= 1");
    if (static_cast<std::size_t>(k) >= n)
        throw std::invalid_argument("knn_graph: k must be < point count");

    std::vector<std::uint32_t> out(n * static_cast<std::size_t>(k));
    std::vector<std::pair<double, std::uint32_t>> cand;
    cand.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        cand.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            cand.emplace_back((points[j] - points[i]).squared_norm(),
                              static_cast<std::uint32_t>(j));
        }
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
        for (int s = 0; s < k; ++s) out[i * k + s] = cand[s].second;
    }
    return out;
}

namespace {

// All intermediates of one stacked forward pass (B clouds x N points each).
struct StackedCache {
    int B = 0, N = 0;
    // edge_conv first layer only
    std::vector<std::uint32_t> knn;         // B*N*k, local neighbor indices
    Eigen::MatrixXd edge_in;                // (B*N*k) x 6
    Eigen::MatrixXd edge_pre;               // (B*N*k) x w0
    std::vector<std::uint32_t> edge_argmax; // (B*N)*w0, winning neighbor slot
    // shared per-point MLP
    std::vector<Eigen::MatrixXd> enc_pre; // per layer (empty slot for an edge layer)
    std::vector<Eigen::MatrixXd> enc_act;
    Eigen::MatrixXd pooled;                 // B x D
    std::vector<std::uint32_t> pool_argmax; // B*D, winning point index
    // classifier
    std::vector<Eigen::MatrixXd> cls_pre;
    std::vector<Eigen::MatrixXd> cls_act; // hidden activations only
    Eigen::MatrixXd logits;               // B x C
    Eigen::MatrixXd probs;                // B x C
};

Eigen::MatrixXd dense_forward(const Eigen::MatrixXd& in, const Dense& d) {
    Eigen::MatrixXd pre = in * d.W.transpose();
    pre.rowwise() += d.b.transpose();
    return pre;
}

void forward_stacked(const Eigen::MatrixXd& X, int B, int N, const ModelParams& params,
                     const EncoderConfig& enc, const ClassifierConfig& cls, StackedCache& cache) {
    validate_params(params, enc, cls);
    if (X.rows() != static_cast<Eigen::Index>(B) * N || X.cols() != 3)
        throw std::invalid_argument("forward: input shape mismatch");
    cache.B = B;
    cache.N = N;

    const std::size_t L = enc.layer_widths.size();
    cache.enc_pre.assign(L, Eigen::MatrixXd());
    cache.enc_act.assign(L, Eigen::MatrixXd());

    std::size_t dense_start = 0;
    if (enc.kind == EncoderKind::edge_conv) {
        const int k = enc.k;
        if (N < k + 1)
            throw std::invalid_argument("forward: edge_conv needs at least k+1 points per cloud");
        const int w0 = enc.layer_widths[0];
        const std::size_t rows = static_cast<std::size_t>(B) * N;

        cache.knn.resize(rows * k);
        std::vector<Vec3> pts(static_cast<std::size_t>(N));
        for (int b = 0; b < B; ++b) {
            const std::size_t base = static_cast<std::size_t>(b) * N;
            for (int i = 0; i < N; ++i)
                pts[i] = Vec3{X(base + i, 0), X(base + i, 1), X(base + i, 2)};
            const auto nb = knn_graph(pts, k);
            std::copy(nb.begin(), nb.end(), cache.knn.begin() + base * k);
        }

        cache.edge_in.resize(static_cast<Eigen::Index>(rows) * k, 6);
        for (std::size_t p = 0; p < rows; ++p) {
            const std::size_t cloud_base = (p / N) * N;
            for (int s = 0; s < k; ++s) {
                const std::size_t j = cloud_base + cache.knn[p * k + s];
                const Eigen::Index row = static_cast<Eigen::Index>(p) * k + s;
                cache.edge_in(row, 0) = X(p, 0);
                cache.edge_in(row, 1) = X(p, 1);
                cache.edge_in(row, 2) = X(p, 2);
                cache.edge_in(row, 3) = X(j, 0) - X(p, 0);
                cache.edge_in(row, 4) = X(j, 1) - X(p, 1);
                cache.edge_in(row, 5) = X(j, 2) - X(p, 2);
            }
        }
        cache.edge_pre = dense_forward(cache.edge_in, params.encoder[0]);

        // per-point ReLU + max over the k neighbor slots (lowest slot wins ties)
        Eigen::MatrixXd a0(rows, w0);
        cache.edge_argmax.assign(rows * w0, 0);
        for (int d = 0; d < w0; ++d) {
            for (std::size_t p = 0; p < rows; ++p) {
                const std::size_t base = p * k;
                double best = cache.edge_pre(base, d);
                std::uint32_t arg = 0;
                for (int s = 1; s < k; ++s) {
                    const double v = cache.edge_pre(base + s, d);
                    if (v > best) {
                        best = v;
                        arg = static_cast<std::uint32_t>(s);
                    }
                }
                a0(p, d) = best > 0.0 ? best : 0.0;
                cache.edge_argmax[p * w0 + d] = arg;
            }
        }
        cache.enc_act[0] = std::move(a0);
        dense_start = 1;
    }

    const Eigen::MatrixXd* cur = enc.kind == EncoderKind::edge_conv ? &cache.enc_act[0] : &X;
    for (std::size_t l = dense_start; l < L; ++l) {
        cache.enc_pre[l] = dense_forward(*cur, params.encoder[l]);
        cache.enc_act[l] = cache.enc_pre[l].cwiseMax(0.0);
        cur = &cache.enc_act[l];
    }

    // coordinate-wise max over each cloud's points (lowest point index wins ties)
    const Eigen::MatrixXd& F = cache.enc_act[L - 1];
    const int D = enc.feature_dim();
    cache.pooled.resize(B, D);
    cache.pool_argmax.assign(static_cast<std::size_t>(B) * D, 0);
    for (int d = 0; d < D; ++d) {
        for (int b = 0; b < B; ++b) {
            const std::size_t base = static_cast<std::size_t>(b) * N;
            double best = F(base, d);
            std::uint32_t arg = 0;
            for (int i = 1; i < N; ++i) {
                const double v = F(base + i, d);
                if (v > best) {
                    best = v;
                    arg = static_cast<std::uint32_t>(i);
                }
            }
            cache.pooled(b, d) = best;
            cache.pool_argmax[static_cast<std::size_t>(b) * D + d] = arg;
        }
    }

    const std::size_t H = cls.hidden_widths.size();
    cache.cls_pre.assign(H + 1, Eigen::MatrixXd());
    cache.cls_act.assign(H, Eigen::MatrixXd());
    const Eigen::MatrixXd* h = &cache.pooled;
    for (std::size_t l = 0; l < H; ++l) {
        cache.cls_pre[l] = dense_forward(*h, params.classifier[l]);
        cache.cls_act[l] = cache.cls_pre[l].cwiseMax(0.0);
        h = &cache.cls_act[l];
    }
    cache.cls_pre[H] = dense_forward(*h, params.classifier[H]);
    cache.logits = cache.cls_pre[H];

    cache.probs.resizeLike(cache.logits);
    for (Eigen::Index r = 0; r < cache.logits.rows(); ++r) {
        const double m = cache.logits.row(r).maxCoeff();
        Eigen::ArrayXd e = (cache.logits.row(r).array() - m).exp();
        cache.probs.row(r) = (e / e.sum()).matrix();
    }
}

void backward_stacked(const StackedCache& cache, const Eigen::MatrixXd& dlogits,
                      const Eigen::MatrixXd& X, ModelParams& params, const EncoderConfig& enc,
                      const ClassifierConfig& cls) {
    params.zero_grads();
    const int B = cache.B;
    const int N = cache.N;
    const int D = enc.feature_dim();
    const std::size_t H = cls.hidden_widths.size();

    // classifier
    Eigen::MatrixXd d = dlogits;
    Eigen::MatrixXd dpooled;
    for (std::size_t l = H + 1; l-- > 0;) {
        const Eigen::MatrixXd& in = l == 0 ? cache.pooled : cache.cls_act[l - 1];
        params.classifier[l].gW += d.transpose() * in;
        params.classifier[l].gb += d.colwise().sum().transpose();
        Eigen::MatrixXd din = d * params.classifier[l].W;
        if (l == 0) {
            dpooled = std::move(din);
        } else {
            d = din.array() * (cache.cls_pre[l - 1].array() > 0.0).cast<double>();
        }
    }

    // un-pool: route each pooled coordinate's gradient to its argmax point
    Eigen::MatrixXd dcur =
        Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(B) * N, D);
    for (int b = 0; b < B; ++b)
        for (int dd = 0; dd < D; ++dd)
            dcur(static_cast<std::size_t>(b) * N +
                     cache.pool_argmax[static_cast<std::size_t>(b) * D + dd],
                 dd) += dpooled(b, dd);

    // shared MLP layers (down to the edge layer for edge_conv)
    const std::size_t L = enc.layer_widths.size();
    const std::size_t dense_start = enc.kind == EncoderKind::edge_conv ? 1 : 0;
    for (std::size_t l = L; l-- > dense_start;) {
        const Eigen::MatrixXd dz =
            dcur.array() * (cache.enc_pre[l].array() > 0.0).cast<double>();
        const Eigen::MatrixXd& in =
            l == 0 ? X : cache.enc_act[l - 1];
        params.encoder[l].gW += dz.transpose() * in;
        params.encoder[l].gb += dz.colwise().sum().transpose();
        if (l > dense_start || enc.kind == EncoderKind::edge_conv)
            dcur = dz * params.encoder[l].W;
        // l == 0 for point_mlp: X carries no gradient
    }

    if (enc.kind == EncoderKind::edge_conv) {
        // dcur is now the gradient w.r.t. the pooled edge output (B*N x w0)
        const int k = enc.k;
        const int w0 = enc.layer_widths[0];
        const std::size_t rows = static_cast<std::size_t>(B) * N;
        Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows) * k, w0);
        for (std::size_t p = 0; p < rows; ++p) {
            for (int dd = 0; dd < w0; ++dd) {
                const std::size_t row = p * k + cache.edge_argmax[p * w0 + dd];
                if (cache.edge_pre(row, dd) > 0.0) dz(row, dd) += dcur(p, dd);
            }
        }
        params.encoder[0].gW += dz.transpose() * cache.edge_in;
        params.encoder[0].gb += dz.colwise().sum().transpose();
    }
}

Eigen::VectorXd onehot(int label, Eigen::Index C) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(C);
    y(label) = 1.0;
    return y;
}

constexpr double kProbFloor = 1e-12;

} // namespace

Prediction forward(const std::vector<Vec3>& points, const ModelParams& params,
                   const EncoderConfig& enc, const ClassifierConfig& cls) {
    if (points.empty()) throw std::invalid_argument("forward: empty cloud");
    Eigen::MatrixXd X(points.size(), 3);
    for (std::size_t i = 0; i < points.size(); ++i) {
        X(i, 0) = points[i].x;
        X(i, 1) = points[i].y;
        X(i, 2) = points[i].z;
    }
    StackedCache cache;
    forward_stacked(X, 1, static_cast<int>(points.size()), params, enc, cls, cache);
    Prediction pred;
    pred.logits = cache.logits.row(0).transpose();
    pred.probs = cache.probs.row(0).transpose();
    pred.global_feature = cache.pooled.row(0).transpose();
    return pred;
}

double cross_entropy(const Eigen::VectorXd& probs, const Eigen::VectorXd& onehot,
                     double class_weight) {
    if (probs.size() != onehot.size())
        throw std::invalid_argument("cross_entropy: size mismatch");
    double loss = 0.0;
    for (Eigen::Index c = 0; c < probs.size(); ++c)
        if (onehot(c) != 0.0) loss -= onehot(c) * std::log(std::max(probs(c), kProbFloor));
    return class_weight * loss;
}

double entropy(const Eigen::VectorXd& probs) {
    double h = 0.0;
    for (Eigen::Index c = 0; c < probs.size(); ++c)
        if (probs(c) > 0.0) h -= probs(c) * std::log(probs(c));
    return h;
}

double total_loss(const std::vector<Prediction>& source, const std::vector<int>& labels,
                  const Eigen::VectorXd& class_weights, const std::vector<Prediction>& target,
                  double lambda) {
    if (source.empty()) throw std::invalid_argument("total_loss: empty source batch");
    if (labels.size() != source.size())
        throw std::invalid_argument("total_loss: label count mismatch");
    double ce = 0.0;
    for (std::size_t i = 0; i < source.size(); ++i) {
        const int y = labels[i];
        if (y < 0 || y >= class_weights.size())
            throw std::invalid_argument("total_loss: label out of range");
        ce += cross_entropy(source[i].probs, onehot(y, source[i].probs.size()),
                            class_weights(y));
    }
    double loss = ce / static_cast<double>(source.size());
    if (!target.empty() && lambda != 0.0) {
        double ent = 0.0;
        for (const auto& p : target) ent += entropy(p.probs);
        loss += lambda * ent / static_cast<double>(target.size());
    }
    return loss;
}

double forward_backward(const Batch& batch, const Eigen::VectorXd& class_weights, double lambda,
                        ModelParams& params, const EncoderConfig& enc,
                        const ClassifierConfig& cls) {
    const int N = batch.points_per_cloud;
    if (N < 1) throw std::invalid_argument("forward_backward: points_per_cloud must be >= 1");
    if (batch.source.rows() == 0 || batch.source.rows() % N != 0)
        throw std::invalid_argument("forward_backward: bad source row count");
    const int Bs = static_cast<int>(batch.source.rows() / N);
    if (static_cast<int>(batch.labels.size()) != Bs)
        throw std::invalid_argument("forward_backward: label count mismatch");
    const bool use_target = batch.target.rows() > 0 && lambda != 0.0;
    if (batch.target.rows() % N != 0)
        throw std::invalid_argument("forward_backward: bad target row count");
    const int Bt = use_target ? static_cast<int>(batch.target.rows() / N) : 0;
    const int B = Bs + Bt;

    Eigen::MatrixXd X(static_cast<Eigen::Index>(B) * N, 3);
    X.topRows(batch.source.rows()) = batch.source;
    if (use_target) X.bottomRows(static_cast<Eigen::Index>(Bt) * N) = batch.target;

    StackedCache cache;
    forward_stacked(X, B, N, params, enc, cls, cache);

    const Eigen::Index C = cache.probs.cols();
    Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(B, C);
    double ce = 0.0;
    for (int i = 0; i < Bs; ++i) {
        const int y = batch.labels[i];
        if (y < 0 || y >= C) throw std::invalid_argument("forward_backward: label out of range");
        const double w = class_weights(y);
        const double q = cache.probs(i, y);
        ce += w * -std::log(std::max(q, kProbFloor));
        if (q > kProbFloor) {
            dlogits.row(i) = (w / Bs) * cache.probs.row(i);
            dlogits(i, y) -= w / Bs;
        }
    }
    double loss = ce / Bs;
    if (use_target) {
        double ent_sum = 0.0;
        for (int i = Bs; i < B; ++i) {
            const double h = entropy(cache.probs.row(i).transpose());
            ent_sum += h;
            for (Eigen::Index c = 0; c < C; ++c) {
                const double s = cache.probs(i, c);
                if (s > 0.0) dlogits(i, c) = (lambda / Bt) * (-s * (std::log(s) + h));
            }
        }
        loss += lambda * ent_sum / Bt;
    }

    backward_stacked(cache, dlogits, X, params, enc, cls);
    return loss;
}

int predicted_class(const Eigen::VectorXd& probs) {
    int best = 0;
    for (Eigen::Index c = 1; c < probs.size(); ++c)
        if (probs(c) > probs(best)) best = static_cast<int>(c);
    return best;
}

Prediction predict(const PointCloud& cloud, const ModelParams& params, const EncoderConfig& enc,
                   const ClassifierConfig& cls, std::size_t target_points,
                   std::uint64_t resample_seed) {
    if (cloud.points.empty()) throw std::invalid_argument("predict: empty cloud");
    PointCloud prepared = normalize(cloud);
    Rng rng(derive_seed(resample_seed, {stream_tag("predict")}));
    prepared = resample(prepared, target_points, rng);
    return forward(prepared.points, params, enc, cls);
}

namespace {

Eigen::MatrixXd cloud_matrix(const std::vector<Vec3>& pts) {
    Eigen::MatrixXd m(pts.size(), 3);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        m(i, 0) = pts[i].x;
        m(i, 1) = pts[i].y;
        m(i, 2) = pts[i].z;
    }
    return m;
}

// normalize + resample with a dedicated substream (no rotation/noise)
Eigen::MatrixXd prepare_plain(const PointCloud& cloud, std::size_t n, std::uint64_t seed,
                              std::uint64_t tag, std::uint64_t* resample_draws) {
    PointCloud prepared = normalize(cloud);
    Rng rng(derive_seed(seed, {tag, cloud.object_id, cloud.view_id}));
    prepared = resample(prepared, n, rng);
    if (resample_draws) *resample_draws += rng.draw_count();
    return cloud_matrix(prepared.points);
}

} // namespace

TrainResult train(const std::vector<PointCloud>& source_data,
                  const std::vector<PointCloud>& target_unlabeled,
                  const std::vector<PointCloud>& val_labeled,
                  const Eigen::VectorXd& class_weights, const TrainConfig& cfg,
                  const EncoderConfig& enc, const ClassifierConfig& cls) {
    cfg.validate();
    enc.validate();
    cls.validate();
    if (source_data.empty()) throw std::invalid_argument("train: source data empty");
    if (class_weights.size() != cls.num_classes)
        throw std::invalid_argument("train: class weight count mismatch");
    for (const auto& c : source_data)
        if (!c.label || *c.label >= static_cast<std::uint32_t>(cls.num_classes))
            throw std::invalid_argument("train: source cloud without valid label");
    for (const auto& c : val_labeled)
        if (!c.label || *c.label >= static_cast<std::uint32_t>(cls.num_classes))
            throw std::invalid_argument("train: val cloud without valid label");

    const std::size_t N = cfg.augment.target_points;
    const bool use_target =
        cfg.use_entropy && cfg.lambda_entropy != 0.0 && !target_unlabeled.empty();
    const double lambda = use_target ? cfg.lambda_entropy : 0.0;

    TrainResult result;
    result.params = init_params(enc, cls, cfg.seed);
    AdamState state = AdamState::zeros_like(result.params);

    // epoch-independent preparations
    std::vector<Eigen::MatrixXd> source_prep;
    if (!cfg.use_augment) {
        source_prep.reserve(source_data.size());
        for (const auto& c : source_data)
            source_prep.push_back(prepare_plain(c, N, cfg.seed, stream_tag("prep"),
                                                &result.draw_counts.resample));
    }
    std::vector<Eigen::MatrixXd> target_prep;
    std::vector<std::size_t> target_order;
    if (use_target) {
        target_prep.reserve(target_unlabeled.size());
        for (const auto& c : target_unlabeled)
            target_prep.push_back(prepare_plain(c, N, cfg.seed, stream_tag("target"), nullptr));
        target_order.resize(target_unlabeled.size());
        std::iota(target_order.begin(), target_order.end(), std::size_t{0});
        Rng torder(derive_seed(cfg.seed, {stream_tag("target_order")}));
        for (std::size_t i = 0; i + 1 < target_order.size(); ++i)
            std::swap(target_order[i],
                      target_order[i + torder.uniform_index(target_order.size() - i)]);
    }
    std::vector<Eigen::MatrixXd> val_prep;
    val_prep.reserve(val_labeled.size());
    for (const auto& c : val_labeled)
        val_prep.push_back(prepare_plain(c, N, cfg.seed, stream_tag("val"), nullptr));

    std::vector<std::size_t> order(source_data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t target_cursor = 0;
    int step = 0;
    double best_acc = -1.0;
    ModelParams best_params = result.params;
    int best_epoch = 0;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng shuffle_rng(
            derive_seed(cfg.seed, {stream_tag("shuffle"), static_cast<std::uint64_t>(epoch)}));
        for (std::size_t i = 0; i + 1 < order.size(); ++i)
            std::swap(order[i], order[i + shuffle_rng.uniform_index(order.size() - i)]);

        double loss_sum = 0.0;
        int batch_count = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t bs =
                std::min<std::size_t>(cfg.batch_size, order.size() - start);
            Batch batch;
            batch.points_per_cloud = static_cast<int>(N);
            batch.source.resize(static_cast<Eigen::Index>(bs) * N, 3);
            batch.labels.resize(bs);
            for (std::size_t j = 0; j < bs; ++j) {
                const PointCloud& c = source_data[order[start + j]];
                batch.labels[j] = static_cast<int>(*c.label);
                if (cfg.use_augment) {
                    Rng ar(derive_seed(cfg.seed,
                                       {stream_tag("augment"), c.object_id, c.view_id,
                                        static_cast<std::uint64_t>(epoch)}));
                    const PointCloud aug =
                        augment_pipeline(c, cfg.augment, ar, &result.draw_counts);
                    batch.source.middleRows(static_cast<Eigen::Index>(j) * N, N) =
                        cloud_matrix(aug.points);
                } else {
                    batch.source.middleRows(static_cast<Eigen::Index>(j) * N, N) =
                        source_prep[order[start + j]];
                }
            }
            if (use_target) {
                batch.target.resize(static_cast<Eigen::Index>(bs) * N, 3);
                for (std::size_t j = 0; j < bs; ++j) {
                    const std::size_t idx = target_order[target_cursor % target_order.size()];
                    ++target_cursor;
                    batch.target.middleRows(static_cast<Eigen::Index>(j) * N, N) =
                        target_prep[idx];
                }
            }

            const double loss =
                forward_backward(batch, class_weights, lambda, result.params, enc, cls);
            if (!std::isfinite(loss))
                throw std::runtime_error("train: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", batch " +
                                         std::to_string(batch_count));
            ++step;
            adam_step(result.params, state, step, cfg);
            loss_sum += loss;
            ++batch_count;
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = loss_sum / batch_count;
        if (!val_labeled.empty()) {
            int correct = 0;
            for (std::size_t i = 0; i < val_labeled.size(); ++i) {
                std::vector<Vec3> pts(val_prep[i].rows());
                for (Eigen::Index r = 0; r < val_prep[i].rows(); ++r)
                    pts[r] = Vec3{val_prep[i](r, 0), val_prep[i](r, 1), val_prep[i](r, 2)};
                const Prediction p = forward(pts, result.params, enc, cls);
                if (predicted_class(p.probs) == static_cast<int>(*val_labeled[i].label))
                    ++correct;
            }
            const double acc =
                static_cast<double>(correct) / static_cast<double>(val_labeled.size());
            stats.val_acc = acc;
            if (acc > best_acc) {
                best_acc = acc;
                best_epoch = epoch;
                best_params = result.params;
            }
        }
        result.history.push_back(stats);
    }

    if (!val_labeled.empty() && cfg.epochs > 0) {
        result.params = best_params;
        result.best_epoch = best_epoch;
    } else {
        result.best_epoch = cfg.epochs;
    }
    return result;
}

} // namespace ps2r
