#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ps2r/augment.hpp"
#include "ps2r/pointcloud.hpp"
#include "ps2r/rng.hpp"

namespace ps2r {

enum class EncoderKind : std::uint8_t { point_mlp = 0, edge_conv = 1 };

struct EncoderConfig {
    EncoderKind kind = EncoderKind::point_mlp;
    std::vector<int> layer_widths{64, 128, 256};
    int k = 20; // edge_conv neighborhood size

    int feature_dim() const { return layer_widths.back(); }
    void validate() const;
};

struct ClassifierConfig {
    std::vector<int> hidden_widths{128, 64};
    int num_classes = 0;

    void validate() const;
};

struct TrainConfig {
    int batch_size = 32;
    int epochs = 80;
    double learning_rate = 0.001;
    double weight_decay = 5e-5;
    double lambda_entropy = 0.1;
    std::uint64_t seed = 0;
    bool use_entropy = false;
    bool use_augment = false; // rotation + noise on source batches
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    AugmentConfig augment; // carries target_points and the noise/rotation knobs

    void validate() const;
};

// One fully-connected layer: value and gradient for weight (out x in) and bias.
struct Dense {
    Eigen::MatrixXd W;
    Eigen::VectorXd b;
    Eigen::MatrixXd gW;
    Eigen::VectorXd gb;

    Dense() = default;
    Dense(int out, int in)
        : W(Eigen::MatrixXd::Zero(out, in)), b(Eigen::VectorXd::Zero(out)),
          gW(Eigen::MatrixXd::Zero(out, in)), gb(Eigen::VectorXd::Zero(out)) {}
};

struct ModelParams {
    std::vector<Dense> encoder;
    std::vector<Dense> classifier;

    void zero_grads();
    // Name of the i-th tensor in serialization order, e.g. "enc.0.weight".
    static std::string tensor_name(bool is_encoder, std::size_t layer, bool is_weight);
};

// Glorot-uniform weights U[-sqrt(6/(fan_in+fan_out)), +...], zero biases,
// drawn from the run seed's "init" substream in layer order (encoder first),
// weight entries row-major.
ModelParams init_params(const EncoderConfig& enc, const ClassifierConfig& cls,
                        std::uint64_t seed);

// Throws std::invalid_argument when params shapes do not match the configs.
void validate_params(const ModelParams& params, const EncoderConfig& enc,
                     const ClassifierConfig& cls);

struct Prediction {
    Eigen::VectorXd logits;
    Eigen::VectorXd probs;
    Eigen::VectorXd global_feature;
};

// Row-major N x k nearest-neighbor indices by Euclidean distance, self
// excluded, ties broken toward the lower index. Throws when k >= N or k < 1.
std::vector<std::uint32_t> knn_graph(const std::vector<Vec3>& points, int k);

// Encoder + max-pool + classifier + softmax on a single cloud.
Prediction forward(const std::vector<Vec3>& points, const ModelParams& params,
                   const EncoderConfig& enc, const ClassifierConfig& cls);

// w_y * (-y^T log q) with the log argument clamped at 1e-12.
double cross_entropy(const Eigen::VectorXd& probs, const Eigen::VectorXd& onehot,
                     double class_weight);

// -s^T log s with 0 log 0 := 0.
double entropy(const Eigen::VectorXd& probs);

// Mean weighted cross-entropy over the source batch plus
// lambda * mean entropy over the target batch (term omitted when the target
// batch is empty or lambda = 0). Throws on an empty source batch.
double total_loss(const std::vector<Prediction>& source, const std::vector<int>& labels,
                  const Eigen::VectorXd& class_weights, const std::vector<Prediction>& target,
                  double lambda);

// One training batch, clouds stacked row-wise (points_per_cloud rows each).
struct Batch {
    Eigen::MatrixXd source; // (B_s * N) x 3
    std::vector<int> labels;
    Eigen::MatrixXd target; // (B_t * N) x 3, zero rows when entropy inactive
    int points_per_cloud = 0;
};

// Computes total_loss on the batch and accumulates analytic reverse-mode
// gradients into the params' gradient slots (after zeroing them).
// Max-pool routes gradient to the argmax point (lowest index on ties);
// ReLU' (0) = 0.
double forward_backward(const Batch& batch, const Eigen::VectorXd& class_weights, double lambda,
                        ModelParams& params, const EncoderConfig& enc,
                        const ClassifierConfig& cls);

// normalize + resample (no rotation/noise), then forward. The resample
// stream is derived from resample_seed, so repeated calls are identical.
Prediction predict(const PointCloud& cloud, const ModelParams& params, const EncoderConfig& enc,
                   const ClassifierConfig& cls, std::size_t target_points,
                   std::uint64_t resample_seed);

// Argmax with ties toward the lower class index.
int predicted_class(const Eigen::VectorXd& probs);

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    std::optional<double> val_acc;
};

struct TrainResult {
    ModelParams params;
    std::vector<EpochStats> history;
    AugmentDrawCounts draw_counts; // aggregated over all source batch prep
    int best_epoch = 0;            // 0 = initialization (epochs = 0 or empty val)
};

// Semi-supervised loop: per epoch shuffle source, batch it, pair each batch
// with an equal-size unlabeled target batch (cycling, only when the entropy
// term is active), apply augment_pipeline per cfg.use_augment, then
// forward/backward + Adam. Returns the params of the epoch with the best
// validation accuracy (ties -> earlier; empty val -> last epoch).
TrainResult train(const std::vector<PointCloud>& source_data,
                  const std::vector<PointCloud>& target_unlabeled,
                  const std::vector<PointCloud>& val_labeled,
                  const Eigen::VectorXd& class_weights, const TrainConfig& cfg,
                  const EncoderConfig& enc, const ClassifierConfig& cls);

} // namespace ps2r
