#include "ps2r/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace ps2r {

AdamState AdamState::zeros_like(const ModelParams& params) {
    AdamState s;
    auto add = [&s](const std::vector<Dense>& layers) {
        for (const auto& d : layers) {
            s.moments1.emplace_back(static_cast<int>(d.W.rows()), static_cast<int>(d.W.cols()));
            s.moments2.emplace_back(static_cast<int>(d.W.rows()), static_cast<int>(d.W.cols()));
        }
    };
    add(params.encoder);
    add(params.classifier);
    return s;
}

namespace {

template <typename T>
void update_tensor(T& theta, const T& grad, T& m, T& v, double bc1, double bc2,
                   const TrainConfig& cfg, const std::string& name) {
    if (!grad.allFinite())
        throw std::runtime_error("adam_step: non-finite gradient in " + name);
    const auto g = (grad.array() + cfg.weight_decay * theta.array()).eval();
    m.array() = cfg.beta1 * m.array() + (1.0 - cfg.beta1) * g;
    v.array() = cfg.beta2 * v.array() + (1.0 - cfg.beta2) * g.square();
    const auto mhat = (m.array() / bc1).eval();
    const auto vhat = (v.array() / bc2).eval();
    theta.array() -= cfg.learning_rate * mhat / (vhat.sqrt() + cfg.adam_eps);
    if (!theta.allFinite())
        throw std::runtime_error("adam_step: non-finite parameter in " + name);
}

} // namespace

void adam_step(ModelParams& params, AdamState& state, int t, const TrainConfig& cfg) {
    if (t < 1) throw std::invalid_argument("adam_step: step index must be >= 1");
    const std::size_t n_tensors = params.encoder.size() + params.classifier.size();
    if (state.moments1.size() != n_tensors || state.moments2.size() != n_tensors)
        throw std::invalid_argument("adam_step: state shape mismatch");

    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);

    std::size_t slot = 0;
    auto step_layers = [&](std::vector<Dense>& layers, bool is_encoder) {
        for (std::size_t l = 0; l < layers.size(); ++l, ++slot) {
            Dense& d = layers[l];
            Dense& m = state.moments1[slot];
            Dense& v = state.moments2[slot];
            update_tensor(d.W, d.gW, m.W, v.W, bc1, bc2, cfg,
                          ModelParams::tensor_name(is_encoder, l, true));
            update_tensor(d.b, d.gb, m.b, v.b, bc1, bc2, cfg,
                          ModelParams::tensor_name(is_encoder, l, false));
        }
    };
    step_layers(params.encoder, true);
    step_layers(params.classifier, false);
}

} // namespace ps2r
