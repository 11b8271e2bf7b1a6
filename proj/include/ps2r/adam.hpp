#pragma once

#include "ps2r/nn.hpp"

namespace ps2r {

// First/second moment accumulators, one pair per tensor, zero-initialized
// to the params' shapes.
struct AdamState {
    std::vector<Dense> moments1; // m for W in .W, m for b in .b
    std::vector<Dense> moments2; // v likewise

    static AdamState zeros_like(const ModelParams& params);
};

// Standard Adam with bias correction at step t (1-based). Weight decay is
// an L2 term added to the gradient (g <- g + weight_decay * theta) before
// the moment updates. Throws std::runtime_error naming the tensor when a
// gradient is non-finite.
void adam_step(ModelParams& params, AdamState& state, int t, const TrainConfig& cfg);

} // namespace ps2r
