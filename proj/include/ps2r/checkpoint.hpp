#pragma once

#include <string>

#include "ps2r/nn.hpp"

namespace ps2r {

// Checkpoint file: magic "PS2W", u32 LE version = 1, u32 LE tensor count,
// then per tensor: u16 LE name length + UTF-8 name, u8 rank, rank x u32 LE
// dims, dims-product x f64 LE values (matrices row-major). A trailing
// "meta.config" tensor carries [encoder kind, k, target_points].
void save_checkpoint(const std::string& path, const ModelParams& params,
                     const EncoderConfig& enc, const ClassifierConfig& cls,
                     std::size_t target_points);

struct LoadedCheckpoint {
    ModelParams params;
    EncoderConfig enc;
    ClassifierConfig cls;
    std::size_t target_points = 0;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

} // namespace ps2r
