#pragma once

#include <filesystem>
#include <string>

#include "nightatlas/neuralnet/network.hpp"

namespace nightatlas::neuralnet {

// Checkpoint, little-endian: magic "NANN", version u32, layer count u32,
// then per layer {kind u32, weight rank u32 + dims, f32 weights, bias length
// u32, f32 biases}. The NetConfig is serialized as JSON alongside at
// path + ".json"; loading reads both and restores parameters bit-exactly.
void save_checkpoint(const std::filesystem::path& path, const Network& net);
Network load_checkpoint(const std::filesystem::path& path);

std::string net_config_to_json(const NetConfig& cfg);
NetConfig net_config_from_json(const std::string& text);

}  // namespace nightatlas::neuralnet
