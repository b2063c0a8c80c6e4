#pragma once

#include <string>

#include "bst/config.hpp"
#include "bst/model.hpp"

namespace bst {

// Versioned model snapshot: the full model config plus every named parameter
// tensor, serialized as JSON with exact double round-tripping. Loading a file
// written by save_checkpoint reproduces bitwise-identical predictions.
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig config;
  NamedTensors params;
};

void save_checkpoint(const std::string& path, const ModelConfig& config,
                     const NamedTensors& params);

// Throws std::runtime_error on unreadable/truncated files, version mismatch,
// or parameter tensors whose shapes disagree with the stored config.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace bst
