#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bst/features.hpp"
#include "bst/graph.hpp"
#include "bst/transformer.hpp"

namespace bst {

enum class ModelKind { kBst, kWdl, kWdlSeq, kDinLite };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct ModelConfig {
  FeatureSchema schema;
  BlockConfig block;
  std::array<int, 3> mlp_hidden{128, 64, 32};
  ModelKind kind = ModelKind::kBst;
  std::uint64_t seed = 1;
};

void validate_model_config(const ModelConfig& config);

// Width of the vector entering the MLP head for this model kind.
int mlp_input_width(const ModelConfig& config);

// Every parameter the model owns, name -> (rows, cols).
std::map<std::string, std::pair<int, int>> expected_param_shapes(const ModelConfig& config);

// Seeded init: uniform ±sqrt(6/(fan_in+fan_out)) for matrices and embedding
// tables, zeros for biases, gain 1 / bias 0 for layer norms.
NamedTensors init_params(const ModelConfig& config);

// Throws if params is missing a tensor, has an extra one, or any shape is off;
// the message names the offending tensor.
void check_param_shapes(const NamedTensors& params, const ModelConfig& config);

// Three LeakyReLU hidden layers, affine to one logit, sigmoid. 1x1 output.
Var mlp_head(Tape& tape, const NamedTensors& params, Var z, const ModelConfig& config);

// Sequence side of the BST forward pass given precomputed slot indices;
// exposed so masking behavior can be probed with hand-built slots.
Var bst_head(Tape& tape, const NamedTensors& params, const SeqSlots& slots, Var other,
             const ModelConfig& config, Mode mode, Rng& rng);

// Full forward of the configured kind; returns the 1x1 click probability.
Var model_forward(Tape& tape, const NamedTensors& params, const Example& example,
                  const ModelConfig& config, Mode mode, Rng& rng, OovTally* tally = nullptr);

// Eval-mode probability (pure, deterministic).
double predict(const NamedTensors& params, const Example& example, const ModelConfig& config);
std::vector<double> predict_batch(const NamedTensors& params, const std::vector<Example>& examples,
                                  const ModelConfig& config);

}  // namespace bst
