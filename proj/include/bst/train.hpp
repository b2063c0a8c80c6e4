#pragma once

#include <cstdint>
#include <vector>

#include "bst/model.hpp"

namespace bst {

struct TrainConfig {
  int epochs = 1;
  int batch_size = 32;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool shuffle = true;
  std::uint64_t seed = 1;
};

void validate_train_config(const TrainConfig& config);

struct AdamState {
  NamedTensors m;
  NamedTensors v;
  long long t = 0;
};

// Bias-corrected adaptive-moment update, one shared step counter. Rejects
// non-finite gradients, naming the parameter.
void adam_step(NamedTensors& params, const Gradient& grads, AdamState& state,
               const TrainConfig& config);

struct TrainResult {
  NamedTensors params;
  std::vector<double> epoch_loss;  // mean per-example BCE, one entry per epoch
};

// Seeded shuffling, per-batch mean-BCE gradient, Adam. Deterministic given
// (configs, data): dropout and shuffle streams derive from the train seed.
TrainResult train_model(const std::vector<Example>& data, const ModelConfig& model_config,
                        const TrainConfig& train_config);

}  // namespace bst
