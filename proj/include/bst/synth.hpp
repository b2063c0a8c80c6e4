#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bst/features.hpp"

namespace bst {

// Planted-signal generator: a global category-transition backbone G, per-user
// chains drawn around it (Dirichlet with concentration alpha), and click
// labels driven by a recency-weighted match between the history and the
// target category. alpha -> 0 degenerates to deterministic per-user chains;
// large alpha makes all users share G, which is what a model trained on one
// user population can transfer to unseen users.
struct GenConfig {
  int n_users = 5000;
  int n_items = 400;      // real items, ids 1..n_items (0 stays reserved)
  int n_categories = 8;   // real categories, ids 1..n_categories
  int seq_len_min = 4;
  int seq_len_max = 10;
  int dt_min = 40;  // seconds between consecutive history events
  int dt_max = 160;
  double alpha = 60.0;             // per-user chain concentration around G
  double backbone_sharpness = 0.25;  // symmetric Dirichlet for G rows
  double lambda_recency = 125.0;     // seconds; weight of event i ~ exp(-delta_i/lambda)
  double signal_gain = 6.0;          // beta: coefficient on the pattern match
  double popularity_gain = 0.8;      // gamma: coefficient on target-category popularity
  double in_pattern_prob = 0.5;      // target drawn from the chain vs uniformly
  double target_positive_rate = 0.5;
  double label_noise = 0.1;  // eta: label flip probability, in [0, 0.5)
  int train_size = 50000;
  int test_size = 10000;
  double test_user_fraction = 0.2;
  std::vector<std::pair<std::string, int>> profile_fields = {{"gender", 2}, {"age", 7}};
  std::uint64_t seed = 1;
};

void validate_gen_config(const GenConfig& gen);

struct Dataset {
  std::vector<Example> train;
  std::vector<Example> test;
  // pre-noise click probabilities, index-aligned with train/test; ranking by
  // them is the Bayes-optimal rule (they read the generator's latent state)
  std::vector<double> train_true_prob;
  std::vector<double> test_true_prob;
  // mean post-noise positive probability over all emitted examples
  double expected_positive_rate = 0.0;
};

Dataset generate_dataset(const GenConfig& gen);

// Schema sized for the generator's id spaces: item 8 ⊕ category 4 ⊕ position 4
// (d_model 16), 12 log2 position buckets, n = seq_len_max, profile fields at
// width 2 plus one age*item_id hash cross.
FeatureSchema default_schema_for(const GenConfig& gen);

}  // namespace bst
