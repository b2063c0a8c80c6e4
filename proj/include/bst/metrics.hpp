#pragma once

#include <string>
#include <vector>

#include "bst/model.hpp"

namespace bst {

// Probability that a uniformly random positive outranks a random negative,
// ties half-credited (rank-sum / Mann-Whitney form). Needs both classes.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Mean binary cross-entropy with probabilities clamped to [1e-12, 1-1e-12].
double logloss(const std::vector<double>& probs, const std::vector<int>& labels);

struct EvalReport {
  double auc = 0.0;
  double logloss = 0.0;
  double rt_mean_ms = 0.0;  // populated only when a benchmark ran
  double rt_p95_ms = 0.0;
  int n_examples = 0;
};

struct RtStats {
  double mean_ms = 0.0;
  double p95_ms = 0.0;
  double p05_ms = 0.0;
  double min_ms = 0.0;
  int n_timed = 0;
};

// Times single-example eval-mode forwards (one warm-up pass first), single
// threaded, repetitions x examples individually clocked samples.
RtStats bench_rt(const NamedTensors& params, const ModelConfig& config,
                 const std::vector<Example>& examples, int repetitions);

// Scores every example in eval mode; adds RT stats when bench_repetitions > 0.
EvalReport evaluate(const NamedTensors& params, const ModelConfig& config,
                    const std::vector<Example>& examples, int bench_repetitions = 0);

std::string eval_csv_header();
std::string eval_csv_row(const std::string& model, const EvalReport& report);

}  // namespace bst
