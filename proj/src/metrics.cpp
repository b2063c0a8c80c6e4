#include "bst/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace bst {

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("auc: " + std::to_string(scores.size()) + " scores vs " +
                                std::to_string(labels.size()) + " labels");
  long long pos = 0, neg = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("auc: labels must be 0 or 1");
    (y == 1 ? pos : neg)++;
  }
  if (pos == 0 || neg == 0)
    throw std::invalid_argument("auc: need at least one positive and one negative");

  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return scores[a] < scores[b]; });

  // rank-sum with average ranks across tie groups; sums stay exactly
  // representable (integers and halves well below 2^53)
  double pos_rank_sum = 0.0;
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (size_t k = i; k <= j; ++k)
      if (labels[order[k]] == 1) pos_rank_sum += avg_rank;
    i = j + 1;
  }
  double u = pos_rank_sum - 0.5 * static_cast<double>(pos) * (static_cast<double>(pos) + 1.0);
  return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

double logloss(const std::vector<double>& probs, const std::vector<int>& labels) {
  if (probs.size() != labels.size() || probs.empty())
    throw std::invalid_argument("logloss: need equally many probs and labels, at least one");
  double acc = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1)
      throw std::invalid_argument("logloss: labels must be 0 or 1");
    double p = std::clamp(probs[i], 1e-12, 1.0 - 1e-12);
    acc += labels[i] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return -acc / static_cast<double>(probs.size());
}

RtStats bench_rt(const NamedTensors& params, const ModelConfig& config,
                 const std::vector<Example>& examples, int repetitions) {
  if (examples.empty() || repetitions < 1)
    throw std::invalid_argument("bench_rt: need examples and repetitions >= 1");
  using clock = std::chrono::steady_clock;
  double sink = 0.0;
  for (const Example& e : examples) sink += predict(params, e, config);  // warm-up

  std::vector<double> ms;
  ms.reserve(examples.size() * static_cast<size_t>(repetitions));
  for (int r = 0; r < repetitions; ++r)
    for (const Example& e : examples) {
      auto t0 = clock::now();
      sink += predict(params, e, config);
      auto t1 = clock::now();
      ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
  if (!std::isfinite(sink)) throw std::runtime_error("bench_rt: non-finite prediction");

  std::sort(ms.begin(), ms.end());
  RtStats stats;
  stats.n_timed = static_cast<int>(ms.size());
  stats.mean_ms = std::accumulate(ms.begin(), ms.end(), 0.0) / ms.size();
  auto quantile = [&](double q) {
    size_t idx = static_cast<size_t>(std::ceil(q * ms.size())) - 1;
    return ms[std::min(idx, ms.size() - 1)];
  };
  stats.p95_ms = quantile(0.95);
  stats.p05_ms = quantile(0.05);
  stats.min_ms = ms.front();
  return stats;
}

EvalReport evaluate(const NamedTensors& params, const ModelConfig& config,
                    const std::vector<Example>& examples, int bench_repetitions) {
  if (examples.empty()) throw std::invalid_argument("evaluate: empty example list");
  std::vector<double> probs = predict_batch(params, examples, config);
  std::vector<int> labels;
  labels.reserve(examples.size());
  for (const Example& e : examples) labels.push_back(e.label);

  EvalReport report;
  report.n_examples = static_cast<int>(examples.size());
  report.auc = auc(probs, labels);
  report.logloss = logloss(probs, labels);
  if (bench_repetitions > 0) {
    RtStats rt = bench_rt(params, config, examples, bench_repetitions);
    report.rt_mean_ms = rt.mean_ms;
    report.rt_p95_ms = rt.p95_ms;
  }
  return report;
}

std::string eval_csv_header() { return "model,auc,logloss,rt_mean_ms,rt_p95_ms,n"; }

std::string eval_csv_row(const std::string& model, const EvalReport& report) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << model << ',' << report.auc << ',' << report.logloss << ','
     << report.rt_mean_ms << ',' << report.rt_p95_ms << ',' << report.n_examples;
  return os.str();
}

}  // namespace bst
