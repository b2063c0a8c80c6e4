#include "bst/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bst/rng.hpp"
#include "bst/tensor.hpp"

namespace bst {

namespace {

// substream tags for derive_seed
constexpr std::uint64_t kTagBackbone = 101;
constexpr std::uint64_t kTagUser = 102;
constexpr std::uint64_t kTagSplitUsers = 103;
constexpr std::uint64_t kTagPilot = 104;
constexpr std::uint64_t kTagTrain = 105;
constexpr std::uint64_t kTagTest = 106;

std::vector<double> dirichlet(const std::vector<double>& alpha, Rng& rng) {
  std::vector<double> out(alpha.size());
  double total = 0.0;
  for (size_t i = 0; i < alpha.size(); ++i) {
    std::gamma_distribution<double> g(alpha[i], 1.0);
    out[i] = g(rng);
    total += out[i];
  }
  if (total <= 0.0 || !std::isfinite(total)) {
    // degenerate concentration: collapse onto one state drawn from the base
    std::discrete_distribution<int> pick(alpha.begin(), alpha.end());
    std::fill(out.begin(), out.end(), 0.0);
    out[pick(rng)] = 1.0;
    return out;
  }
  for (double& v : out) v /= total;
  return out;
}

int sample_categorical(const std::vector<double>& p, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double r = u(rng), acc = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (r < acc) return static_cast<int>(i);
  }
  return static_cast<int>(p.size()) - 1;
}

struct Latents {
  // row c-1: transition distribution out of category c (real ids 1..C)
  std::vector<std::vector<double>> backbone;
  std::vector<std::vector<std::vector<double>>> user_chain;  // [user][c-1][c'-1]
  std::vector<double> category_popularity;                   // z-scores, index c-1
  std::vector<int> train_users, test_users;                  // real user ids
  double intercept = 0.0;
};

struct RawDraw {
  Example example;
  double match = 0.0;  // recency-weighted pattern match s
};

RawDraw draw_example(const GenConfig& gen, const Latents& lat, const std::vector<int>& pool,
                     Rng& rng) {
  int C = gen.n_categories;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  RawDraw raw;
  Example& e = raw.example;
  e.user_id = pool[std::uniform_int_distribution<int>(0, static_cast<int>(pool.size()) - 1)(rng)];
  const auto& chain = lat.user_chain[e.user_id - 1];

  for (const auto& [name, n_values] : gen.profile_fields)
    e.other[name] = std::uniform_int_distribution<int>(1, n_values)(rng);

  int len = std::uniform_int_distribution<int>(gen.seq_len_min, gen.seq_len_max)(rng);
  int items_per_cat = gen.n_items / C;
  auto item_of = [&](int cat) {
    // items are striped over categories: item i has category 1 + (i-1) % C
    int k = std::uniform_int_distribution<int>(0, items_per_cat - 1)(rng);
    return cat + k * C;
  };

  std::int64_t t = 1000 + std::uniform_int_distribution<int>(0, 500)(rng);
  int c = std::uniform_int_distribution<int>(1, C)(rng);
  for (int k = 0; k < len; ++k) {
    e.history.push_back({item_of(c), c, t});
    if (k + 1 < len) {
      c = 1 + sample_categorical(chain[c - 1], rng);
      t += std::uniform_int_distribution<int>(gen.dt_min, gen.dt_max)(rng);
    }
  }
  std::int64_t t_req = t + std::uniform_int_distribution<int>(gen.dt_min, gen.dt_max)(rng);

  int c_last = e.history.back().cat;
  int c_target = u01(rng) < gen.in_pattern_prob ? 1 + sample_categorical(chain[c_last - 1], rng)
                                                : std::uniform_int_distribution<int>(1, C)(rng);
  e.target = {item_of(c_target), c_target, t_req};

  double wsum = 0.0, s = 0.0;
  for (const BehaviorEvent& ev : e.history) {
    double w = std::exp(-static_cast<double>(t_req - ev.ts) / gen.lambda_recency);
    wsum += w;
    s += w * chain[ev.cat - 1][c_target - 1];
  }
  raw.match = s / wsum;
  return raw;
}

double click_probability(const GenConfig& gen, const Latents& lat, const RawDraw& raw) {
  double logit = gen.signal_gain * raw.match +
                 gen.popularity_gain * lat.category_popularity[raw.example.target.cat - 1] +
                 lat.intercept;
  return stable_sigmoid(logit);
}

}  // namespace

void validate_gen_config(const GenConfig& gen) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("gen config: " + what);
  };
  need(gen.n_users >= 2, "n_users must be >= 2");
  need(gen.n_items >= 2, "n_items must be >= 2");
  need(gen.n_categories >= 2, "n_categories must be >= 2");
  need(gen.n_items >= gen.n_categories, "need at least one item per category");
  need(gen.seq_len_min >= 1 && gen.seq_len_max >= gen.seq_len_min, "bad sequence length range");
  need(gen.dt_min >= 1 && gen.dt_max >= gen.dt_min, "bad event-gap range");
  need(gen.alpha >= 0.0, "alpha must be non-negative");
  need(gen.backbone_sharpness > 0.0, "backbone_sharpness must be positive");
  need(gen.lambda_recency > 0.0, "lambda_recency must be positive");
  need(gen.label_noise >= 0.0 && gen.label_noise < 0.5, "label noise must be in [0, 0.5)");
  need(gen.in_pattern_prob >= 0.0 && gen.in_pattern_prob <= 1.0, "in_pattern_prob in [0,1]");
  need(gen.target_positive_rate > 0.0 && gen.target_positive_rate < 1.0,
       "target_positive_rate in (0,1)");
  need(gen.train_size >= 1 && gen.test_size >= 1, "train/test sizes must be >= 1");
  need(gen.test_user_fraction > 0.0 && gen.test_user_fraction < 1.0,
       "test_user_fraction in (0,1)");
  for (const auto& [name, n] : gen.profile_fields) {
    need(!name.empty(), "profile field with empty name");
    need(n >= 2, "profile field " + name + " needs >= 2 values");
  }
}

Dataset generate_dataset(const GenConfig& gen) {
  validate_gen_config(gen);
  int C = gen.n_categories;

  Latents lat;
  {
    Rng rng = make_rng(derive_seed(gen.seed, {kTagBackbone}));
    std::vector<double> sym(C, gen.backbone_sharpness);
    for (int c = 0; c < C; ++c) lat.backbone.push_back(dirichlet(sym, rng));
    std::normal_distribution<double> z(0.0, 1.0);
    for (int c = 0; c < C; ++c) lat.category_popularity.push_back(z(rng));
  }

  lat.user_chain.resize(gen.n_users);
  for (int u = 0; u < gen.n_users; ++u) {
    Rng rng = make_rng(derive_seed(gen.seed, {kTagUser, static_cast<std::uint64_t>(u)}));
    auto& chain = lat.user_chain[u];
    chain.reserve(C);
    for (int c = 0; c < C; ++c) {
      std::vector<double> a(C);
      for (int j = 0; j < C; ++j) a[j] = gen.alpha * lat.backbone[c][j];
      chain.push_back(dirichlet(a, rng));
    }
  }

  {
    Rng rng = make_rng(derive_seed(gen.seed, {kTagSplitUsers}));
    std::vector<int> users(gen.n_users);
    std::iota(users.begin(), users.end(), 1);
    std::shuffle(users.begin(), users.end(), rng);
    int n_test = std::clamp(static_cast<int>(std::lround(gen.test_user_fraction * gen.n_users)),
                            1, gen.n_users - 1);
    lat.test_users.assign(users.begin(), users.begin() + n_test);
    lat.train_users.assign(users.begin() + n_test, users.end());
  }

  std::vector<int> all_users(gen.n_users);
  std::iota(all_users.begin(), all_users.end(), 1);

  // calibrate the intercept so the mean pre-noise click probability matches
  // target_positive_rate on a pilot sample
  {
    const int pilots = 2000;
    std::vector<RawDraw> pilot;
    pilot.reserve(pilots);
    for (int i = 0; i < pilots; ++i) {
      Rng rng = make_rng(derive_seed(gen.seed, {kTagPilot, static_cast<std::uint64_t>(i)}));
      pilot.push_back(draw_example(gen, lat, all_users, rng));
    }
    double lo = -40.0, hi = 40.0;
    for (int iter = 0; iter < 80; ++iter) {
      lat.intercept = 0.5 * (lo + hi);
      double mean = 0.0;
      for (const RawDraw& raw : pilot) mean += click_probability(gen, lat, raw);
      mean /= pilots;
      (mean < gen.target_positive_rate ? lo : hi) = lat.intercept;
    }
  }

  Dataset out;
  double rate_acc = 0.0;
  auto emit = [&](std::uint64_t tag, int count, const std::vector<int>& pool,
                  std::vector<Example>& sink, std::vector<double>& probs) {
    sink.reserve(count);
    probs.reserve(count);
    for (int i = 0; i < count; ++i) {
      Rng rng = make_rng(derive_seed(gen.seed, {tag, static_cast<std::uint64_t>(i)}));
      RawDraw raw = draw_example(gen, lat, pool, rng);
      double p = click_probability(gen, lat, raw);
      std::uniform_real_distribution<double> u01(0.0, 1.0);
      int label = u01(rng) < p ? 1 : 0;
      if (u01(rng) < gen.label_noise) label = 1 - label;
      raw.example.label = label;
      sink.push_back(std::move(raw.example));
      probs.push_back(p);
      rate_acc += (1.0 - gen.label_noise) * p + gen.label_noise * (1.0 - p);
    }
  };
  emit(kTagTrain, gen.train_size, lat.train_users, out.train, out.train_true_prob);
  emit(kTagTest, gen.test_size, lat.test_users, out.test, out.test_true_prob);
  out.expected_positive_rate = rate_acc / (gen.train_size + gen.test_size);
  return out;
}

FeatureSchema default_schema_for(const GenConfig& gen) {
  FeatureSchema s;
  s.item_vocab = gen.n_items + 1;
  s.item_width = 8;
  s.cat_vocab = gen.n_categories + 1;
  s.cat_width = 4;
  s.pos_buckets = 12;
  s.pos_width = 4;
  s.seq_len = gen.seq_len_max;
  for (const auto& [name, n] : gen.profile_fields) s.fields.push_back({name, n + 1, 2});
  if (!gen.profile_fields.empty())
    s.crosses.push_back({gen.profile_fields.back().first, "item_id", 101, 2});
  return s;
}

}  // namespace bst
