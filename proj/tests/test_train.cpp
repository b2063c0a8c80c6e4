#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "bst/metrics.hpp"
#include "bst/model.hpp"
#include "bst/train.hpp"

using namespace bst;

namespace {

bool params_equal(const NamedTensors& a, const NamedTensors& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [name, t] : a) {
    auto it = b.find(name);
    if (it == b.end() || !t.same_shape(it->second) || t.data != it->second.data) return false;
  }
  return true;
}

// schema small enough that a few hundred steps converge: the label is a pure
// function of the target category, so the cat embedding alone separates it
FeatureSchema toy_schema() {
  FeatureSchema s;
  s.item_vocab = 9;
  s.item_width = 4;
  s.cat_vocab = 5;
  s.cat_width = 2;
  s.pos_buckets = 6;
  s.pos_width = 2;
  s.seq_len = 4;
  s.fields = {{"bias", 2, 2}};
  return s;
}

ModelConfig toy_config(ModelKind kind) {
  ModelConfig config;
  config.schema = toy_schema();
  config.block.d_model = config.schema.d_model();
  config.block.heads = 2;
  config.block.d_ff = 8;
  config.block.blocks = 1;
  config.block.dropout_rate = 0.0;
  config.mlp_hidden = {8, 8, 4};
  config.kind = kind;
  config.seed = 3;
  return config;
}

std::vector<Example> toy_dataset(int n) {
  std::vector<Example> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    Example e;
    e.user_id = 1 + i % 7;
    e.other = {{"bias", 1}};
    int cat = 1 + i % 4;
    e.history = {{cat, cat, 100}, {1 + (i / 2) % 4, 1 + (i / 2) % 4, 180}};
    e.target = {cat + 4, cat, 260};
    e.label = cat <= 2 ? 1 : 0;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

TEST_CASE("train config validation") {
  TrainConfig t;
  CHECK_NOTHROW(validate_train_config(t));
  t.lr = 0.0;  // frozen model is a legal configuration
  CHECK_NOTHROW(validate_train_config(t));
  auto bad = [](auto&& tweak) {
    TrainConfig c;
    tweak(c);
    CHECK_THROWS_AS(validate_train_config(c), std::invalid_argument);
  };
  bad([](TrainConfig& c) { c.lr = -1e-3; });
  bad([](TrainConfig& c) { c.epochs = 0; });
  bad([](TrainConfig& c) { c.batch_size = 0; });
  bad([](TrainConfig& c) { c.beta1 = 1.0; });
  bad([](TrainConfig& c) { c.beta2 = 0.0; });
  bad([](TrainConfig& c) { c.eps = 0.0; });
}

TEST_CASE("adam: zero gradient leaves parameters untouched") {
  NamedTensors params{{"w", Tensor::from_rows({{1.0, -2.0, 3.0}})}};
  Gradient grads{{"w", Tensor(1, 3)}};
  AdamState state;
  TrainConfig config;
  adam_step(params, grads, state, config);
  CHECK(params.at("w").data == std::vector<double>{1.0, -2.0, 3.0});
  CHECK(state.t == 1);
}

TEST_CASE("adam: first step moves each entry by about -lr * sign(grad)") {
  NamedTensors params{{"w", Tensor::from_rows({{0.5, 0.5, 0.5}})}};
  Gradient grads{{"w", Tensor::from_rows({{2.0, -0.3, 1e-3}})}};
  AdamState state;
  TrainConfig config;
  config.lr = 0.01;
  adam_step(params, grads, state, config);
  // bias-corrected mhat = g, vhat = g^2, so the step is lr * g/(|g|+eps)
  CHECK(params.at("w").data[0] == doctest::Approx(0.5 - 0.01).epsilon(1e-6));
  CHECK(params.at("w").data[1] == doctest::Approx(0.5 + 0.01).epsilon(1e-6));
  CHECK(params.at("w").data[2] == doctest::Approx(0.5 - 0.01).epsilon(1e-4));
}

TEST_CASE("adam: rejects non-finite gradients by name") {
  NamedTensors params{{"mlp.0.w", Tensor(1, 2)}};
  Gradient grads{{"mlp.0.w", Tensor::from_rows({{1.0, std::numeric_limits<double>::quiet_NaN()}})}};
  AdamState state;
  TrainConfig config;
  CHECK_THROWS_WITH_AS(adam_step(params, grads, state, config),
                       doctest::Contains("non-finite gradient for mlp.0.w"), std::runtime_error);
  Gradient extra{{"ghost", Tensor(1, 2)}};
  CHECK_THROWS_WITH_AS(adam_step(params, extra, state, config),
                       doctest::Contains("unknown parameter ghost"), std::invalid_argument);
}

TEST_CASE("adam: shared step counter and determinism") {
  auto run = [] {
    NamedTensors params{{"a", Tensor::from_rows({{1.0}})}, {"b", Tensor::from_rows({{-1.0}})}};
    AdamState state;
    TrainConfig config;
    config.lr = 0.05;
    for (int step = 1; step <= 5; ++step) {
      Gradient grads{{"a", Tensor::from_rows({{0.2 * step}})},
                     {"b", Tensor::from_rows({{-0.1 * step}})}};
      adam_step(params, grads, state, config);
    }
    CHECK(state.t == 5);
    return params;
  };
  CHECK(params_equal(run(), run()));
}

TEST_CASE("lr = 0 training returns the initialization bitwise") {
  ModelConfig config = toy_config(ModelKind::kWdl);
  TrainConfig tc;
  tc.lr = 0.0;
  tc.epochs = 2;
  tc.shuffle = false;  // identical visit order makes the loss sums bitwise equal
  TrainResult result = train_model(toy_dataset(40), config, tc);
  CHECK(params_equal(result.params, init_params(config)));
  CHECK(result.epoch_loss.size() == 2);
  CHECK(result.epoch_loss[0] == result.epoch_loss[1]);  // nothing moved
}

TEST_CASE("a separable toy problem is learned") {
  ModelConfig config = toy_config(ModelKind::kWdl);
  std::vector<Example> data = toy_dataset(200);
  TrainConfig tc;
  tc.epochs = 25;
  tc.lr = 0.02;
  tc.seed = 5;
  TrainResult result = train_model(data, config, tc);
  REQUIRE(result.epoch_loss.size() == 25);
  CHECK(result.epoch_loss.back() < result.epoch_loss.front());
  CHECK(result.epoch_loss.back() < 0.3);

  std::vector<double> probs = predict_batch(result.params, data, config);
  std::vector<int> labels;
  for (const Example& e : data) labels.push_back(e.label);
  CHECK(auc(probs, labels) > 0.95);
}

TEST_CASE("training is bitwise deterministic, dropout included") {
  ModelConfig config = toy_config(ModelKind::kBst);
  config.block.dropout_rate = 0.3;
  std::vector<Example> data = toy_dataset(30);
  TrainConfig tc;
  tc.epochs = 2;
  tc.lr = 5e-3;
  tc.seed = 11;
  TrainResult a = train_model(data, config, tc);
  TrainResult b = train_model(data, config, tc);
  CHECK(params_equal(a.params, b.params));
  CHECK(a.epoch_loss == b.epoch_loss);

  tc.seed = 12;  // different shuffle + dropout stream
  TrainResult c = train_model(data, config, tc);
  CHECK_FALSE(params_equal(a.params, c.params));
}

TEST_CASE("training rejects an empty dataset") {
  CHECK_THROWS_AS(train_model({}, toy_config(ModelKind::kWdl), TrainConfig{}), std::invalid_argument);
}
