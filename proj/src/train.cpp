#include "bst/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bst/rng.hpp"

namespace bst {

namespace {

constexpr std::uint64_t kTagShuffle = 201;
constexpr std::uint64_t kTagDropout = 202;

}  // namespace

void validate_train_config(const TrainConfig& config) {
  if (config.epochs < 1) throw std::invalid_argument("train config: epochs must be >= 1");
  if (config.batch_size < 1) throw std::invalid_argument("train config: batch size must be >= 1");
  if (config.lr < 0.0) throw std::invalid_argument("train config: lr must be >= 0");
  if (config.beta1 <= 0.0 || config.beta1 >= 1.0 || config.beta2 <= 0.0 || config.beta2 >= 1.0)
    throw std::invalid_argument("train config: moment decays must be in (0,1)");
  if (config.eps <= 0.0) throw std::invalid_argument("train config: eps must be positive");
}

void adam_step(NamedTensors& params, const Gradient& grads, AdamState& state,
               const TrainConfig& config) {
  ++state.t;
  double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
  double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
  for (const auto& [name, g] : grads) {
    if (!g.all_finite())
      throw std::runtime_error("adam_step: non-finite gradient for " + name);
    auto pit = params.find(name);
    if (pit == params.end()) throw std::invalid_argument("adam_step: unknown parameter " + name);
    Tensor& p = pit->second;
    if (!p.same_shape(g))
      throw std::invalid_argument("adam_step: gradient shape " + g.shape_str() +
                                  " != param shape " + p.shape_str() + " for " + name);
    Tensor& m = state.m.try_emplace(name, Tensor(g.rows, g.cols)).first->second;
    Tensor& v = state.v.try_emplace(name, Tensor(g.rows, g.cols)).first->second;
    for (int k = 0; k < g.size(); ++k) {
      m.data[k] = config.beta1 * m.data[k] + (1.0 - config.beta1) * g.data[k];
      v.data[k] = config.beta2 * v.data[k] + (1.0 - config.beta2) * g.data[k] * g.data[k];
      double mhat = m.data[k] / bc1;
      double vhat = v.data[k] / bc2;
      p.data[k] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
    }
  }
}

TrainResult train_model(const std::vector<Example>& data, const ModelConfig& model_config,
                        const TrainConfig& train_config) {
  if (data.empty()) throw std::invalid_argument("train: empty dataset");
  validate_model_config(model_config);
  validate_train_config(train_config);

  TrainResult result;
  result.params = init_params(model_config);
  AdamState state;

  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < train_config.epochs; ++epoch) {
    if (train_config.shuffle) {
      Rng rng = make_rng(
          derive_seed(train_config.seed, {kTagShuffle, static_cast<std::uint64_t>(epoch)}));
      std::shuffle(order.begin(), order.end(), rng);
    }
    double loss_sum = 0.0;
    size_t at = 0;
    while (at < order.size()) {
      size_t batch_end = std::min(at + static_cast<size_t>(train_config.batch_size), order.size());
      int batch_n = static_cast<int>(batch_end - at);
      Gradient acc;
      for (size_t b = at; b < batch_end; ++b) {
        const Example& e = data[order[b]];
        Rng dropout_rng = make_rng(derive_seed(
            train_config.seed,
            {kTagDropout, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(b)}));
        Tape tape;
        Var prob = model_forward(tape, result.params, e, model_config, Mode::kTrain, dropout_rng);
        Var loss = bce_loss(prob, {e.label});
        loss_sum += loss.value().data[0];
        tape.backward_into(loss, acc, 1.0 / batch_n);
      }
      adam_step(result.params, acc, state, train_config);
      at = batch_end;
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(data.size()));
  }
  return result;
}

}  // namespace bst
