#include "bst/model.hpp"

#include <cmath>
#include <stdexcept>

namespace bst {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kBst: return "BST";
    case ModelKind::kWdl: return "WDL";
    case ModelKind::kWdlSeq: return "WDL_SEQ";
    case ModelKind::kDinLite: return "DIN_LITE";
  }
  throw std::invalid_argument("unknown model kind");
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "BST") return ModelKind::kBst;
  if (name == "WDL") return ModelKind::kWdl;
  if (name == "WDL_SEQ") return ModelKind::kWdlSeq;
  if (name == "DIN_LITE") return ModelKind::kDinLite;
  throw std::invalid_argument("unknown model kind: " + name +
                              " (want BST, WDL, WDL_SEQ or DIN_LITE)");
}

void validate_model_config(const ModelConfig& config) {
  validate_schema(config.schema);
  for (int w : config.mlp_hidden)
    if (w <= 0) throw std::invalid_argument("model config: mlp widths must be positive");
  if (config.kind == ModelKind::kBst) {
    validate_block_config(config.block);
    if (config.block.d_model != config.schema.d_model())
      throw std::invalid_argument(
          "model config: block d_model " + std::to_string(config.block.d_model) +
          " != schema item+cat+pos width " + std::to_string(config.schema.d_model()));
  }
}

namespace {

int plain_width(const FeatureSchema& s) { return s.item_width + s.cat_width; }

}  // namespace

int mlp_input_width(const ModelConfig& config) {
  const FeatureSchema& s = config.schema;
  switch (config.kind) {
    case ModelKind::kBst: return (s.seq_len + 1) * s.d_model() + s.d_other();
    case ModelKind::kWdl: return s.d_other() + plain_width(s);
    case ModelKind::kWdlSeq:
    case ModelKind::kDinLite: return 2 * plain_width(s) + s.d_other();
  }
  throw std::invalid_argument("unknown model kind");
}

std::map<std::string, std::pair<int, int>> expected_param_shapes(const ModelConfig& config) {
  validate_model_config(config);
  auto shapes = embedding_table_shapes(config.schema);
  if (config.kind == ModelKind::kBst) {
    const BlockConfig& b = config.block;
    for (int i = 0; i < b.blocks; ++i) {
      std::string p = "blk" + std::to_string(i) + ".";
      for (int j = 0; j < b.heads; ++j) {
        std::string hp = p + "h" + std::to_string(j) + ".";
        shapes[hp + "wq"] = {b.d_model, b.d_head()};
        shapes[hp + "wk"] = {b.d_model, b.d_head()};
        shapes[hp + "wv"] = {b.d_model, b.d_head()};
      }
      shapes[p + "wh"] = {b.heads * b.d_head(), b.d_model};
      shapes[p + "ffn.w1"] = {b.d_model, b.ffn_width()};
      shapes[p + "ffn.b1"] = {1, b.ffn_width()};
      shapes[p + "ffn.w2"] = {b.ffn_width(), b.d_model};
      shapes[p + "ffn.b2"] = {1, b.d_model};
      shapes[p + "ln1.g"] = {1, b.d_model};
      shapes[p + "ln1.b"] = {1, b.d_model};
      shapes[p + "ln2.g"] = {1, b.d_model};
      shapes[p + "ln2.b"] = {1, b.d_model};
    }
  }
  if (config.kind == ModelKind::kDinLite) {
    int w = plain_width(config.schema);
    shapes["din.a"] = {w, w};
  }
  int d_in = mlp_input_width(config);
  std::array<int, 4> widths{config.mlp_hidden[0], config.mlp_hidden[1], config.mlp_hidden[2], 1};
  int prev = d_in;
  for (int k = 0; k < 4; ++k) {
    std::string name = k == 3 ? "mlp.out" : "mlp." + std::to_string(k);
    shapes[name + ".w"] = {prev, widths[k]};
    shapes[name + ".b"] = {1, widths[k]};
    prev = widths[k];
  }
  return shapes;
}

namespace {

bool is_bias_name(const std::string& name) {
  return name.ends_with(".b") || name.ends_with(".b1") || name.ends_with(".b2");
}

bool is_ln_gain_name(const std::string& name) { return name.ends_with(".g"); }

}  // namespace

NamedTensors init_params(const ModelConfig& config) {
  NamedTensors params;
  for (const auto& [name, shape] : expected_param_shapes(config)) {
    auto [rows, cols] = shape;
    Tensor t(rows, cols);
    if (is_ln_gain_name(name)) {
      std::fill(t.data.begin(), t.data.end(), 1.0);
    } else if (!is_bias_name(name)) {
      Rng rng = make_rng(derive_seed(config.seed, {fnv1a64(name)}));
      double bound = std::sqrt(6.0 / (rows + cols));
      std::uniform_real_distribution<double> u(-bound, bound);
      for (double& v : t.data) v = u(rng);
    }
    params.emplace(name, std::move(t));
  }
  return params;
}

void check_param_shapes(const NamedTensors& params, const ModelConfig& config) {
  auto expected = expected_param_shapes(config);
  for (const auto& [name, shape] : expected) {
    auto it = params.find(name);
    if (it == params.end()) throw std::invalid_argument("params missing tensor " + name);
    if (it->second.rows != shape.first || it->second.cols != shape.second)
      throw std::invalid_argument("param " + name + " has shape " + it->second.shape_str() +
                                  ", want " + std::to_string(shape.first) + "x" +
                                  std::to_string(shape.second));
    if (!it->second.all_finite())
      throw std::invalid_argument("param " + name + " has non-finite entries");
  }
  for (const auto& [name, tensor] : params)
    if (!expected.count(name)) throw std::invalid_argument("unexpected param tensor " + name);
}

Var mlp_head(Tape& tape, const NamedTensors& params, Var z, const ModelConfig& config) {
  Var h = z;
  for (int k = 0; k < 3; ++k) {
    std::string name = "mlp." + std::to_string(k);
    h = leaky_relu(add_rowvec(matmul(h, tape.param(name + ".w", params.at(name + ".w"))),
                              tape.param(name + ".b", params.at(name + ".b"))),
                   config.block.leaky_slope);
  }
  Var logit = add_rowvec(matmul(h, tape.param("mlp.out.w", params.at("mlp.out.w"))),
                         tape.param("mlp.out.b", params.at("mlp.out.b")));
  return sigmoid(logit);
}

Var bst_head(Tape& tape, const NamedTensors& params, const SeqSlots& slots, Var other,
             const ModelConfig& config, Mode mode, Rng& rng) {
  Var e = embed_sequence(tape, params, slots, config.schema);
  Var out = stack_blocks(tape, params, e, config.block, slots.mask, mode, rng);
  // padded query rows never reach the head: zero them before flattening
  Var kept = mask_rows(out, slots.mask);
  return mlp_head(tape, params, concat_cols({flatten_row(kept), other}), config);
}

namespace {

// mean of unmasked history rows; zero vector when everything is padding
Var masked_history_mean(Tape& tape, Var hist, const SeqSlots& slots) {
  int n = hist.rows();
  int real = 0;
  for (int i = 0; i < n; ++i) real += slots.mask[i] ? 1 : 0;
  if (real == 0) return tape.constant(Tensor(1, hist.cols()));
  Tensor w(1, n);
  for (int i = 0; i < n; ++i) w.data[i] = slots.mask[i] ? 1.0 / real : 0.0;
  return matmul_canonical(tape.constant(w), hist);
}

Var din_pooled(Tape& tape, const NamedTensors& params, Var hist, Var target,
               const SeqSlots& slots) {
  int n = hist.rows();
  int real = 0;
  for (int i = 0; i < n; ++i) real += slots.mask[i] ? 1 : 0;
  if (real == 0) return tape.constant(Tensor(1, hist.cols()));
  Var a = tape.param("din.a", params.at("din.a"));
  Var scores = transpose(matmul(matmul(hist, a), transpose(target)));  // 1 x n
  MaskMatrix mask(1, n);
  for (int i = 0; i < n; ++i) mask.set(0, i, slots.mask[i] != 0);
  Var weights = softmax_rows(scores, &mask);
  return matmul_canonical(weights, hist);
}

}  // namespace

Var model_forward(Tape& tape, const NamedTensors& params, const Example& example,
                  const ModelConfig& config, Mode mode, Rng& rng, OovTally* tally) {
  SeqSlots slots = sequence_slots(example, config.schema, tally);
  Var other = embed_other_features(tape, params, example, config.schema, tally);
  switch (config.kind) {
    case ModelKind::kBst:
      return bst_head(tape, params, slots, other, config, mode, rng);
    case ModelKind::kWdl: {
      Var target = embed_target_plain(tape, params, slots);
      return mlp_head(tape, params, concat_cols({other, target}), config);
    }
    case ModelKind::kWdlSeq: {
      Var hist = embed_history_plain(tape, params, slots);
      Var target = embed_target_plain(tape, params, slots);
      Var pooled = masked_history_mean(tape, hist, slots);
      return mlp_head(tape, params, concat_cols({pooled, target, other}), config);
    }
    case ModelKind::kDinLite: {
      Var hist = embed_history_plain(tape, params, slots);
      Var target = embed_target_plain(tape, params, slots);
      Var pooled = din_pooled(tape, params, hist, target, slots);
      return mlp_head(tape, params, concat_cols({pooled, target, other}), config);
    }
  }
  throw std::invalid_argument("unknown model kind");
}

double predict(const NamedTensors& params, const Example& example, const ModelConfig& config) {
  Tape tape;
  Rng rng = make_rng(0);  // eval mode never draws
  return model_forward(tape, params, example, config, Mode::kEval, rng).value().data[0];
}

std::vector<double> predict_batch(const NamedTensors& params, const std::vector<Example>& examples,
                                  const ModelConfig& config) {
  std::vector<double> probs;
  probs.reserve(examples.size());
  for (const Example& e : examples) probs.push_back(predict(params, e, config));
  return probs;
}

}  // namespace bst
