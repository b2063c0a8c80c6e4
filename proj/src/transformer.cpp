#include "bst/transformer.hpp"

#include <cmath>
#include <stdexcept>

namespace bst {

void validate_block_config(const BlockConfig& config) {
  if (config.d_model <= 0) throw std::invalid_argument("block config: d_model must be positive");
  if (config.heads <= 0 || config.d_model % config.heads != 0)
    throw std::invalid_argument("block config: d_model (" + std::to_string(config.d_model) +
                                ") must be divisible by heads (" + std::to_string(config.heads) +
                                ")");
  if (config.blocks < 1) throw std::invalid_argument("block config: blocks must be >= 1");
  if (config.dropout_rate < 0.0 || config.dropout_rate >= 1.0)
    throw std::invalid_argument("block config: dropout rate must be in [0, 1)");
  if (config.leaky_slope < 0.0 || config.leaky_slope >= 1.0)
    throw std::invalid_argument("block config: leaky slope must be in [0, 1)");
  if (config.eps <= 0.0) throw std::invalid_argument("block config: eps must be positive");
}

Var scaled_dot_attention(Var q, Var k, Var v, const SeqMask& mask) {
  const Tensor& Q = q.value();
  const Tensor& K = k.value();
  const Tensor& V = v.value();
  if (Q.cols != K.cols || K.rows != V.rows || Q.rows != K.rows || !Q.same_shape(V))
    throw std::invalid_argument("scaled_dot_attention: shapes disagree, Q " + Q.shape_str() +
                                " K " + K.shape_str() + " V " + V.shape_str());
  int L = Q.rows;
  if (static_cast<int>(mask.size()) != L)
    throw std::invalid_argument("scaled_dot_attention: mask length " +
                                std::to_string(mask.size()) + " vs L " + std::to_string(L));
  MaskMatrix keys(L, L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) keys.set(i, j, mask[j] != 0);
  Var scores = scale(matmul(q, transpose(k)), 1.0 / std::sqrt(static_cast<double>(Q.cols)));
  Var weights = softmax_rows(scores, &keys);
  // canonical contraction: bitwise invariant to reordering the key positions
  return matmul_canonical(weights, v);
}

Var multi_head(Tape& tape, const NamedTensors& params, const std::string& prefix, Var x,
               const BlockConfig& config, const SeqMask& mask) {
  validate_block_config(config);
  if (x.cols() != config.d_model)
    throw std::invalid_argument("multi_head: input width " + std::to_string(x.cols()) +
                                " != d_model " + std::to_string(config.d_model));
  std::vector<Var> heads;
  heads.reserve(config.heads);
  for (int j = 0; j < config.heads; ++j) {
    std::string hp = prefix + "h" + std::to_string(j) + ".";
    Var q = matmul(x, tape.param(hp + "wq", params.at(hp + "wq")));
    Var k = matmul(x, tape.param(hp + "wk", params.at(hp + "wk")));
    Var v = matmul(x, tape.param(hp + "wv", params.at(hp + "wv")));
    heads.push_back(scaled_dot_attention(q, k, v, mask));
  }
  return matmul(concat_cols(heads), tape.param(prefix + "wh", params.at(prefix + "wh")));
}

Var transformer_block(Tape& tape, const NamedTensors& params, const std::string& prefix, Var x,
                      const BlockConfig& config, const SeqMask& mask, Mode mode, Rng& rng) {
  Var attended = multi_head(tape, params, prefix, x, config, mask);
  Var s = layer_norm(add(x, dropout(attended, config.dropout_rate, mode, rng)),
                     tape.param(prefix + "ln1.g", params.at(prefix + "ln1.g")),
                     tape.param(prefix + "ln1.b", params.at(prefix + "ln1.b")), config.eps);
  Var hidden = leaky_relu(
      add_rowvec(matmul(s, tape.param(prefix + "ffn.w1", params.at(prefix + "ffn.w1"))),
                 tape.param(prefix + "ffn.b1", params.at(prefix + "ffn.b1"))),
      config.leaky_slope);
  Var ffn = add_rowvec(matmul(hidden, tape.param(prefix + "ffn.w2", params.at(prefix + "ffn.w2"))),
                       tape.param(prefix + "ffn.b2", params.at(prefix + "ffn.b2")));
  return layer_norm(add(s, dropout(ffn, config.dropout_rate, mode, rng)),
                    tape.param(prefix + "ln2.g", params.at(prefix + "ln2.g")),
                    tape.param(prefix + "ln2.b", params.at(prefix + "ln2.b")), config.eps);
}

Var stack_blocks(Tape& tape, const NamedTensors& params, Var x, const BlockConfig& config,
                 const SeqMask& mask, Mode mode, Rng& rng) {
  Var out = x;
  for (int b = 0; b < config.blocks; ++b)
    out = transformer_block(tape, params, "blk" + std::to_string(b) + ".", out, config, mask, mode,
                            rng);
  return out;
}

}  // namespace bst
