#pragma once

#include <string>

#include "bst/graph.hpp"

namespace bst {

struct BlockConfig {
  int d_model = 0;
  int heads = 1;
  int d_ff = 0;  // 0 -> 4*d_model
  double dropout_rate = 0.0;
  double leaky_slope = 0.01;
  double eps = 1e-9;
  int blocks = 1;

  int d_head() const { return d_model / heads; }
  int ffn_width() const { return d_ff > 0 ? d_ff : 4 * d_model; }
};

void validate_block_config(const BlockConfig& config);

// softmax(Q K^T / sqrt(d_head)) V with masked key positions excluded from the
// normalization (their weight is exactly 0). mask marks real key positions.
Var scaled_dot_attention(Var q, Var k, Var v, const SeqMask& mask);

// Per-head projections of x, attention, concat, output projection. Parameter
// names under `prefix`: h<j>.wq / h<j>.wk / h<j>.wv and wh.
Var multi_head(Tape& tape, const NamedTensors& params, const std::string& prefix, Var x,
               const BlockConfig& config, const SeqMask& mask);

// Attention sublayer + FFN sublayer, each wrapped in dropout, a residual
// connection and layer norm. Parameter names under `prefix`: the multi_head
// set plus ffn.w1 / ffn.b1 / ffn.w2 / ffn.b2, ln1.g / ln1.b, ln2.g / ln2.b.
Var transformer_block(Tape& tape, const NamedTensors& params, const std::string& prefix, Var x,
                      const BlockConfig& config, const SeqMask& mask, Mode mode, Rng& rng);

// config.blocks blocks chained, prefixes blk0., blk1., ...
Var stack_blocks(Tape& tape, const NamedTensors& params, Var x, const BlockConfig& config,
                 const SeqMask& mask, Mode mode, Rng& rng);

}  // namespace bst
