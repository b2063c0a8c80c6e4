#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bst/gradcheck.hpp"
#include "bst/rng.hpp"
#include "bst/transformer.hpp"

using namespace bst;

namespace {

Tensor random_tensor(int r, int c, Rng& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Tensor t(r, c);
  for (double& v : t.data) v = u(rng);
  return t;
}

BlockConfig tiny_config() {
  BlockConfig c;
  c.d_model = 8;
  c.heads = 2;
  c.d_ff = 16;
  c.dropout_rate = 0.1;
  c.leaky_slope = 0.01;
  c.eps = 1e-9;
  c.blocks = 1;
  return c;
}

NamedTensors block_params(const BlockConfig& c, std::uint64_t seed, const std::string& prefix) {
  NamedTensors p;
  Rng rng = make_rng(seed);
  auto mat = [&](const std::string& name, int r, int cols, double s) {
    p.emplace(prefix + name, random_tensor(r, cols, rng, s));
  };
  for (int j = 0; j < c.heads; ++j) {
    std::string hp = "h" + std::to_string(j) + ".";
    mat(hp + "wq", c.d_model, c.d_head(), 0.5);
    mat(hp + "wk", c.d_model, c.d_head(), 0.5);
    mat(hp + "wv", c.d_model, c.d_head(), 0.5);
  }
  mat("wh", c.heads * c.d_head(), c.d_model, 0.5);
  mat("ffn.w1", c.d_model, c.ffn_width(), 0.4);
  p.emplace(prefix + "ffn.b1", Tensor(1, c.ffn_width()));
  mat("ffn.w2", c.ffn_width(), c.d_model, 0.4);
  p.emplace(prefix + "ffn.b2", Tensor(1, c.d_model));
  p.emplace(prefix + "ln1.g", Tensor(1, c.d_model, 1.0));
  p.emplace(prefix + "ln1.b", Tensor(1, c.d_model));
  p.emplace(prefix + "ln2.g", Tensor(1, c.d_model, 1.0));
  p.emplace(prefix + "ln2.b", Tensor(1, c.d_model));
  return p;
}

// plain-loop reimplementation of softmax(QK^T/sqrt(d)) V for oracle checks
Tensor brute_attention(const Tensor& Q, const Tensor& K, const Tensor& V, const SeqMask& mask) {
  int L = Q.rows, d = Q.cols;
  Tensor out(L, V.cols);
  for (int i = 0; i < L; ++i) {
    std::vector<double> w(L, 0.0);
    double denom = 0.0;
    for (int j = 0; j < L; ++j) {
      if (!mask[j]) continue;
      double dot = 0.0;
      for (int k = 0; k < d; ++k) dot += Q.at(i, k) * K.at(j, k);
      w[j] = std::exp(dot / std::sqrt(static_cast<double>(d)));
      denom += w[j];
    }
    for (int j = 0; j < L; ++j)
      for (int k = 0; k < V.cols; ++k) out.at(i, k) += (w[j] / denom) * V.at(j, k);
  }
  return out;
}

}  // namespace

TEST_CASE("attention with one position returns V unchanged") {
  Tape tape;
  Var v = tape.constant(Tensor::from_rows({{1.5, -2.0, 0.25}}));
  Var out = scaled_dot_attention(v, v, v, SeqMask{1});
  CHECK(out.value().data == v.value().data);
}

TEST_CASE("attention with a masked key copies the surviving value row") {
  Tape tape;
  Var q = tape.constant(Tensor::from_rows({{1, 0}, {0, 1}}));
  Var k = tape.constant(Tensor::from_rows({{1, 0}, {0, 1}}));
  Var v = tape.constant(Tensor::from_rows({{3, 4}, {5, 6}}));
  Tensor out = scaled_dot_attention(q, k, v, SeqMask{1, 0}).value();
  CHECK(out.at(0, 0) == 3.0);
  CHECK(out.at(0, 1) == 4.0);
  CHECK(out.at(1, 0) == 3.0);
  CHECK(out.at(1, 1) == 4.0);
}

TEST_CASE("attention matches a brute-force evaluation") {
  Tensor Q = Tensor::from_rows({{1, 0}, {0, 1}});
  Tensor K = Tensor::from_rows({{1, 0}, {0, 1}});
  Tensor V = Tensor::from_rows({{1, 0}, {0, 2}});
  Tape tape;
  Tensor got =
      scaled_dot_attention(tape.constant(Q), tape.constant(K), tape.constant(V), SeqMask{1, 1})
          .value();
  Tensor want = brute_attention(Q, K, V, SeqMask{1, 1});
  for (int i = 0; i < got.size(); ++i) CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));
  // anchor one number: softmax([1/sqrt(2), 0]) weight on V row 1
  double w = std::exp(1.0 / std::sqrt(2.0)) / (std::exp(1.0 / std::sqrt(2.0)) + 1.0);
  CHECK(got.at(0, 0) == doctest::Approx(w).epsilon(1e-12));
  CHECK(got.at(0, 1) == doctest::Approx(2.0 * (1.0 - w)).epsilon(1e-12));

  Rng rng = make_rng(77);
  Tensor Qr = random_tensor(5, 3, rng), Kr = random_tensor(5, 3, rng), Vr = random_tensor(5, 3, rng);
  SeqMask mask{1, 0, 1, 1, 0};
  Tensor got_r =
      scaled_dot_attention(tape.constant(Qr), tape.constant(Kr), tape.constant(Vr), mask).value();
  Tensor want_r = brute_attention(Qr, Kr, Vr, mask);
  for (int i = 0; i < got_r.size(); ++i)
    CHECK(got_r.data[i] == doctest::Approx(want_r.data[i]).epsilon(1e-12));
}

TEST_CASE("attention rejects a fully masked sequence") {
  Tape tape;
  Var v = tape.constant(Tensor(2, 2, 1.0));
  CHECK_THROWS_AS(scaled_dot_attention(v, v, v, SeqMask{0, 0}), std::runtime_error);
}

TEST_CASE("multi_head with identity projections and one head is the identity on L=1") {
  BlockConfig c;
  c.d_model = 2;
  c.heads = 1;
  NamedTensors p;
  Tensor eye = Tensor::from_rows({{1, 0}, {0, 1}});
  p.emplace("t.h0.wq", eye);
  p.emplace("t.h0.wk", eye);
  p.emplace("t.h0.wv", eye);
  p.emplace("t.wh", eye);
  Tape tape;
  Var e = tape.constant(Tensor::from_rows({{0.75, -1.25}}));
  Var s = multi_head(tape, p, "t.", e, c, SeqMask{1});
  CHECK(s.value().data == e.value().data);
}

TEST_CASE("multi_head and eval-mode block are exactly permutation equivariant") {
  BlockConfig c = tiny_config();
  NamedTensors p = block_params(c, 42, "blk0.");
  Rng rng = make_rng(43);
  const int L = 6;
  Tensor E = random_tensor(L, c.d_model, rng);
  SeqMask mask{0, 1, 1, 0, 1, 1};

  std::vector<int> perm(L);
  std::iota(perm.begin(), perm.end(), 0);
  Rng prng = make_rng(44);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(perm.begin(), perm.end(), prng);
    Tensor Ep(L, c.d_model);
    SeqMask maskp(L);
    for (int i = 0; i < L; ++i) {
      maskp[i] = mask[perm[i]];
      for (int j = 0; j < c.d_model; ++j) Ep.at(i, j) = E.at(perm[i], j);
    }

    Tape tape;
    Rng unused = make_rng(0);
    Tensor base = multi_head(tape, p, "blk0.", tape.constant(E), c, mask).value();
    Tensor permuted = multi_head(tape, p, "blk0.", tape.constant(Ep), c, maskp).value();
    Tensor blk_base =
        transformer_block(tape, p, "blk0.", tape.constant(E), c, mask, Mode::kEval, unused).value();
    Tensor blk_perm =
        transformer_block(tape, p, "blk0.", tape.constant(Ep), c, maskp, Mode::kEval, unused)
            .value();
    for (int i = 0; i < L; ++i)
      for (int j = 0; j < c.d_model; ++j) {
        CHECK(permuted.at(i, j) == base.at(perm[i], j));  // bitwise
        CHECK(blk_perm.at(i, j) == blk_base.at(perm[i], j));
      }
  }
}

TEST_CASE("transformer_block keeps shape and is deterministic in eval mode") {
  BlockConfig c = tiny_config();
  NamedTensors p = block_params(c, 7, "blk0.");
  Rng rng = make_rng(8);
  Tensor E = random_tensor(5, c.d_model, rng);
  SeqMask mask{1, 1, 1, 0, 1};
  Tape tape;
  Rng r1 = make_rng(1), r2 = make_rng(999);
  Tensor a = transformer_block(tape, p, "blk0.", tape.constant(E), c, mask, Mode::kEval, r1).value();
  Tensor b = transformer_block(tape, p, "blk0.", tape.constant(E), c, mask, Mode::kEval, r2).value();
  CHECK(a.rows == 5);
  CHECK(a.cols == c.d_model);
  CHECK(a.data == b.data);  // eval forward ignores the rng entirely
}

TEST_CASE("stack_blocks with b=1 equals a single block; b=3 preserves shape") {
  BlockConfig c = tiny_config();
  NamedTensors p1 = block_params(c, 11, "blk0.");
  Rng rng = make_rng(12);
  Tensor E = random_tensor(4, c.d_model, rng);
  SeqMask mask{1, 1, 0, 1};
  Tape tape;
  Rng unused = make_rng(0);
  Tensor single =
      transformer_block(tape, p1, "blk0.", tape.constant(E), c, mask, Mode::kEval, unused).value();
  Tensor stacked = stack_blocks(tape, p1, tape.constant(E), c, mask, Mode::kEval, unused).value();
  CHECK(single.data == stacked.data);

  BlockConfig c3 = c;
  c3.blocks = 3;
  NamedTensors p3;
  for (int b = 0; b < 3; ++b)
    p3.merge(block_params(c, 20 + b, "blk" + std::to_string(b) + "."));
  Tensor deep = stack_blocks(tape, p3, tape.constant(E), c3, mask, Mode::kEval, unused).value();
  CHECK(deep.rows == 4);
  CHECK(deep.cols == c.d_model);
  CHECK(deep.all_finite());
}

TEST_CASE("block config validation") {
  BlockConfig c = tiny_config();
  CHECK_NOTHROW(validate_block_config(c));
  c.heads = 3;  // 8 % 3 != 0
  CHECK_THROWS_AS(validate_block_config(c), std::invalid_argument);
  c = tiny_config();
  c.blocks = 0;
  CHECK_THROWS_AS(validate_block_config(c), std::invalid_argument);
  c = tiny_config();
  c.dropout_rate = 1.0;
  CHECK_THROWS_AS(validate_block_config(c), std::invalid_argument);
}

TEST_CASE("full transformer block gradients match finite differences") {
  BlockConfig c = tiny_config();
  NamedTensors params = block_params(c, 31, "blk0.");
  Rng rng = make_rng(32);
  Tensor E = random_tensor(4, c.d_model, rng, 0.8);
  SeqMask mask{0, 1, 1, 1};
  ForwardFn fn = [&](Tape& tape, const NamedTensors& p) {
    Rng unused = make_rng(0);
    Var out = transformer_block(tape, p, "blk0.", tape.constant(E), c, mask, Mode::kEval, unused);
    return sum_all(mask_rows(out, mask));
  };
  GradcheckReport report = grad_check(fn, params, 1e-5);
  INFO("worst: ", report.worst.name, "[", report.worst.index, "] analytic ", report.worst.analytic,
       " numeric ", report.worst.numeric);
  CHECK(report.max_err < 1e-4);
}
