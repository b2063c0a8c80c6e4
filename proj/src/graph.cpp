#include "bst/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace bst {

const Tensor& Var::value() const { return tape->val(id); }

int Tape::emplace(Tensor value, PullFn pull) {
  Node node;
  node.grad = Tensor(value.rows, value.cols);
  node.value = std::move(value);
  node.pull = std::move(pull);
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

Var Tape::constant(Tensor value) { return Var{this, emplace(std::move(value), nullptr)}; }

Var Tape::param(const std::string& name, const Tensor& value) {
  auto it = param_ids_.find(name);
  if (it != param_ids_.end()) return Var{this, it->second};
  int id = emplace(value, nullptr);
  param_ids_.emplace(name, id);
  return Var{this, id};
}

void Tape::run_reverse(Var loss) {
  if (loss.tape != this) throw std::invalid_argument("backward: loss lives on another tape");
  const Tensor& lv = val(loss.id);
  if (lv.rows != 1 || lv.cols != 1)
    throw std::invalid_argument("backward: loss must be 1x1, got " + lv.shape_str());
  for (int i = 0; i <= loss.id; ++i)
    std::fill(nodes_[i].grad.data.begin(), nodes_[i].grad.data.end(), 0.0);
  nodes_[loss.id].grad.data[0] = 1.0;
  for (int i = loss.id; i >= 0; --i)
    if (nodes_[i].pull) nodes_[i].pull(*this, i);
}

Gradient Tape::backward(Var loss) {
  run_reverse(loss);
  Gradient out;
  for (const auto& [name, id] : param_ids_) out.emplace(name, nodes_[id].grad);
  return out;
}

void Tape::backward_into(Var loss, Gradient& acc, double scale) {
  run_reverse(loss);
  for (const auto& [name, id] : param_ids_) {
    const Tensor& g = nodes_[id].grad;
    auto it = acc.find(name);
    if (it == acc.end()) it = acc.emplace(name, Tensor(g.rows, g.cols)).first;
    if (!it->second.same_shape(g))
      throw std::invalid_argument("backward_into: accumulator shape mismatch for " + name);
    for (int k = 0; k < g.size(); ++k) it->second.data[k] += scale * g.data[k];
  }
}

void Tape::reset() {
  nodes_.clear();
  param_ids_.clear();
}

// ---------------------------------------------------------------------------

namespace {

void check_same_tape(Var a, Var b, const char* op) {
  if (a.tape != b.tape) throw std::invalid_argument(std::string(op) + ": vars from different tapes");
}

}  // namespace

Var matmul(Var a, Var b) {
  check_same_tape(a, b, "matmul");
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.cols != B.rows)
    throw std::invalid_argument("matmul: inner dims differ, " + A.shape_str() + " x " + B.shape_str());
  Tensor out(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      double aik = A.data[static_cast<size_t>(i) * A.cols + k];
      if (aik == 0.0) continue;
      for (int j = 0; j < B.cols; ++j)
        out.data[static_cast<size_t>(i) * B.cols + j] += aik * B.data[static_cast<size_t>(k) * B.cols + j];
    }
  Tape& t = *a.tape;
  int aid = a.id, bid = b.id;
  int id = t.emplace(std::move(out), [aid, bid](Tape& tp, int self) {
    const Tensor& G = tp.grad_ref(self);
    const Tensor& Av = tp.val(aid);
    const Tensor& Bv = tp.val(bid);
    Tensor& dA = tp.grad_ref(aid);
    Tensor& dB = tp.grad_ref(bid);
    // dA += G * B^T
    for (int i = 0; i < Av.rows; ++i)
      for (int j = 0; j < G.cols; ++j) {
        double g = G.data[static_cast<size_t>(i) * G.cols + j];
        if (g == 0.0) continue;
        for (int k = 0; k < Av.cols; ++k)
          dA.data[static_cast<size_t>(i) * Av.cols + k] += g * Bv.data[static_cast<size_t>(k) * Bv.cols + j];
      }
    // dB += A^T * G
    for (int k = 0; k < Bv.rows; ++k)
      for (int i = 0; i < Av.rows; ++i) {
        double av = Av.data[static_cast<size_t>(i) * Av.cols + k];
        if (av == 0.0) continue;
        for (int j = 0; j < G.cols; ++j)
          dB.data[static_cast<size_t>(k) * Bv.cols + j] += av * G.data[static_cast<size_t>(i) * G.cols + j];
      }
  });
  return Var{&t, id};
}

Var matmul_canonical(Var a, Var b) {
  check_same_tape(a, b, "matmul_canonical");
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.cols != B.rows)
    throw std::invalid_argument("matmul_canonical: inner dims differ, " + A.shape_str() + " x " +
                                B.shape_str());
  Tensor out(A.rows, B.cols);
  std::vector<double> scratch;
  scratch.reserve(A.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < B.cols; ++j) {
      scratch.clear();
      for (int k = 0; k < A.cols; ++k)
        scratch.push_back(A.data[static_cast<size_t>(i) * A.cols + k] *
                          B.data[static_cast<size_t>(k) * B.cols + j]);
      out.data[static_cast<size_t>(i) * B.cols + j] = sorted_sum(scratch);
    }
  Tape& t = *a.tape;
  int aid = a.id, bid = b.id;
  int id = t.emplace(std::move(out), [aid, bid](Tape& tp, int self) {
    const Tensor& G = tp.grad_ref(self);
    const Tensor& Av = tp.val(aid);
    const Tensor& Bv = tp.val(bid);
    Tensor& dA = tp.grad_ref(aid);
    Tensor& dB = tp.grad_ref(bid);
    for (int i = 0; i < Av.rows; ++i)
      for (int j = 0; j < G.cols; ++j) {
        double g = G.data[static_cast<size_t>(i) * G.cols + j];
        if (g == 0.0) continue;
        for (int k = 0; k < Av.cols; ++k) {
          dA.data[static_cast<size_t>(i) * Av.cols + k] += g * Bv.data[static_cast<size_t>(k) * Bv.cols + j];
          dB.data[static_cast<size_t>(k) * Bv.cols + j] += Av.data[static_cast<size_t>(i) * Av.cols + k] * g;
        }
      }
  });
  return Var{&t, id};
}

Var transpose(Var x) {
  const Tensor& X = x.value();
  Tensor out(X.cols, X.rows);
  for (int i = 0; i < X.rows; ++i)
    for (int j = 0; j < X.cols; ++j)
      out.data[static_cast<size_t>(j) * X.rows + i] = X.data[static_cast<size_t>(i) * X.cols + j];
  Tape& t = *x.tape;
  int xid = x.id;
  int id = t.emplace(std::move(out), [xid](Tape& tp, int self) {
    const Tensor& G = tp.grad_ref(self);
    Tensor& dX = tp.grad_ref(xid);
    for (int i = 0; i < G.rows; ++i)
      for (int j = 0; j < G.cols; ++j)
        dX.data[static_cast<size_t>(j) * G.rows + i] += G.data[static_cast<size_t>(i) * G.cols + j];
  });
  return Var{&t, id};
}

Var add(Var a, Var b) {
  check_same_tape(a, b, "add");
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (!A.same_shape(B))
    throw std::invalid_argument("add: shape mismatch " + A.shape_str() + " vs " + B.shape_str());
  Tensor out = A;
  for (int k = 0; k < out.size(); ++k) out.data[k] += B.data[k];
  Tape& t = *a.tape;
  int aid = a.id, bid = b.id;
  int id = t.emplace(std::move(out), [aid, bid](Tape& tp, int self) {
    const Tensor& G = tp.grad_ref(self);
    Tensor& dA = tp.grad_ref(aid);
    Tensor& dB = tp.grad_ref(bid);
    for (int k = 0; k < G.size(); ++k) {
      dA.data[k] += G.data[k];
      dB.data[k] += G.data[k];
    }
  });
  return Var{&t, id};
}

Var add_rowvec(Var x, Var rowvec) {
  check_same_tape(x, rowvec, "add_rowvec");
  const Tensor& X = x.value();
  const Tensor& R = rowvec.value();
  if (R.rows != 1 || R.cols != X.cols)
    throw std::invalid_argument("add_rowvec: want 1x" + std::to_string(X.cols) + ", got " + R.shape_str());
  Tensor out = X;
  for (int i = 0; i < X.rows; ++i)
    for (int j = 0; j < X.cols; ++j) out.data[static_cast<size_t>(i) * X.cols + j] += R.data[j];
  Tape& t = *x.tape;
  int xid = x.id, rid = rowvec.id;
  int id = t.emplace(std::move(out), [xid, rid](Tape& tp, int self) {
    const Tensor& G = tp.grad_ref(self);
    Tensor& dX = tp.grad_ref(xid);
    Tensor& dR = tp.grad_ref(rid);
    for (int i = 0; i < G.rows; ++i)
      for (int j = 0; j < G.cols; ++j) {
        double g = G.data[static_cast<size_t>(i) * G.cols + j];
        dX.data[static_cast<size_t>(i) * G.cols + j] += g;
        dR.data[j] += g;
      }
  });
  return Var{&t, id};
}

Var scale(Var x, double s) {
  Tensor out = x.value();
  for (double& v : out.data) v *= s;
  Tape& t = *x.tape;
  int xid = x.id;
  int id = t.emplace(std::move(out), [xid, s](Tape& tp, int self) {
    const Tensor& G = tp.grad_ref(self);
    Tensor& dX = tp.grad_ref(xid);
    for (int k = 0; k < G.size(); ++k) dX.data[k] += s * G.data[k];
  });
  return Var{&t, id};
}

Var concat_cols(const std::vector<Var>& xs) {
  if (xs.empty()) throw std::invalid_argument("concat_cols: no inputs");
  int rows = xs[0].value().rows;
  int total = 0;
  for (const Var& v : xs) {
    if (v.tape != xs[0].tape) throw std::invalid_argument("concat_cols: vars from different tapes");
    if (v.value().rows != rows)
      throw std::invalid_argument("concat_cols: row mismatch, " + std::to_string(rows) + " vs " +
                                  v.value().shape_str());
    total += v.value().cols;
  }
  Tensor out(rows, total);
  int off = 0;
  for (const Var& v : xs) {
    const Tensor& X = v.value();
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < X.cols; ++j)
        out.data[static_cast<size_t>(i) * total + off + j] = X.data[static_cast<size_t>(i) * X.cols + j];
    off += X.cols;
  }
  Tape& t = *xs[0].tape;
  std::vector<int> ids;
  std::vector<int> widths;
  for (const Var& v : xs) {
    ids.push_back(v.id);
    widths.push_back(v.value().cols);
  }
  int id = t.emplace(std::move(out), [ids, widths, rows, total](Tape& tp, int self) {
    const Tensor& G = tp.grad_ref(self);
    int off = 0;
    for (size_t k = 0; k < ids.size(); ++k) {
      Tensor& dX = tp.grad_ref(ids[k]);
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < widths[k]; ++j)
          dX.data[static_cast<size_t>(i) * widths[k] + j] += G.data[static_cast<size_t>(i) * total + off + j];
      off += widths[k];
    }
  });
  return Var{&t, id};
}

Var slice_rows(Var x, int first_row, int n_rows) {
  const Tensor& X = x.value();
  if (first_row < 0 || n_rows < 0 || first_row + n_rows > X.rows)
    throw std::out_of_range("slice_rows: [" + std::to_string(first_row) + ", " +
                            std::to_string(first_row + n_rows) + ") outside " + X.shape_str());
  Tensor out(n_rows, X.cols);
  std::copy(X.data.begin() + static_cast<size_t>(first_row) * X.cols,
            X.data.begin() + static_cast<size_t>(first_row + n_rows) * X.cols, out.data.begin());
  Tape& t = *x.tape;
  int xid = x.id, cols = X.cols;
  int id = t.emplace(std::move(out), [xid, first_row, n_rows, cols](Tape& tp, int self) {
    const Tensor& G = tp.grad_ref(self);
    Tensor& dX = tp.grad_ref(xid);
    for (int i = 0; i < n_rows; ++i)
      for (int j = 0; j < cols; ++j)
        dX.data[static_cast<size_t>(first_row + i) * cols + j] += G.data[static_cast<size_t>(i) * cols + j];
  });
  return Var{&t, id};
}

Var mask_rows(Var x, const SeqMask& keep) {
  const Tensor& X = x.value();
  if (static_cast<int>(keep.size()) != X.rows)
    throw std::invalid_argument("mask_rows: mask size " + std::to_string(keep.size()) +
                                " vs rows " + std::to_string(X.rows));
  Tensor out = X;
  for (int i = 0; i < X.rows; ++i)
    if (!keep[i])
      std::fill(out.data.begin() + static_cast<size_t>(i) * X.cols,
                out.data.begin() + static_cast<size_t>(i + 1) * X.cols, 0.0);
  Tape& t = *x.tape;
  int xid = x.id, cols = X.cols;
  SeqMask keep_copy = keep;
  int id = t.emplace(std::move(out), [xid, cols, keep_copy](Tape& tp, int self) {
    const Tensor& G = tp.grad_ref(self);
    Tensor& dX = tp.grad_ref(xid);
    for (int i = 0; i < G.rows; ++i) {
      if (!keep_copy[i]) continue;
      for (int j = 0; j < cols; ++j)
        dX.data[static_cast<size_t>(i) * cols + j] += G.data[static_cast<size_t>(i) * cols + j];
    }
  });
  return Var{&t, id};
}

Var flatten_row(Var x) {
  const Tensor& X = x.value();
  Tensor out(1, X.size());
  out.data = X.data;
  Tape& t = *x.tape;
  int xid = x.id;
  int id = t.emplace(std::move(out), [xid](Tape& tp, int self) {
    const Tensor& G = tp.grad_ref(self);
    Tensor& dX = tp.grad_ref(xid);
    for (int k = 0; k < G.size(); ++k) dX.data[k] += G.data[k];
  });
  return Var{&t, id};
}

Var embed_rows(Var table, const std::vector<int>& ids) {
  const Tensor& T = table.value();
  Tensor out(static_cast<int>(ids.size()), T.cols);
  for (size_t i = 0; i < ids.size(); ++i) {
    int r = ids[i];
    if (r < 0 || r >= T.rows)
      throw std::out_of_range("embed_rows: id " + std::to_string(r) + " outside table with " +
                              std::to_string(T.rows) + " rows");
    std::copy(T.data.begin() + static_cast<size_t>(r) * T.cols,
              T.data.begin() + static_cast<size_t>(r + 1) * T.cols,
              out.data.begin() + i * T.cols);
  }
  Tape& t = *table.tape;
  int tid = table.id, cols = T.cols;
  std::vector<int> ids_copy = ids;
  int id = t.emplace(std::move(out), [tid, cols, ids_copy](Tape& tp, int self) {
    const Tensor& G = tp.grad_ref(self);
    Tensor& dT = tp.grad_ref(tid);
    for (size_t i = 0; i < ids_copy.size(); ++i)
      for (int j = 0; j < cols; ++j)
        dT.data[static_cast<size_t>(ids_copy[i]) * cols + j] += G.data[i * static_cast<size_t>(cols) + j];
  });
  return Var{&t, id};
}

Var softmax_rows(Var x, const MaskMatrix* mask) {
  const Tensor& X = x.value();
  if (mask && (mask->rows != X.rows || mask->cols != X.cols))
    throw std::invalid_argument("softmax_rows: mask shape mismatch");
  Tensor out(X.rows, X.cols);
  std::vector<double> terms;
  terms.reserve(X.cols);
  for (int i = 0; i < X.rows; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < X.cols; ++j)
      if (!mask || mask->at(i, j)) mx = std::max(mx, X.data[static_cast<size_t>(i) * X.cols + j]);
    if (mx == -std::numeric_limits<double>::infinity())
      throw std::runtime_error("softmax_rows: row " + std::to_string(i) + " fully masked");
    terms.clear();
    for (int j = 0; j < X.cols; ++j) {
      double e = (!mask || mask->at(i, j)) ? std::exp(X.data[static_cast<size_t>(i) * X.cols + j] - mx) : 0.0;
      out.data[static_cast<size_t>(i) * X.cols + j] = e;
      if (!mask || mask->at(i, j)) terms.push_back(e);
    }
    double denom = sorted_sum(terms);
    for (int j = 0; j < X.cols; ++j) out.data[static_cast<size_t>(i) * X.cols + j] /= denom;
  }
  Tape& t = *x.tape;
  int xid = x.id;
  int id = t.emplace(std::move(out), [xid](Tape& tp, int self) {
    const Tensor& G = tp.grad_ref(self);
    const Tensor& Y = tp.val(self);
    Tensor& dX = tp.grad_ref(xid);
    for (int i = 0; i < Y.rows; ++i) {
      double dot = 0.0;
      for (int j = 0; j < Y.cols; ++j)
        dot += G.data[static_cast<size_t>(i) * Y.cols + j] * Y.data[static_cast<size_t>(i) * Y.cols + j];
      for (int j = 0; j < Y.cols; ++j) {
        size_t k = static_cast<size_t>(i) * Y.cols + j;
        dX.data[k] += Y.data[k] * (G.data[k] - dot);
      }
    }
  });
  return Var{&t, id};
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  check_same_tape(x, gain, "layer_norm");
  check_same_tape(x, bias, "layer_norm");
  const Tensor& X = x.value();
  const Tensor& Gn = gain.value();
  const Tensor& Bn = bias.value();
  if (eps <= 0.0) throw std::invalid_argument("layer_norm: eps must be positive");
  if (Gn.rows != 1 || Gn.cols != X.cols || Bn.rows != 1 || Bn.cols != X.cols)
    throw std::invalid_argument("layer_norm: gain/bias must be 1x" + std::to_string(X.cols));
  Tensor out(X.rows, X.cols);
  Tensor xhat(X.rows, X.cols);
  std::vector<double> inv_s(X.rows);
  for (int i = 0; i < X.rows; ++i) {
    double m = 0.0;
    for (int j = 0; j < X.cols; ++j) m += X.data[static_cast<size_t>(i) * X.cols + j];
    m /= X.cols;
    double v = 0.0;
    for (int j = 0; j < X.cols; ++j) {
      double d = X.data[static_cast<size_t>(i) * X.cols + j] - m;
      v += d * d;
    }
    v /= X.cols;
    double s = std::sqrt(v + eps);
    inv_s[i] = 1.0 / s;
    for (int j = 0; j < X.cols; ++j) {
      size_t k = static_cast<size_t>(i) * X.cols + j;
      xhat.data[k] = (X.data[k] - m) * inv_s[i];
      out.data[k] = Gn.data[j] * xhat.data[k] + Bn.data[j];
    }
  }
  Tape& t = *x.tape;
  int xid = x.id, gid = gain.id, bid = bias.id;
  int id = t.emplace(std::move(out), [xid, gid, bid, xhat, inv_s](Tape& tp, int self) {
    const Tensor& G = tp.grad_ref(self);
    const Tensor& Gn = tp.val(gid);
    Tensor& dX = tp.grad_ref(xid);
    Tensor& dGain = tp.grad_ref(gid);
    Tensor& dBias = tp.grad_ref(bid);
    int cols = G.cols;
    for (int i = 0; i < G.rows; ++i) {
      double mean_h = 0.0, mean_hx = 0.0;
      for (int j = 0; j < cols; ++j) {
        size_t k = static_cast<size_t>(i) * cols + j;
        double h = Gn.data[j] * G.data[k];
        mean_h += h;
        mean_hx += h * xhat.data[k];
      }
      mean_h /= cols;
      mean_hx /= cols;
      for (int j = 0; j < cols; ++j) {
        size_t k = static_cast<size_t>(i) * cols + j;
        double h = Gn.data[j] * G.data[k];
        dX.data[k] += (h - mean_h - xhat.data[k] * mean_hx) * inv_s[i];
        dGain.data[j] += G.data[k] * xhat.data[k];
        dBias.data[j] += G.data[k];
      }
    }
  });
  return Var{&t, id};
}

Var leaky_relu(Var x, double slope) {
  const Tensor& X = x.value();
  Tensor out = X;
  for (double& v : out.data)
    if (v < 0.0) v *= slope;
  Tape& t = *x.tape;
  int xid = x.id;
  int id = t.emplace(std::move(out), [xid, slope](Tape& tp, int self) {
    const Tensor& G = tp.grad_ref(self);
    const Tensor& X = tp.val(xid);
    Tensor& dX = tp.grad_ref(xid);
    for (int k = 0; k < G.size(); ++k)
      dX.data[k] += (X.data[k] >= 0.0 ? 1.0 : slope) * G.data[k];
  });
  return Var{&t, id};
}

Var dropout(Var x, double rate, Mode mode, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0)
    throw std::invalid_argument("dropout: rate must be in [0, 1), got " + std::to_string(rate));
  if (mode == Mode::kEval || rate == 0.0) return x;  // exact identity
  const Tensor& X = x.value();
  double keep_scale = 1.0 / (1.0 - rate);
  std::bernoulli_distribution keep(1.0 - rate);
  std::vector<double> factor(static_cast<size_t>(X.size()));
  Tensor out(X.rows, X.cols);
  for (int k = 0; k < X.size(); ++k) {
    factor[k] = keep(rng) ? keep_scale : 0.0;
    out.data[k] = factor[k] * X.data[k];
  }
  Tape& t = *x.tape;
  int xid = x.id;
  int id = t.emplace(std::move(out), [xid, factor](Tape& tp, int self) {
    const Tensor& G = tp.grad_ref(self);
    Tensor& dX = tp.grad_ref(xid);
    for (int k = 0; k < G.size(); ++k) dX.data[k] += factor[k] * G.data[k];
  });
  return Var{&t, id};
}

Var sigmoid(Var x) {
  const Tensor& X = x.value();
  Tensor out(X.rows, X.cols);
  for (int k = 0; k < X.size(); ++k) out.data[k] = stable_sigmoid(X.data[k]);
  Tape& t = *x.tape;
  int xid = x.id;
  int id = t.emplace(std::move(out), [xid](Tape& tp, int self) {
    const Tensor& G = tp.grad_ref(self);
    const Tensor& Y = tp.val(self);
    Tensor& dX = tp.grad_ref(xid);
    for (int k = 0; k < G.size(); ++k) dX.data[k] += Y.data[k] * (1.0 - Y.data[k]) * G.data[k];
  });
  return Var{&t, id};
}

Var sum_all(Var x) {
  const Tensor& X = x.value();
  Tensor out(1, 1);
  for (double v : X.data) out.data[0] += v;
  Tape& t = *x.tape;
  int xid = x.id;
  int id = t.emplace(std::move(out), [xid](Tape& tp, int self) {
    double g = tp.grad_ref(self).data[0];
    Tensor& dX = tp.grad_ref(xid);
    for (double& v : dX.data) v += g;
  });
  return Var{&t, id};
}

Var bce_loss(Var probs, const std::vector<int>& labels) {
  const Tensor& P = probs.value();
  if (static_cast<int>(labels.size()) != P.size())
    throw std::invalid_argument("bce_loss: " + std::to_string(labels.size()) + " labels for " +
                                P.shape_str() + " probs");
  for (int y : labels)
    if (y != 0 && y != 1) throw std::invalid_argument("bce_loss: labels must be 0 or 1");
  const double lo = 1e-12, hi = 1.0 - 1e-12;
  int n = P.size();
  Tensor out(1, 1);
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    double p = std::clamp(P.data[k], lo, hi);
    acc += labels[k] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  out.data[0] = -acc / n;
  Tape& t = *probs.tape;
  int pid = probs.id;
  std::vector<int> labels_copy = labels;
  int id = t.emplace(std::move(out), [pid, labels_copy, lo, hi, n](Tape& tp, int self) {
    double g = tp.grad_ref(self).data[0];
    const Tensor& P = tp.val(pid);
    Tensor& dP = tp.grad_ref(pid);
    for (int k = 0; k < n; ++k) {
      double p = std::clamp(P.data[k], lo, hi);
      double d = labels_copy[k] == 1 ? -1.0 / p : 1.0 / (1.0 - p);
      dP.data[k] += g * d / n;
    }
  });
  return Var{&t, id};
}

}  // namespace bst
