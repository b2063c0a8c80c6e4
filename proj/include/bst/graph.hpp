#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "bst/rng.hpp"
#include "bst/tensor.hpp"

namespace bst {

enum class Mode { kTrain, kEval };

// Per-parameter gradients, keyed by the name the parameter was registered
// under. Shapes always match the parameter shapes.
using Gradient = std::map<std::string, Tensor>;

// Named parameter collection; also used for model params and checkpoints.
using NamedTensors = std::map<std::string, Tensor>;

// Boolean mask with the same shape as the tensor it applies to.
struct MaskMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> on;

  MaskMatrix() = default;
  MaskMatrix(int r, int c, bool fill = true)
      : rows(r), cols(c), on(static_cast<size_t>(r) * c, fill ? 1 : 0) {}
  bool at(int r, int c) const { return on[static_cast<size_t>(r) * cols + c] != 0; }
  void set(int r, int c, bool v) { on[static_cast<size_t>(r) * cols + c] = v ? 1 : 0; }
};

// Per-slot mask for a sequence; true marks a real (non-padding) slot.
using SeqMask = std::vector<std::uint8_t>;

class Tape;

// Handle to a node on a tape. Cheap to copy; valid until the tape is reset.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Tensor& value() const;
  int rows() const { return value().rows; }
  int cols() const { return value().cols; }
};

// Records a forward computation as it runs; reverse sweep produces exact
// gradients for every parameter registered by name. Creation order is a
// topological order, so backward is a single reverse pass.
class Tape {
 public:
  using PullFn = std::function<void(Tape&, int self)>;

  Var constant(Tensor value);
  // Registers (or re-fetches) a parameter leaf. Repeated registration under
  // the same name returns the same node.
  Var param(const std::string& name, const Tensor& value);

  Gradient backward(Var loss);
  // Accumulates scale * grad into acc (which must already hold zero tensors
  // of the right shapes, or be empty). Avoids per-call map churn in training.
  void backward_into(Var loss, Gradient& acc, double scale);

  void reset();
  int node_count() const { return static_cast<int>(nodes_.size()); }

  // Node access for operation implementations.
  int emplace(Tensor value, PullFn pull);
  const Tensor& val(int id) const { return nodes_[id].value; }
  Tensor& grad_ref(int id) { return nodes_[id].grad; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    PullFn pull;  // null for leaves
  };
  // deque: references from val()/grad_ref() stay valid as the tape grows
  std::deque<Node> nodes_;
  std::map<std::string, int> param_ids_;

  void run_reverse(Var loss);
};

// --- forward operations (each returns a new node with its backward rule) ---

Var matmul(Var a, Var b);
// Same product, but each output entry sums its terms in value-sorted order,
// making the result invariant to permutations of the contraction axis.
Var matmul_canonical(Var a, Var b);
Var transpose(Var x);
Var add(Var a, Var b);
Var add_rowvec(Var x, Var rowvec);
Var scale(Var x, double s);
Var concat_cols(const std::vector<Var>& xs);
Var slice_rows(Var x, int first_row, int n_rows);
Var mask_rows(Var x, const SeqMask& keep);
Var flatten_row(Var x);
Var embed_rows(Var table, const std::vector<int>& ids);
Var softmax_rows(Var x, const MaskMatrix* mask = nullptr);
Var layer_norm(Var x, Var gain, Var bias, double eps);
Var leaky_relu(Var x, double slope);
Var dropout(Var x, double rate, Mode mode, Rng& rng);
Var sigmoid(Var x);
Var sum_all(Var x);
Var bce_loss(Var probs, const std::vector<int>& labels);

}  // namespace bst
