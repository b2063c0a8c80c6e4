#include "bst/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace bst {

namespace {

double eval_loss(const ForwardFn& fn, const NamedTensors& params) {
  Tape tape;
  Var loss = fn(tape, params);
  const Tensor& v = loss.value();
  if (v.rows != 1 || v.cols != 1)
    throw std::invalid_argument("grad_check: forward must produce a 1x1 loss, got " + v.shape_str());
  return v.data[0];
}

}  // namespace

GradcheckReport grad_check(const ForwardFn& fn, const NamedTensors& params, double step) {
  if (step <= 0.0) throw std::invalid_argument("grad_check: step must be positive");
  GradcheckReport report;
  if (params.empty()) return report;

  Tape tape;
  Var loss = fn(tape, params);
  if (loss.rows() != 1 || loss.cols() != 1)
    throw std::invalid_argument("grad_check: forward must produce a 1x1 loss");
  Gradient analytic = tape.backward(loss);

  NamedTensors probe = params;
  const Tensor no_grad;
  for (const auto& [name, tensor] : params) {
    // params the forward never registers have an all-zero gradient
    auto found = analytic.find(name);
    const Tensor& g = found == analytic.end() ? no_grad : found->second;
    for (int k = 0; k < tensor.size(); ++k) {
      double saved = probe.at(name).data[k];
      probe.at(name).data[k] = saved + step;
      double up = eval_loss(fn, probe);
      probe.at(name).data[k] = saved - step;
      double down = eval_loss(fn, probe);
      probe.at(name).data[k] = saved;

      double numeric = (up - down) / (2.0 * step);
      double a = g.size() > 0 ? g.data[k] : 0.0;
      // absolute agreement below 1e-8 passes outright; otherwise judge the
      // relative error (guards against FD cancellation noise on near-zero
      // gradients, where the quotient explodes without a real defect)
      double abs_err = std::abs(a - numeric);
      double err = abs_err < 1e-8 ? abs_err : abs_err / std::max(std::abs(a), std::abs(numeric));
      ++report.n_checked;
      if (err > report.max_err) {
        report.max_err = err;
        report.worst = GradcheckEntry{name, k, a, numeric, err};
      }
    }
  }
  return report;
}

}  // namespace bst
