#pragma once

#include <functional>
#include <string>

#include "bst/graph.hpp"

namespace bst {

// Builds a scalar loss on the tape from the given parameters. Must register
// every parameter through tape.param so perturbed values flow in.
using ForwardFn = std::function<Var(Tape&, const NamedTensors&)>;

struct GradcheckEntry {
  std::string name;
  int index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
  double err = 0.0;  // relative, or absolute when both magnitudes are tiny
};

struct GradcheckReport {
  int n_checked = 0;
  double max_err = 0.0;
  GradcheckEntry worst;
  bool pass(double tol) const { return max_err < tol; }
};

// Central finite differences, one probe per parameter entry. An entry's error
// is the absolute difference |analytic-numeric| when that difference is below
// 1e-8 (agreement at machine-noise scale), else the relative error
// |analytic-numeric| / max(|analytic|,|numeric|).
GradcheckReport grad_check(const ForwardFn& fn, const NamedTensors& params, double step);

}  // namespace bst
