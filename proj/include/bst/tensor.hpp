#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace bst {

// Dense row-major matrix of doubles. Rank-2 is all the model math needs;
// vectors are 1xN or Nx1.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int r, int c, double fill = 0.0);

  static Tensor row(std::vector<double> values);
  static Tensor from_rows(const std::vector<std::vector<double>>& values);

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

  int size() const { return rows * cols; }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
  bool all_finite() const;
  std::string shape_str() const;

  bool operator==(const Tensor&) const = default;  // bitwise, shape included
};

// Sums the values in a canonical (value-sorted) order, so the result does not
// depend on the order the inputs were produced in. Used where bitwise
// permutation invariance is required.
double sorted_sum(std::vector<double>& scratch);

// Overflow-safe logistic, clamped so the result is strictly inside (0, 1)
// even for huge |x|.
double stable_sigmoid(double x);

}  // namespace bst
