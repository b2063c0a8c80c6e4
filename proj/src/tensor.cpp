#include "bst/tensor.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bst {

Tensor::Tensor(int r, int c, double fill) : rows(r), cols(c) {
  if (r < 0 || c < 0) {
    throw std::invalid_argument("Tensor: negative shape " + std::to_string(r) + "x" +
                                std::to_string(c));
  }
  data.assign(static_cast<size_t>(r) * static_cast<size_t>(c), fill);
}

Tensor Tensor::row(std::vector<double> values) {
  Tensor t;
  t.rows = 1;
  t.cols = static_cast<int>(values.size());
  t.data = std::move(values);
  return t;
}

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& values) {
  Tensor t(static_cast<int>(values.size()),
           values.empty() ? 0 : static_cast<int>(values[0].size()));
  for (int i = 0; i < t.rows; ++i) {
    if (static_cast<int>(values[i].size()) != t.cols) {
      throw std::invalid_argument("Tensor::from_rows: ragged rows");
    }
    for (int j = 0; j < t.cols; ++j) t.at(i, j) = values[i][j];
  }
  return t;
}

bool Tensor::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << rows << "x" << cols;
  return os.str();
}

double sorted_sum(std::vector<double>& scratch) {
  std::sort(scratch.begin(), scratch.end());
  double s = 0.0;
  for (double v : scratch) s += v;
  return s;
}

double stable_sigmoid(double x) {
  double y;
  if (x >= 0.0) {
    y = 1.0 / (1.0 + std::exp(-x));
  } else {
    double e = std::exp(x);
    y = e / (1.0 + e);
  }
  const double lo = std::numeric_limits<double>::denorm_min();
  const double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;  // largest double < 1
  return std::clamp(y, lo, hi);
}

}  // namespace bst
