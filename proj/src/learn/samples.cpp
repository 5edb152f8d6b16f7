#include "emobase/learn/samples.hpp"

#include "emobase/errors.hpp"

#include <algorithm>
#include <cmath>

namespace emobase::learn {

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) throw ValueError("row width does not match matrix");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

Samples Samples::subset(std::span<const std::size_t> rows) const {
  Samples out;
  out.feature_names = feature_names;
  out.x = Matrix(rows.size(), x.cols());
  out.y.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = x.row(rows[i]);
    std::copy(src.begin(), src.end(), out.x.row(i).begin());
    out.y.push_back(y[rows[i]]);
  }
  return out;
}

std::vector<int> distinct_labels(std::span<const int> y) {
  std::vector<int> out(y.begin(), y.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int class_index(std::span<const int> classes, int label) {
  auto it = std::lower_bound(classes.begin(), classes.end(), label);
  if (it == classes.end() || *it != label) return -1;
  return static_cast<int>(it - classes.begin());
}

Standardizer Standardizer::fit(const Matrix& x) {
  Standardizer s;
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  s.mean.assign(p, 0.0);
  s.scale.assign(p, 1.0);
  if (n == 0) return s;
  for (std::size_t j = 0; j < p; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += x(i, j);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (x(i, j) - mean) * (x(i, j) - mean);
    const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    s.mean[j] = mean;
    s.scale[j] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
  if (row.size() != mean.size()) throw PredictError("feature vector has wrong dimension");
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / scale[j];
  return out;
}

Matrix Standardizer::apply(const Matrix& x) const {
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = (x(i, j) - mean[j]) / scale[j];
  }
  return out;
}

}  // namespace emobase::learn
