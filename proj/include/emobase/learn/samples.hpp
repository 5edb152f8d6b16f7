#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace emobase::learn {

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  void append_row(std::span<const double> values);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Training data handed to every classifier: features, integer class labels
// (emotion codes, or 0/1 for the binary setup), and column names.
struct Samples {
  Matrix x;
  std::vector<int> y;
  std::vector<std::string> feature_names;

  std::size_t size() const { return y.size(); }
  std::size_t dimension() const { return x.cols(); }

  Samples subset(std::span<const std::size_t> rows) const;
};

// Sorted distinct labels.
std::vector<int> distinct_labels(std::span<const int> y);

// Position of `label` in a sorted label list, or -1.
int class_index(std::span<const int> classes, int label);

// Column means and sample standard deviations (1 where degenerate); used by
// the classifiers that standardize internally.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const Matrix& x);
  std::vector<double> apply(std::span<const double> row) const;
  Matrix apply(const Matrix& x) const;
};

}  // namespace emobase::learn
