#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace emobase::eval {

// counts[predicted][actual] over a fixed, sorted label set. Column totals
// are the per-class instance counts.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<int> labels);

  void add(int predicted, int actual, std::size_t n = 1);

  const std::vector<int>& labels() const { return labels_; }
  std::size_t count(std::size_t predicted, std::size_t actual) const {
    return counts_[predicted][actual];
  }
  const std::vector<std::vector<std::size_t>>& counts() const { return counts_; }

  std::size_t column_total(std::size_t actual) const;
  std::size_t row_total(std::size_t predicted) const;
  std::size_t total() const;
  std::size_t correct() const;

  // 1 - diagonal / column total; 0 for a class with no instances.
  double class_error(std::size_t actual) const;
  // Pooled misclassification rate.
  double error() const;

  void merge(const ConfusionMatrix& other);

 private:
  std::size_t index_of(int label) const;

  std::vector<int> labels_;
  std::vector<std::vector<std::size_t>> counts_;
};

ConfusionMatrix confusion_from(std::span<const int> predicted, std::span<const int> actual);

}  // namespace emobase::eval
