#include "emobase/eval/confusion.hpp"

#include "emobase/errors.hpp"

#include <algorithm>
#include <string>

namespace emobase::eval {

ConfusionMatrix::ConfusionMatrix(std::vector<int> labels) : labels_(std::move(labels)) {
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
  counts_.assign(labels_.size(), std::vector<std::size_t>(labels_.size(), 0));
}

std::size_t ConfusionMatrix::index_of(int label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) {
    throw ValueError("label " + std::to_string(label) + " is not in the confusion matrix");
  }
  return static_cast<std::size_t>(it - labels_.begin());
}

void ConfusionMatrix::add(int predicted, int actual, std::size_t n) {
  counts_[index_of(predicted)][index_of(actual)] += n;
}

std::size_t ConfusionMatrix::column_total(std::size_t actual) const {
  std::size_t s = 0;
  for (const auto& row : counts_) s += row[actual];
  return s;
}

std::size_t ConfusionMatrix::row_total(std::size_t predicted) const {
  std::size_t s = 0;
  for (auto c : counts_[predicted]) s += c;
  return s;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t s = 0;
  for (std::size_t r = 0; r < counts_.size(); ++r) s += row_total(r);
  return s;
}

std::size_t ConfusionMatrix::correct() const {
  std::size_t s = 0;
  for (std::size_t k = 0; k < counts_.size(); ++k) s += counts_[k][k];
  return s;
}

double ConfusionMatrix::class_error(std::size_t actual) const {
  const auto col = column_total(actual);
  if (col == 0) return 0.0;
  return 1.0 - static_cast<double>(counts_[actual][actual]) / static_cast<double>(col);
}

double ConfusionMatrix::error() const {
  const auto t = total();
  if (t == 0) return 0.0;
  return 1.0 - static_cast<double>(correct()) / static_cast<double>(t);
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  for (std::size_t p = 0; p < other.labels_.size(); ++p) {
    for (std::size_t a = 0; a < other.labels_.size(); ++a) {
      counts_[index_of(other.labels_[p])][index_of(other.labels_[a])] += other.counts_[p][a];
    }
  }
}

ConfusionMatrix confusion_from(std::span<const int> predicted, std::span<const int> actual) {
  if (predicted.size() != actual.size()) throw ValueError("prediction and label counts differ");
  std::vector<int> labels(actual.begin(), actual.end());
  labels.insert(labels.end(), predicted.begin(), predicted.end());
  ConfusionMatrix m(std::move(labels));
  for (std::size_t i = 0; i < actual.size(); ++i) m.add(predicted[i], actual[i]);
  return m;
}

}  // namespace emobase::eval
