#pragma once

#include "emobase/learn/tree.hpp"

#include <optional>
#include <string>

namespace emobase::learn {

struct ForestParams {
  std::size_t n_trees = 500;
  std::size_t mtry = 0;       // 0 = floor(sqrt(#features))
  std::size_t min_leaf = 1;
  std::size_t max_depth = 0;  // unlimited
  unsigned threads = 0;       // 0 = hardware concurrency; results do not depend on it
};

struct ForestModel {
  std::vector<TreeModel> trees;
  std::vector<int> classes;
  std::vector<std::string> feature_names;
  std::size_t n_features = 0;
  std::size_t mtry = 0;
  std::uint64_t seed = 0;
  // Bootstrap multiplicity of every training row, per tree. Zero = out of bag.
  std::vector<std::vector<std::uint8_t>> in_bag;
  // Majority vote over the trees for which the row was out of bag; empty
  // when the row was in every bootstrap sample.
  std::vector<std::optional<int>> oob_predictions;
  double oob_error = 0.0;
  // Mean over trees of the total Gini decrease attributed to each feature.
  std::vector<double> importance;

  std::size_t n_trees() const { return trees.size(); }
  std::vector<std::size_t> votes(std::span<const double> x) const;
  // Majority vote; ties go to the lowest label code.
  int predict(std::span<const double> x) const;
};

ForestModel train_forest(const Samples& data, const ForestParams& params, std::uint64_t seed);

struct ImportanceEntry {
  std::string feature;
  std::size_t column = 0;
  double score = 0.0;
};

// Features ordered by mean Gini decrease, most important first.
std::vector<ImportanceEntry> variable_importance(const ForestModel& model);

}  // namespace emobase::learn
