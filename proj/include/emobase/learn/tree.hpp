#pragma once

#include "emobase/learn/samples.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace emobase::learn {

// 1 - sum p_k^2 over the class proportions. Throws ValueError when the
// counts are all zero or any is negative.
double gini_impurity(std::span<const double> class_counts);

struct TreeParams {
  std::size_t min_leaf = 5;    // minimum (weighted) samples on each side of a split
  std::size_t max_depth = 30;  // 0 = unlimited
  std::size_t mtry = 0;        // features tried per split; 0 = all
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  double weight = 0.0;    // training samples reaching the node (bootstrap-weighted)
  double decrease = 0.0;  // weight-scaled Gini decrease of the split
  std::vector<double> distribution;  // leaves only; sums to 1

  bool is_leaf() const { return feature < 0; }
};

// CART classification tree grown greedily on Gini decrease. Candidate
// thresholds are midpoints between consecutive distinct values.
struct TreeModel {
  std::vector<int> classes;  // sorted label codes; distribution is indexed by position
  std::size_t n_features = 0;
  TreeParams params;
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(std::span<const double> x) const;
  // Class position with the largest leaf probability, lowest position on ties.
  std::size_t predict_index(std::span<const double> x) const;
  int predict(std::span<const double> x) const;
  std::size_t depth() const;
  std::size_t leaf_count() const;
};

TreeModel train_tree(const Samples& data, const TreeParams& params = {}, std::uint64_t seed = 0);

}  // namespace emobase::learn
