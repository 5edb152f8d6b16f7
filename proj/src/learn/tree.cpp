#include "tree_builder.hpp"

#include "emobase/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace emobase::learn {

double gini_impurity(std::span<const double> class_counts) {
  double total = 0.0;
  for (double c : class_counts) {
    if (c < 0.0 || !std::isfinite(c)) throw ValueError("class counts must be finite and >= 0");
    total += c;
  }
  if (total <= 0.0) throw ValueError("gini impurity of an empty node");
  double sum_sq = 0.0;
  for (double c : class_counts) {
    const double p = c / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

const TreeNode& TreeModel::leaf_for(std::span<const double> x) const {
  if (x.size() != n_features) throw PredictError("feature vector has wrong dimension");
  std::size_t id = 0;
  while (!nodes[id].is_leaf()) {
    const auto& node = nodes[id];
    id = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold
                                      ? node.left
                                      : node.right);
  }
  return nodes[id];
}

std::size_t TreeModel::predict_index(std::span<const double> x) const {
  const auto& dist = leaf_for(x).distribution;
  std::size_t best = 0;
  for (std::size_t k = 1; k < dist.size(); ++k) {
    if (dist[k] > dist[best]) best = k;
  }
  return best;
}

int TreeModel::predict(std::span<const double> x) const { return classes[predict_index(x)]; }

std::size_t TreeModel::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t max_d = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    max_d = std::max(max_d, d[i]);
    if (!nodes[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return max_d;
}

std::size_t TreeModel::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

namespace detail {

PresortedData PresortedData::build(const Samples& data, std::span<const int> classes) {
  PresortedData p;
  p.x = &data.x;
  p.n_classes = classes.size();
  p.cls.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    p.cls[i] = static_cast<std::size_t>(class_index(classes, data.y[i]));
  }
  const std::size_t n = data.size();
  p.order.resize(data.dimension());
  for (std::size_t f = 0; f < data.dimension(); ++f) {
    auto& ord = p.order[f];
    ord.resize(n);
    std::iota(ord.begin(), ord.end(), 0U);
    std::stable_sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) {
      return data.x(a, f) < data.x(b, f);
    });
  }
  return p;
}

namespace {

struct PendingNode {
  std::size_t id;
  std::size_t begin;
  std::size_t end;
  std::size_t depth;
};

}  // namespace

TreeModel grow_tree(const PresortedData& data, std::span<const std::uint8_t> weights,
                    const TreeParams& params, std::size_t mtry, Rng& rng,
                    const std::vector<int>& classes) {
  const Matrix& x = *data.x;
  const std::size_t p = x.cols();
  const std::size_t k_classes = data.n_classes;

  TreeModel tree;
  tree.classes = classes;
  tree.n_features = p;
  tree.params = params;

  // Per-feature lists of the in-bag rows, laid out contiguously: the rows of
  // any node occupy the same [begin, end) range in every feature's list.
  std::size_t m = 0;
  for (auto w : weights) m += (w > 0);
  if (m == 0) throw TrainError("tree has no training rows");
  std::vector<std::uint32_t> lists(p * m);
  for (std::size_t f = 0; f < p; ++f) {
    std::size_t pos = 0;
    for (auto r : data.order[f]) {
      if (weights[r] > 0) lists[f * m + pos++] = r;
    }
  }
  std::vector<std::uint8_t> goes_left(x.rows(), 0);
  std::vector<std::uint32_t> scratch(m);
  std::vector<double> counts(k_classes);
  std::vector<double> left_counts(k_classes);

  const double min_leaf = static_cast<double>(std::max<std::size_t>(params.min_leaf, 1));
  tree.nodes.emplace_back();
  std::vector<PendingNode> stack{{0, 0, m, 0}};

  while (!stack.empty()) {
    const PendingNode cur = stack.back();
    stack.pop_back();

    std::fill(counts.begin(), counts.end(), 0.0);
    double total = 0.0;
    for (std::size_t pos = cur.begin; pos < cur.end; ++pos) {
      const auto r = lists[pos];
      counts[data.cls[r]] += weights[r];
      total += weights[r];
    }
    tree.nodes[cur.id].weight = total;

    auto make_leaf = [&] {
      auto& node = tree.nodes[cur.id];
      node.distribution.resize(k_classes);
      for (std::size_t k = 0; k < k_classes; ++k) node.distribution[k] = counts[k] / total;
    };

    const std::size_t nonzero = static_cast<std::size_t>(
        std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }));
    const bool depth_reached = params.max_depth > 0 && cur.depth >= params.max_depth;
    if (nonzero <= 1 || depth_reached || total < 2.0 * min_leaf) {
      make_leaf();
      continue;
    }

    double parent_sq = 0.0;
    for (double c : counts) parent_sq += c * c;
    parent_sq /= total;

    std::vector<std::size_t> candidates;
    if (mtry >= p) {
      candidates.resize(p);
      std::iota(candidates.begin(), candidates.end(), 0U);
    } else {
      candidates = rng.sample_without_replacement(p, mtry);
    }

    double best_score = parent_sq;
    int best_feature = -1;
    double best_threshold = 0.0;
    for (auto f : candidates) {
      const std::uint32_t* list = lists.data() + f * m;
      std::fill(left_counts.begin(), left_counts.end(), 0.0);
      double left_total = 0.0;
      for (std::size_t pos = cur.begin; pos + 1 < cur.end; ++pos) {
        const auto r = list[pos];
        left_counts[data.cls[r]] += weights[r];
        left_total += weights[r];
        const double v = x(r, f);
        const double v_next = x(list[pos + 1], f);
        if (!(v < v_next)) continue;
        const double right_total = total - left_total;
        if (left_total < min_leaf) continue;
        if (right_total < min_leaf) break;
        double l_sq = 0.0;
        double r_sq = 0.0;
        for (std::size_t k = 0; k < k_classes; ++k) {
          const double rc = counts[k] - left_counts[k];
          l_sq += left_counts[k] * left_counts[k];
          r_sq += rc * rc;
        }
        const double score = l_sq / left_total + r_sq / right_total;
        if (score > best_score) {
          best_score = score;
          best_feature = static_cast<int>(f);
          double mid = v + (v_next - v) / 2.0;
          if (!(mid < v_next)) mid = v;
          best_threshold = mid;
        }
      }
    }

    const double decrease = best_score - parent_sq;
    if (best_feature < 0 || !(decrease > 1e-12)) {
      make_leaf();
      continue;
    }

    const auto f_best = static_cast<std::size_t>(best_feature);
    std::size_t n_left = 0;
    for (std::size_t pos = cur.begin; pos < cur.end; ++pos) {
      const auto r = lists[f_best * m + pos];
      const bool left = x(r, f_best) <= best_threshold;
      goes_left[r] = left ? 1 : 0;
      n_left += left;
    }
    for (std::size_t f = 0; f < p; ++f) {
      std::uint32_t* list = lists.data() + f * m;
      std::size_t li = cur.begin;
      std::size_t ri = 0;
      for (std::size_t pos = cur.begin; pos < cur.end; ++pos) {
        const auto r = list[pos];
        if (goes_left[r]) {
          list[li++] = r;
        } else {
          scratch[ri++] = r;
        }
      }
      std::copy(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(ri), list + li);
    }

    const auto left_id = tree.nodes.size();
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    auto& node = tree.nodes[cur.id];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.decrease = decrease;
    node.left = static_cast<int>(left_id);
    node.right = static_cast<int>(left_id + 1);

    const std::size_t mid = cur.begin + n_left;
    stack.push_back({left_id + 1, mid, cur.end, cur.depth + 1});
    stack.push_back({left_id, cur.begin, mid, cur.depth + 1});
  }
  return tree;
}

}  // namespace detail

TreeModel train_tree(const Samples& data, const TreeParams& params, std::uint64_t seed) {
  if (data.size() == 0) throw TrainError("cannot train a tree on an empty dataset");
  if (data.x.rows() != data.size()) throw TrainError("feature rows and labels differ in count");
  const std::size_t p = data.dimension();
  if (p == 0) throw TrainError("dataset has no features");
  if (params.mtry > p) throw ConfigError("mtry exceeds the number of features");
  const auto classes = distinct_labels(data.y);
  const auto presorted = detail::PresortedData::build(data, classes);
  std::vector<std::uint8_t> weights(data.size(), 1);
  Rng rng(seed);
  const std::size_t mtry = params.mtry == 0 ? p : params.mtry;
  return detail::grow_tree(presorted, weights, params, mtry, rng, classes);
}

}  // namespace emobase::learn
