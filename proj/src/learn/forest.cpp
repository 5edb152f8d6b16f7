#include "emobase/learn/forest.hpp"

#include "tree_builder.hpp"

#include "emobase/errors.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace emobase::learn {

namespace {

std::size_t vote_winner(std::span<const std::size_t> votes) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < votes.size(); ++k) {
    if (votes[k] > votes[best]) best = k;
  }
  return best;
}

}  // namespace

std::vector<std::size_t> ForestModel::votes(std::span<const double> x) const {
  if (x.size() != n_features) throw PredictError("feature vector has wrong dimension");
  std::vector<std::size_t> v(classes.size(), 0);
  for (const auto& tree : trees) ++v[tree.predict_index(x)];
  return v;
}

int ForestModel::predict(std::span<const double> x) const {
  const auto v = votes(x);
  return classes[vote_winner(v)];
}

ForestModel train_forest(const Samples& data, const ForestParams& params, std::uint64_t seed) {
  const std::size_t n = data.size();
  const std::size_t p = data.dimension();
  if (n == 0) throw TrainError("cannot train a forest on an empty dataset");
  if (data.x.rows() != n) throw TrainError("feature rows and labels differ in count");
  if (p == 0) throw TrainError("dataset has no features");
  if (params.n_trees < 1) throw ConfigError("n_trees must be >= 1");
  if (params.mtry > p) {
    throw ConfigError("mtry (" + std::to_string(params.mtry) + ") exceeds feature count (" +
                      std::to_string(p) + ")");
  }

  ForestModel model;
  model.classes = distinct_labels(data.y);
  model.feature_names = data.feature_names;
  model.n_features = p;
  model.seed = seed;
  model.mtry = params.mtry != 0
                   ? params.mtry
                   : std::max<std::size_t>(1, static_cast<std::size_t>(
                                                  std::floor(std::sqrt(static_cast<double>(p)))));

  const auto presorted = detail::PresortedData::build(data, model.classes);
  TreeParams tree_params;
  tree_params.min_leaf = params.min_leaf;
  tree_params.max_depth = params.max_depth;
  tree_params.mtry = model.mtry;

  const std::size_t n_trees = params.n_trees;
  model.trees.resize(n_trees);
  model.in_bag.assign(n_trees, std::vector<std::uint8_t>(n, 0));

  auto grow = [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    auto& bag = model.in_bag[t];
    for (std::size_t draw = 0; draw < n; ++draw) {
      auto& c = bag[rng.index(n)];
      if (c < 255) ++c;
    }
    model.trees[t] = detail::grow_tree(presorted, bag, tree_params, model.mtry, rng, model.classes);
  };

  unsigned threads = params.threads != 0 ? params.threads : std::thread::hardware_concurrency();
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(n_trees)));
  if (threads == 1) {
    for (std::size_t t = 0; t < n_trees; ++t) grow(t);
  } else {
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < threads; ++w) {
      workers.emplace_back([&, w] {
        for (std::size_t t = w; t < n_trees; t += threads) grow(t);
      });
    }
  }

  // Out-of-bag votes.
  const std::size_t k = model.classes.size();
  std::vector<std::size_t> oob_votes(n * k, 0);
  for (std::size_t t = 0; t < n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      if (model.in_bag[t][i] == 0) ++oob_votes[i * k + model.trees[t].predict_index(data.x.row(i))];
    }
  }
  model.oob_predictions.assign(n, std::nullopt);
  std::size_t counted = 0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::span<const std::size_t> v(oob_votes.data() + i * k, k);
    std::size_t total = 0;
    for (auto c : v) total += c;
    if (total == 0) continue;
    const int pred = model.classes[vote_winner(v)];
    model.oob_predictions[i] = pred;
    ++counted;
    wrong += (pred != data.y[i]);
  }
  if (n_trees >= 50 && n <= 10000 && counted != n) {
    throw TrainError("some rows were never out of bag across " + std::to_string(n_trees) +
                     " trees");
  }
  model.oob_error = counted > 0 ? static_cast<double>(wrong) / static_cast<double>(counted) : 0.0;

  // Importance: per-tree totals in node order, then averaged over trees.
  model.importance.assign(p, 0.0);
  for (const auto& tree : model.trees) {
    std::vector<double> per_tree(p, 0.0);
    for (const auto& node : tree.nodes) {
      if (!node.is_leaf()) per_tree[static_cast<std::size_t>(node.feature)] += node.decrease;
    }
    for (std::size_t f = 0; f < p; ++f) model.importance[f] += per_tree[f];
  }
  for (auto& v : model.importance) v /= static_cast<double>(n_trees);
  return model;
}

std::vector<ImportanceEntry> variable_importance(const ForestModel& model) {
  std::vector<ImportanceEntry> out;
  out.reserve(model.importance.size());
  for (std::size_t f = 0; f < model.importance.size(); ++f) {
    std::string name = f < model.feature_names.size() ? model.feature_names[f]
                                                      : "x" + std::to_string(f);
    out.push_back({std::move(name), f, model.importance[f]});
  }
  std::stable_sort(out.begin(), out.end(), [](const ImportanceEntry& a, const ImportanceEntry& b) {
    return a.score > b.score;
  });
  return out;
}

}  // namespace emobase::learn
