#include "doctest.h"

#include "../support/learn_checks.hpp"
#include "emobase/errors.hpp"
#include "emobase/learn/classifier.hpp"
#include "emobase/learn/model_io.hpp"
#include "emobase/rng.hpp"

#include <filesystem>
#include <numeric>

using namespace emobase;
using namespace emobase::learn;

namespace {

// Gaussian blobs, one per class, centred at distance `gap` apart along
// every axis, plus `noise_cols` pure-noise columns.
Samples blobs(std::size_t per_class, std::vector<int> labels, double gap, std::size_t noise_cols,
              std::uint64_t seed) {
  Rng rng(seed);
  Samples s;
  const std::size_t p = 2 + noise_cols;
  s.x = Matrix(0, p);
  for (std::size_t i = 0; i < p; ++i) s.feature_names.push_back("f" + std::to_string(i));
  for (std::size_t i = 0; i < per_class; ++i) {
    for (std::size_t c = 0; c < labels.size(); ++c) {
      std::vector<double> row(p);
      row[0] = gap * static_cast<double>(c) + rng.normal();
      row[1] = gap * static_cast<double>(c % 2) + rng.normal();
      for (std::size_t k = 2; k < p; ++k) row[k] = rng.normal();
      s.x.append_row(row);
      s.y.push_back(labels[c]);
    }
  }
  return s;
}

Samples xor_set() {
  Samples s;
  s.x = Matrix(0, 2);
  s.feature_names = {"a", "b"};
  const double pts[4][2] = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
  const int ys[4] = {0, 0, 1, 1};
  for (int i = 0; i < 4; ++i) {
    s.x.append_row(std::vector<double>{pts[i][0], pts[i][1]});
    s.y.push_back(ys[i]);
  }
  return s;
}

double training_error(const Model& m, const Samples& s) {
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < s.size(); ++i) wrong += predict(m, s.x.row(i)) != s.y[i];
  return static_cast<double>(wrong) / static_cast<double>(s.size());
}

}  // namespace

TEST_CASE("matrix, samples and standardizer") {
  Matrix m(0, 2);
  m.append_row(std::vector<double>{1, 2});
  m.append_row(std::vector<double>{3, 6});
  CHECK(m.rows() == 2);
  CHECK(m(1, 1) == 6);
  CHECK_THROWS(m.append_row(std::vector<double>{1}));
  const auto st = Standardizer::fit(m);
  CHECK(st.mean[0] == 2.0);
  CHECK(st.scale[1] == doctest::Approx(std::sqrt(8.0)));
  const auto z = st.apply(std::vector<double>{3, 6});
  CHECK(z[0] == doctest::Approx(1.0 / std::sqrt(2.0)));

  Matrix flat(0, 1);
  flat.append_row(std::vector<double>{4});
  flat.append_row(std::vector<double>{4});
  CHECK(Standardizer::fit(flat).scale[0] == 1.0);

  CHECK(distinct_labels(std::vector<int>{3, 1, 3, 2}) == std::vector<int>{1, 2, 3});
  CHECK(class_index(std::vector<int>{1, 2, 5}, 5) == 2);
  CHECK(class_index(std::vector<int>{1, 2, 5}, 4) == -1);
}

TEST_CASE("gini impurity") {
  CHECK(gini_impurity(std::vector<double>{5, 5}) == doctest::Approx(0.5));
  CHECK(gini_impurity(std::vector<double>{7, 0, 0}) == 0.0);
  CHECK(gini_impurity(std::vector<double>{1, 1, 1}) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(gini_impurity(std::vector<double>{0, 0}), ValueError);
  CHECK_THROWS_AS(gini_impurity(std::vector<double>{-1, 2}), ValueError);
}

TEST_CASE("decision tree") {
  const auto data = blobs(40, {1, 2, 3}, 8.0, 2, 3);
  SUBCASE("separable data is learned exactly") {
    TreeParams p;
    p.min_leaf = 1;
    const auto t = train_tree(data, p);
    for (std::size_t i = 0; i < data.size(); ++i) CHECK(t.predict(data.x.row(i)) == data.y[i]);
  }
  SUBCASE("leaf size and depth limits hold") {
    TreeParams p;
    p.min_leaf = 7;
    p.max_depth = 3;
    const auto t = train_tree(blobs(50, {1, 2}, 1.0, 3, 4), p);
    CHECK(t.depth() <= 3);
    for (const auto& n : t.nodes) {
      if (n.is_leaf()) {
        CHECK(n.weight >= 7.0);
        CHECK(std::accumulate(n.distribution.begin(), n.distribution.end(), 0.0) == doctest::Approx(1.0));
      }
    }
  }
  SUBCASE("single class gives a single leaf") {
    Samples one = data;
    std::fill(one.y.begin(), one.y.end(), 4);
    const auto t = train_tree(one);
    CHECK(t.nodes.size() == 1);
    CHECK(t.predict(one.x.row(0)) == 4);
  }
  SUBCASE("split thresholds are midpoints") {
    Samples s;
    s.x = Matrix(0, 1);
    s.feature_names = {"x"};
    for (double v : {1.0, 2.0, 3.0, 10.0, 11.0, 12.0}) {
      s.x.append_row(std::vector<double>{v});
      s.y.push_back(v < 5 ? 0 : 1);
    }
    TreeParams p;
    p.min_leaf = 1;
    const auto t = train_tree(s, p);
    REQUIRE_FALSE(t.nodes[0].is_leaf());
    CHECK(t.nodes[0].threshold == 6.5);
    CHECK(t.leaf_count() == 2);
  }
  CHECK_THROWS(train_tree(Samples{}));
}

TEST_CASE("random forest") {
  const auto data = blobs(30, {1, 2, 3}, 2.0, 4, 9);
  ForestParams p;
  p.n_trees = 60;

  SUBCASE("same seed gives the same forest regardless of threads") {
    p.threads = 1;
    const auto a = train_forest(data, p, 42);
    p.threads = 3;
    const auto b = train_forest(data, p, 42);
    CHECK(a.oob_error == b.oob_error);
    CHECK(a.importance == b.importance);
    CHECK(a.in_bag == b.in_bag);
    for (std::size_t i = 0; i < data.size(); ++i) CHECK(a.predict(data.x.row(i)) == b.predict(data.x.row(i)));
    const auto c = train_forest(data, p, 43);
    CHECK(c.in_bag != a.in_bag);
  }
  SUBCASE("oob predictions use exactly the out-of-bag trees") {
    const auto f = train_forest(data, p, 5);
    CHECK(f.mtry == 2);  // floor(sqrt(6))
    std::size_t wrong = 0, counted = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      std::vector<std::size_t> votes(f.classes.size(), 0);
      bool any = false;
      for (std::size_t t = 0; t < f.n_trees(); ++t) {
        if (f.in_bag[t][i] != 0) continue;
        any = true;
        ++votes[f.trees[t].predict_index(data.x.row(i))];
      }
      REQUIRE(any == f.oob_predictions[i].has_value());
      if (!any) continue;
      const auto best = static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
      CHECK(*f.oob_predictions[i] == f.classes[best]);
      ++counted;
      wrong += f.classes[best] != data.y[i];
    }
    CHECK(f.oob_error == doctest::Approx(static_cast<double>(wrong) / static_cast<double>(counted)));
  }
  SUBCASE("bootstrap draws n rows per tree") {
    const auto f = train_forest(data, p, 6);
    for (const auto& bag : f.in_bag) {
      std::size_t total = 0;
      for (auto b : bag) total += b;
      CHECK(total == data.size());
    }
  }
  SUBCASE("importance is the mean per-tree Gini decrease") {
    const auto f = train_forest(data, p, 7);
    std::vector<double> want(data.dimension(), 0.0);
    for (const auto& t : f.trees) {
      for (const auto& n : t.nodes) {
        if (!n.is_leaf()) want[static_cast<std::size_t>(n.feature)] += n.decrease;
      }
    }
    for (std::size_t k = 0; k < want.size(); ++k) {
      CHECK(f.importance[k] == doctest::Approx(want[k] / static_cast<double>(f.n_trees())));
      CHECK(f.importance[k] >= 0.0);
    }
    const auto ranked = variable_importance(f);
    REQUIRE(ranked.size() == data.dimension());
    CHECK(ranked[0].score >= ranked[1].score);
    // The two signal columns lead the noise.
    CHECK((ranked[0].column <= 1 && ranked[1].column <= 1));
  }
  SUBCASE("bad parameters") {
    p.mtry = 7;
    CHECK_THROWS_AS(train_forest(data, p, 1), ConfigError);
    p.mtry = 0;
    p.n_trees = 0;
    CHECK_THROWS_AS(train_forest(data, p, 1), ConfigError);
  }
}

TEST_CASE("forest vote ties go to the lowest label") {
  Samples s;
  s.x = Matrix(0, 1);
  s.feature_names = {"x"};
  for (int i = 0; i < 4; ++i) {
    s.x.append_row(std::vector<double>{1.0});
    s.y.push_back(i % 2 ? 9 : 2);
  }
  ForestParams p;
  p.n_trees = 2;
  const auto f = train_forest(s, p, 1);
  // Identical inputs: every leaf is mixed and votes can only tie or lean.
  const auto votes = f.votes(std::vector<double>{1.0});
  if (votes[0] == votes[1]) CHECK(f.predict(std::vector<double>{1.0}) == 2);
}

TEST_CASE("network gradients match central differences") {
  Rng rng(21);
  for (auto act : {Activation::Logistic, Activation::GaussianRbf}) {
    for (int trial = 0; trial < 4; ++trial) {
      const std::size_t p = 1 + rng.index(4), h = 1 + rng.index(5), k = 2 + rng.index(3), n = 3 + rng.index(6);
      AnnNetwork net(p, h, k, act);
      for (auto& w : net.parameters()) w = rng.normal(0.0, 0.8);
      Matrix x(n, p);
      for (auto& v : x.data()) v = rng.normal();
      std::vector<std::size_t> t(n);
      for (auto& v : t) v = rng.index(k);
      CHECK(oracle::gradient_check(net, x, t) <= 1e-6);
    }
  }
}

TEST_CASE("network loss agrees with the reference forward pass") {
  Rng rng(2);
  AnnNetwork net(3, 4, 3, Activation::Logistic);
  for (auto& w : net.parameters()) w = rng.normal();
  Matrix x(5, 3);
  for (auto& v : x.data()) v = rng.normal();
  std::vector<std::size_t> t{0, 1, 2, 1, 0};
  std::vector<long double> w(net.parameters().begin(), net.parameters().end());
  CHECK(net.loss(x, t) == doctest::Approx(static_cast<double>(oracle::network_loss(w, 3, 4, 3, true, x, t))).epsilon(1e-12));
  std::vector<double> g;
  CHECK(net.loss_and_gradient(x, t, g) == doctest::Approx(net.loss(x, t)).epsilon(1e-14));
  const auto prob = net.probabilities(x.row(0));
  CHECK(std::accumulate(prob.begin(), prob.end(), 0.0) == doctest::Approx(1.0));
}

TEST_CASE("network training") {
  const auto data = blobs(30, {1, 2, 3}, 5.0, 1, 4);
  AnnParams p;
  p.epochs = 200;
  p.learning_rate = 0.1;
  const auto m = train_ann(data, p, 1);
  CHECK(training_error(Model{m}, data) < 0.1);
  const auto again = train_ann(data, p, 1);
  CHECK(m.network.parameters() == again.network.parameters());
  p.activation = Activation::GaussianRbf;
  CHECK(training_error(Model{train_ann(data, p, 1)}, data) < 0.15);
  CHECK(parse_activation("rbf") == Activation::GaussianRbf);
  CHECK_THROWS_AS(parse_activation("tanh"), ConfigError);

  AnnParams wild;
  wild.learning_rate = 1e308;
  wild.epochs = 5;
  CHECK_THROWS_AS(train_ann(data, wild, 1), TrainError);
  wild.learning_rate = -1;
  CHECK_THROWS_AS(train_ann(data, wild, 1), ConfigError);
}

TEST_CASE("svm solves xor") {
  SvmParams p;
  p.gamma = 1.0;
  p.cost = 10.0;
  p.standardize = false;
  const auto data = xor_set();
  const auto m = train_svm(data, p);
  CHECK(m.converged);
  CHECK(training_error(Model{m}, data) == 0.0);
  const auto r = oracle::svm_residuals(m, data, 0);
  CHECK(r.kkt <= 1e-3);
  CHECK(r.expansion <= 1e-9);
}

TEST_CASE("svm optimality on noisy multiclass data") {
  const auto data = blobs(25, {1, 2, 3}, 1.5, 2, 17);
  SvmParams p;
  const auto m = train_svm(data, p);
  REQUIRE(m.machines.size() == 3);
  CHECK(m.machines[0].positive_label == 1);
  CHECK(m.machines[0].negative_label == 2);
  CHECK(m.machines[2].positive_label == 2);
  for (std::size_t k = 0; k < m.machines.size(); ++k) {
    const auto r = oracle::svm_residuals(m, data, k);
    CHECK(r.kkt <= 1e-3);
    CHECK(r.expansion <= 1e-9);
    for (double c : m.machines[k].coef) CHECK(std::abs(c) <= p.cost + 1e-12);
  }
}

TEST_CASE("svm iteration cap raises with a partial model") {
  const auto data = blobs(25, {1, 2}, 0.5, 2, 3);
  SvmParams p;
  p.max_iterations = 2;
  try {
    train_svm(data, p);
    FAIL("expected SvmConvergenceError");
  } catch (const SvmConvergenceError& e) {
    CHECK_FALSE(e.partial_model().converged);
    CHECK(e.partial_model().machines.size() == 1);
  }
  p.max_iterations = 0;
  p.gamma = -1;
  CHECK_THROWS_AS(train_svm(data, p), ConfigError);
}

TEST_CASE("classifier dispatch and model files") {
  const auto data = blobs(20, {2, 5}, 4.0, 1, 8);
  const auto dir = std::filesystem::temp_directory_path() / "emobase_model_test";
  std::filesystem::create_directories(dir);
  for (auto kind : {ClassifierKind::DecisionTree, ClassifierKind::RandomForest, ClassifierKind::NeuralNetwork,
                    ClassifierKind::Svm}) {
    CAPTURE(classifier_name(kind));
    CHECK(parse_classifier(classifier_name(kind)) == kind);
    ClassifierConfig cfg;
    cfg.kind = kind;
    cfg.forest.n_trees = 25;
    cfg.ann.epochs = 50;
    const auto m = train(cfg, data, 3);
    CHECK(kind_of(m) == kind);
    CHECK(input_dimension(m) == data.dimension());
    CHECK(training_error(m, data) < 0.2);

    const auto path = dir / (std::string(classifier_name(kind)) + ".json");
    save_model(path, m);
    const auto back = load_model(path);
    CHECK(kind_of(back) == kind);
    for (std::size_t i = 0; i < data.size(); ++i) CHECK(predict(back, data.x.row(i)) == predict(m, data.x.row(i)));
    CHECK(model_to_json(back) == model_to_json(m));
  }
  CHECK_THROWS_AS(parse_classifier("knn"), ConfigError);
  CHECK_THROWS(model_from_json(nlohmann::json{{"schema_version", 99}, {"kind", "rf"}, {"model", {}}}));
  std::filesystem::remove_all(dir);
}

TEST_CASE("prediction dimension is checked") {
  const auto data = blobs(10, {0, 1}, 4.0, 0, 1);
  ClassifierConfig cfg;
  cfg.kind = ClassifierKind::Svm;
  const auto m = train(cfg, data, 0);
  CHECK_THROWS_AS(predict(m, std::vector<double>{1.0}), PredictError);
}
