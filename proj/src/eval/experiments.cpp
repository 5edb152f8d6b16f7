#include "emobase/eval/experiments.hpp"

#include "emobase/errors.hpp"
#include "emobase/eval/binary.hpp"
#include "emobase/eval/pipeline.hpp"
#include "emobase/rng.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace emobase::eval {

namespace {

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::vector<std::string> mask_names(const features::FeatureMask& mask) {
  std::vector<std::string> out;
  for (auto f : features::all_features()) {
    if (mask.test(static_cast<std::size_t>(f))) out.emplace_back(features::feature_name(f));
  }
  return out;
}

}  // namespace

learn::Samples to_samples(const features::Dataset& dataset, bool binary) {
  learn::Samples out;
  out.x = learn::Matrix(0, dataset.dimension());
  for (auto f : dataset.active_features()) out.feature_names.emplace_back(features::feature_name(f));
  out.y.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out.x.append_row(dataset.row(i));
    const Emotion e = dataset.instances[i].label;
    out.y.push_back(binary ? binary_code(e) : code_of(e));
  }
  return out;
}

std::vector<int> assign_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (k > n) {
    throw ConfigError("cannot split " + std::to_string(n) + " instances into " + std::to_string(k) +
                      " folds");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0U);
  Rng rng(seed);
  rng.shuffle(perm);
  std::vector<int> fold(n);
  for (std::size_t j = 0; j < n; ++j) fold[perm[j]] = static_cast<int>(j * k / n);
  return fold;
}

EvalReport cross_validate(const learn::Samples& data, const learn::ClassifierConfig& config,
                          std::size_t k, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = data.size();
  EvalReport report;
  report.seed = seed;
  report.instances = n;
  report.setup.classifier = std::string(learn::classifier_name(config.kind));
  report.setup.method = "cv";
  report.setup.folds = k;
  report.setup.features = data.feature_names;
  report.fold_of = assign_folds(n, k, seed);
  report.predictions.assign(n, -1);
  report.confusion = ConfusionMatrix(data.y);

  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < n; ++i) {
      (report.fold_of[i] == static_cast<int>(f) ? test_rows : train_rows).push_back(i);
    }
    const auto model = learn::train(config, data.subset(train_rows), derive_seed(seed, f));
    std::size_t wrong = 0;
    for (auto i : test_rows) {
      const int p = learn::predict(model, data.x.row(i));
      report.predictions[i] = p;
      report.confusion.add(p, data.y[i]);
      if (p != data.y[i]) ++wrong;
    }
    report.fold_errors.push_back(static_cast<double>(wrong) / static_cast<double>(test_rows.size()));
  }
  report.mean_error = std::accumulate(report.fold_errors.begin(), report.fold_errors.end(), 0.0) /
                      static_cast<double>(k);
  report.elapsed_ms = ms_since(start);
  return report;
}

EvalReport out_of_bag(const learn::Samples& data, const learn::ClassifierConfig& config,
                      std::uint64_t seed) {
  if (config.kind != learn::ClassifierKind::RandomForest) {
    throw ConfigError("out-of-bag evaluation needs the random forest");
  }
  const auto start = std::chrono::steady_clock::now();
  const auto forest = learn::train_forest(data, config.forest, seed);
  EvalReport report;
  report.seed = seed;
  report.instances = data.size();
  report.setup.classifier = "rf";
  report.setup.method = "oob";
  report.setup.folds = 0;
  report.setup.features = data.feature_names;
  report.confusion = ConfusionMatrix(data.y);
  report.predictions.assign(data.size(), -1);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (const auto& p = forest.oob_predictions[i]) {
      report.predictions[i] = *p;
      report.confusion.add(*p, data.y[i]);
    }
  }
  report.mean_error = forest.oob_error;
  report.elapsed_ms = ms_since(start);
  return report;
}

EvalReport evaluate(const features::Dataset& dataset, const EvalSetup& setup, std::uint64_t seed) {
  if (dataset.size() == 0) throw DatasetError("dataset has no instances");
  const auto data = to_samples(dataset, setup.binary);
  EvalReport report = setup.method == Method::OutOfBag
                          ? out_of_bag(data, setup.classifier, seed)
                          : cross_validate(data, setup.classifier, setup.folds, seed);
  report.setup.features = mask_names(dataset.mask);
  report.setup.binary = setup.binary;
  report.setup.window = setup.window;
  report.setup.min_rank = setup.min_rank;
  return report;
}

std::vector<SweepPoint> window_sweep(std::span<const signal::LabeledSignalSet> sessions,
                                     std::span<const std::size_t> sizes, const EvalSetup& setup,
                                     const features::DatasetOptions& options,
                                     const features::RankingLookup& rankings, std::uint64_t seed) {
  if (sizes.empty()) throw ConfigError("window sweep needs at least one size");
  std::vector<SweepPoint> out;
  for (std::size_t w : sizes) {
    features::WindowConfig cfg{w};
    cfg.validate();
    const auto dataset = dataset_from_signals(sessions, cfg, options, rankings);
    if (dataset.size() == 0) {
      throw DatasetError("window of " + std::to_string(w) + " samples yields no instances");
    }
    EvalSetup s = setup;
    s.window = w;
    s.min_rank = options.min_rank;
    SweepPoint p;
    p.window = w;
    s.binary = false;
    p.six_class = evaluate(dataset, s, seed);
    s.binary = true;
    p.binary = evaluate(dataset, s, seed);
    out.push_back(std::move(p));
  }
  return out;
}

AblationResult ablation_skt(const features::Dataset& dataset, const EvalSetup& setup,
                            std::uint64_t seed) {
  const auto skt = static_cast<std::size_t>(features::Feature::SKT_mean);
  if (!dataset.mask.test(skt)) throw ConfigError("ablation needs a dataset whose mask includes SKT_mean");
  AblationResult out;
  out.with_skt = evaluate(dataset, setup, seed);
  features::Dataset without = dataset;
  without.mask.reset(skt);
  out.without_skt = evaluate(without, setup, seed);
  return out;
}

std::vector<learn::ClassifierConfig> default_comparison() {
  std::vector<learn::ClassifierConfig> out;
  for (auto kind : {learn::ClassifierKind::DecisionTree, learn::ClassifierKind::RandomForest,
                    learn::ClassifierKind::NeuralNetwork, learn::ClassifierKind::Svm}) {
    learn::ClassifierConfig c;
    c.kind = kind;
    out.push_back(c);
  }
  return out;
}

std::vector<EvalReport> compare_classifiers(const features::Dataset& dataset,
                                            std::span<const learn::ClassifierConfig> classifiers,
                                            std::size_t folds, std::uint64_t seed) {
  std::vector<EvalReport> out;
  for (const auto& c : classifiers) {
    EvalSetup s;
    s.classifier = c;
    s.method = Method::CrossValidation;
    s.folds = folds;
    s.binary = true;
    out.push_back(evaluate(dataset, s, seed));
  }
  return out;
}

SeedSummary across_seeds(const features::Dataset& dataset, const EvalSetup& setup,
                         std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw ConfigError("seed list is empty");
  SeedSummary out;
  out.seeds.assign(seeds.begin(), seeds.end());
  for (auto s : seeds) out.errors.push_back(evaluate(dataset, setup, s).mean_error);
  out.mean = std::accumulate(out.errors.begin(), out.errors.end(), 0.0) /
             static_cast<double>(out.errors.size());
  out.best = *std::min_element(out.errors.begin(), out.errors.end());
  out.worst = *std::max_element(out.errors.begin(), out.errors.end());
  return out;
}

}  // namespace emobase::eval
