#pragma once

#include "emobase/eval/report.hpp"
#include "emobase/features/features.hpp"
#include "emobase/learn/classifier.hpp"
#include "emobase/learn/samples.hpp"
#include "emobase/signal/signal.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace emobase::eval {

enum class Method { CrossValidation, OutOfBag };

struct EvalSetup {
  learn::ClassifierConfig classifier;
  Method method = Method::CrossValidation;
  std::size_t folds = 10;
  bool binary = false;
  // Descriptor only: how the dataset was built.
  std::size_t window = 32;
  std::optional<int> min_rank;
};

// Masked feature matrix; labels are emotion codes, or 0/1 when binary.
learn::Samples to_samples(const features::Dataset& dataset, bool binary);

// Shuffles 0..n-1 by seed and deals the permutation into k contiguous
// blocks, so fold sizes differ by at most one.
std::vector<int> assign_folds(std::size_t n, std::size_t k, std::uint64_t seed);

// Each fold is tested once with a model trained on the rest. Fold f trains
// with derive_seed(seed, f).
EvalReport cross_validate(const learn::Samples& data, const learn::ClassifierConfig& config,
                          std::size_t k, std::uint64_t seed);

// Out-of-bag estimate of a random forest trained on all of the data.
EvalReport out_of_bag(const learn::Samples& data, const learn::ClassifierConfig& config,
                      std::uint64_t seed);

EvalReport evaluate(const features::Dataset& dataset, const EvalSetup& setup, std::uint64_t seed);

// Reruns cut -> extract -> build -> evaluate for every window size, once
// for six classes and once for the binary setup.
std::vector<SweepPoint> window_sweep(std::span<const signal::LabeledSignalSet> sessions,
                                     std::span<const std::size_t> sizes, const EvalSetup& setup,
                                     const features::DatasetOptions& options,
                                     const features::RankingLookup& rankings, std::uint64_t seed);

// Same data, seed and folds with and without SKT_mean. The dataset mask
// must include SKT_mean.
AblationResult ablation_skt(const features::Dataset& dataset, const EvalSetup& setup,
                            std::uint64_t seed);

// The four classifiers with their default parameters.
std::vector<learn::ClassifierConfig> default_comparison();

// Binary k-fold error of every classifier on the same folds.
std::vector<EvalReport> compare_classifiers(const features::Dataset& dataset,
                                            std::span<const learn::ClassifierConfig> classifiers,
                                            std::size_t folds, std::uint64_t seed);

struct SeedSummary {
  std::vector<std::uint64_t> seeds;
  std::vector<double> errors;
  double mean = 0.0;
  double best = 0.0;
  double worst = 0.0;
};

// Runs evaluate() once per seed and reports mean, best and worst error.
SeedSummary across_seeds(const features::Dataset& dataset, const EvalSetup& setup,
                         std::span<const std::uint64_t> seeds);

}  // namespace emobase::eval
