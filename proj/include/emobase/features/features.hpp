#pragma once

#include "emobase/signal/signal.hpp"
#include "emobase/types.hpp"

#include <array>
#include <bitset>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emobase::features {

// The 17 time-domain features, in their canonical column order.
enum class Feature : std::uint8_t {
  HRV_mean,
  HRV_std,
  BR_mean,
  BR_std,
  HRP_mean,
  HRP_std,
  BR_ssq,
  GSR_ssq,
  HRV_mean_diff,
  HRV_std_diff,
  GSR_mean,
  GSR_std,
  SKT_mean,
  HRV_mean_diff_sq,
  HRV_std_diff_sq,
  HR_mean,
  HR_std,
};

inline constexpr std::size_t kFeatureCount = 17;

std::string_view feature_name(Feature f);
Feature parse_feature(std::string_view name);
Channel feature_channel(Feature f);
std::array<Feature, kFeatureCount> all_features();

using FeatureVector = std::array<double, kFeatureCount>;
using FeatureMask = std::bitset<kFeatureCount>;

FeatureMask full_mask();
// Every feature except SKT_mean (the skin-temperature target leak).
FeatureMask default_mask();

struct WindowConfig {
  std::size_t w = 32;  // samples per window; windows never overlap

  void validate() const;
};

struct Window {
  std::string session_id;
  double start_s = 0.0;
  Emotion label = Emotion::Rest;
  std::optional<std::string> clip_id;
  std::array<std::vector<double>, kChannelCount> channels;
};

// Splits every maximal run of identically-labelled, non-excluded samples of
// one segment into consecutive windows of exactly w samples starting at the
// run's first sample. A trailing partial window is dropped.
std::vector<Window> cut_windows(const signal::LabeledSignalSet& signals, const WindowConfig& cfg);

// Number of windows a run of run_length samples yields.
constexpr std::size_t window_count(std::size_t run_length, std::size_t w) { return run_length / w; }

// Instance count expressed as minutes of signal at the given sample rate.
double duration_minutes(std::size_t count, std::size_t w, double rate_hz = 1.0);

FeatureVector extract_features(const Window& window);

struct LabeledInstance {
  FeatureVector features{};
  Emotion label = Emotion::Rest;
  std::string session_id;
  std::optional<std::string> clip_id;
  double window_start_s = 0.0;
};

struct Dataset {
  std::vector<LabeledInstance> instances;
  FeatureMask mask = default_mask();

  std::vector<Feature> active_features() const;
  std::size_t dimension() const { return mask.count(); }
  std::size_t size() const { return instances.size(); }
  // Feature values of instance i restricted to the mask.
  std::vector<double> row(std::size_t i) const;
};

// clip_id -> ranking score (1..10).
using RankingLookup = std::map<std::string, int>;

struct DatasetOptions {
  FeatureMask mask = default_mask();
  std::optional<int> min_rank;
  // Manual label merging (e.g. fold one emotion into another).
  std::map<Emotion, Emotion> label_merge;
};

// Drops rest windows, and windows of clips ranked below min_rank when set,
// then extracts features. Output is ordered by (session_id, window_start_s).
Dataset build_dataset(std::span<const Window> windows, const DatasetOptions& options,
                      const RankingLookup& rankings = {});

}  // namespace emobase::features
