#include "emobase/features/features.hpp"

#include "emobase/errors.hpp"

#include <algorithm>
#include <cmath>

namespace emobase::features {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kNames{
    "HRV_mean",      "HRV_std",          "BR_mean",         "BR_std",  "HRP_mean", "HRP_std",
    "BR_ssq",        "GSR_ssq",          "HRV_mean_diff",   "HRV_std_diff",
    "GSR_mean",      "GSR_std",          "SKT_mean",        "HRV_mean_diff_sq",
    "HRV_std_diff_sq", "HR_mean",        "HR_std"};

constexpr std::array<Channel, kFeatureCount> kChannels{
    Channel::HRV, Channel::HRV, Channel::BR,  Channel::BR,  Channel::HRP, Channel::HRP,
    Channel::BR,  Channel::GSR, Channel::HRV, Channel::HRV, Channel::GSR, Channel::GSR,
    Channel::SKT, Channel::HRV, Channel::HRV, Channel::HR,  Channel::HR};

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

// Welford's single-pass update; sd uses n-1 and is 0 for a single value.
template <class Range>
Moments moments(const Range& xs) {
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (double x : xs) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  Moments m;
  m.mean = mean;
  m.sd = n > 1 ? std::sqrt(std::max(0.0, m2) / static_cast<double>(n - 1)) : 0.0;
  return m;
}

double sum_of_squares(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x * x;
  return s;
}

}  // namespace

std::string_view feature_name(Feature f) { return kNames[static_cast<std::size_t>(f)]; }

Feature parse_feature(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (kNames[i] == name) return static_cast<Feature>(i);
  }
  throw FormatError("unknown feature '" + std::string(name) + "'");
}

Channel feature_channel(Feature f) { return kChannels[static_cast<std::size_t>(f)]; }

std::array<Feature, kFeatureCount> all_features() {
  std::array<Feature, kFeatureCount> out{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) out[i] = static_cast<Feature>(i);
  return out;
}

FeatureMask full_mask() { return FeatureMask{}.set(); }

FeatureMask default_mask() {
  auto m = full_mask();
  m.reset(static_cast<std::size_t>(Feature::SKT_mean));
  return m;
}

void WindowConfig::validate() const {
  if (w < 2) throw ConfigError("window length must be >= 2 samples");
}

double duration_minutes(std::size_t count, std::size_t w, double rate_hz) {
  return static_cast<double>(count) * static_cast<double>(w) / rate_hz / 60.0;
}

std::vector<Window> cut_windows(const signal::LabeledSignalSet& signals, const WindowConfig& cfg) {
  cfg.validate();
  std::vector<Window> out;
  const std::size_t n = signals.size();
  std::size_t i = 0;
  while (i < n) {
    if (signals.excluded[i]) {
      ++i;
      continue;
    }
    std::size_t end = i + 1;
    while (end < n && !signals.excluded[end] && signals.labels[end] == signals.labels[i] &&
           signals.segment_index[end] == signals.segment_index[i]) {
      ++end;
    }
    const auto* clip = signals.clip_at(i);
    for (std::size_t start = i; start + cfg.w <= end; start += cfg.w) {
      Window win;
      win.session_id = signals.session_id;
      win.start_s = static_cast<double>(signals.t_ms[start]) / 1000.0;
      win.label = signals.labels[i];
      if (clip) win.clip_id = *clip;
      for (auto c : kAllChannels) {
        if (!signals.has(c)) continue;
        const auto& src = signals.channel(c);
        win.channels[index_of(c)].assign(src.begin() + static_cast<std::ptrdiff_t>(start),
                                         src.begin() + static_cast<std::ptrdiff_t>(start + cfg.w));
      }
      out.push_back(std::move(win));
    }
    i = end;
  }
  return out;
}

FeatureVector extract_features(const Window& window) {
  std::size_t w = 0;
  for (auto c : kAllChannels) {
    const auto& xs = window.channels[index_of(c)];
    if (xs.empty()) {
      throw FeatureError("window at " + std::to_string(window.start_s) + " s of " +
                         window.session_id + " is missing channel " +
                         std::string(channel_name(c)));
    }
    if (w == 0) w = xs.size();
    if (xs.size() != w) throw FeatureError("window channels differ in length");
    for (double x : xs) {
      if (!std::isfinite(x)) throw FeatureError("non-finite sample in window");
    }
  }
  if (w < 2) throw FeatureError("window shorter than 2 samples");

  const auto& hr = window.channels[index_of(Channel::HR)];
  const auto& hrv = window.channels[index_of(Channel::HRV)];
  const auto& hrp = window.channels[index_of(Channel::HRP)];
  const auto& br = window.channels[index_of(Channel::BR)];
  const auto& gsr = window.channels[index_of(Channel::GSR)];
  const auto& skt = window.channels[index_of(Channel::SKT)];

  std::vector<double> diff(w - 1);
  std::vector<double> diff_sq(w - 1);
  for (std::size_t i = 0; i + 1 < w; ++i) {
    diff[i] = hrv[i + 1] - hrv[i];
    diff_sq[i] = diff[i] * diff[i];
  }

  const auto m_hrv = moments(hrv);
  const auto m_br = moments(br);
  const auto m_hrp = moments(hrp);
  const auto m_gsr = moments(gsr);
  const auto m_skt = moments(skt);
  const auto m_hr = moments(hr);
  const auto m_diff = moments(diff);
  const auto m_diff_sq = moments(diff_sq);

  FeatureVector f{};
  auto set = [&f](Feature id, double v) { f[static_cast<std::size_t>(id)] = v; };
  set(Feature::HRV_mean, m_hrv.mean);
  set(Feature::HRV_std, m_hrv.sd);
  set(Feature::BR_mean, m_br.mean);
  set(Feature::BR_std, m_br.sd);
  set(Feature::HRP_mean, m_hrp.mean);
  set(Feature::HRP_std, m_hrp.sd);
  set(Feature::BR_ssq, sum_of_squares(br));
  set(Feature::GSR_ssq, sum_of_squares(gsr));
  set(Feature::HRV_mean_diff, m_diff.mean);
  set(Feature::HRV_std_diff, m_diff.sd);
  set(Feature::GSR_mean, m_gsr.mean);
  set(Feature::GSR_std, m_gsr.sd);
  set(Feature::SKT_mean, m_skt.mean);
  set(Feature::HRV_mean_diff_sq, m_diff_sq.mean);
  set(Feature::HRV_std_diff_sq, m_diff_sq.sd);
  set(Feature::HR_mean, m_hr.mean);
  set(Feature::HR_std, m_hr.sd);
  return f;
}

std::vector<Feature> Dataset::active_features() const {
  std::vector<Feature> out;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (mask.test(i)) out.push_back(static_cast<Feature>(i));
  }
  return out;
}

std::vector<double> Dataset::row(std::size_t i) const {
  std::vector<double> out;
  out.reserve(mask.count());
  const auto& f = instances.at(i).features;
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    if (mask.test(k)) out.push_back(f[k]);
  }
  return out;
}

Dataset build_dataset(std::span<const Window> windows, const DatasetOptions& options,
                      const RankingLookup& rankings) {
  if (options.mask.none()) throw DatasetError("feature mask is empty");
  Dataset ds;
  ds.mask = options.mask;
  for (const auto& win : windows) {
    Emotion label = win.label;
    if (auto it = options.label_merge.find(label); it != options.label_merge.end()) {
      label = it->second;
    }
    if (label == Emotion::Rest) continue;
    if (options.min_rank) {
      if (!win.clip_id) {
        throw DatasetError("window at " + std::to_string(win.start_s) + " s of " +
                           win.session_id + " has no clip_id but a rank filter is set");
      }
      auto it = rankings.find(*win.clip_id);
      if (it == rankings.end()) {
        throw DatasetError("no ranking for clip '" + *win.clip_id + "'");
      }
      if (it->second < *options.min_rank) continue;
    }
    LabeledInstance inst;
    inst.features = extract_features(win);
    inst.label = label;
    inst.session_id = win.session_id;
    inst.clip_id = win.clip_id;
    inst.window_start_s = win.start_s;
    ds.instances.push_back(std::move(inst));
  }
  std::stable_sort(ds.instances.begin(), ds.instances.end(),
                   [](const LabeledInstance& a, const LabeledInstance& b) {
                     if (a.session_id != b.session_id) return a.session_id < b.session_id;
                     return a.window_start_s < b.window_start_s;
                   });
  return ds;
}

}  // namespace emobase::features
