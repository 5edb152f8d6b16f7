#include "emobase/signal/signal.hpp"

#include "emobase/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace emobase::signal {

std::vector<double> TimeSeries::values() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.value);
  return out;
}

void validate(const TimeSeries& series) {
  const std::string where = std::string(channel_name(series.channel)) + "@" + series.device;
  if (series.samples.empty()) throw IngestError("empty stream " + where);
  for (std::size_t i = 0; i < series.samples.size(); ++i) {
    if (!std::isfinite(series.samples[i].value)) {
      throw IngestError("non-finite value in " + where + " at index " + std::to_string(i));
    }
    if (i > 0 && series.samples[i].t_ms <= series.samples[i - 1].t_ms) {
      throw IngestError("non-monotone timestamps in " + where + " at " +
                        std::to_string(series.samples[i].t_ms) + " ms");
    }
  }
}

void validate(const SessionSchedule& schedule) {
  for (std::size_t i = 0; i < schedule.segments.size(); ++i) {
    const auto& seg = schedule.segments[i];
    if (!(seg.end_s > seg.start_s)) {
      throw ScheduleError("segment " + std::to_string(i) + " of " + schedule.session_id +
                          " has non-positive length");
    }
    if (seg.label != Emotion::Rest && (!seg.clip_id || seg.clip_id->empty())) {
      throw ScheduleError("segment " + std::to_string(i) + " of " + schedule.session_id +
                          " targets " + std::string(emotion_name(seg.label)) +
                          " but has no clip_id");
    }
    if (i > 0 && seg.start_s < schedule.segments[i - 1].end_s) {
      throw ScheduleError("segments " + std::to_string(i - 1) + " and " + std::to_string(i) +
                          " of " + schedule.session_id + " overlap or are out of order");
    }
  }
}

std::vector<TimeSeries> align_and_resample(std::span<const TimeSeries> streams,
                                           double target_rate_hz) {
  if (!(target_rate_hz > 0.0) || !std::isfinite(target_rate_hz)) {
    throw ConfigError("target rate must be positive");
  }
  if (streams.empty()) return {};
  for (const auto& s : streams) validate(s);

  std::int64_t t_min = streams.front().samples.front().t_ms;
  std::int64_t t_max = streams.front().samples.back().t_ms;
  for (const auto& s : streams) {
    t_min = std::min(t_min, s.samples.front().t_ms);
    t_max = std::max(t_max, s.samples.back().t_ms);
  }

  const double period_ms = 1000.0 / target_rate_hz;
  const auto first_k = static_cast<std::int64_t>(std::floor(static_cast<double>(t_min) / period_ms));
  const auto last_k = static_cast<std::int64_t>(std::ceil(static_cast<double>(t_max) / period_ms));
  const auto n_grid = static_cast<std::size_t>(last_k - first_k + 1);

  std::vector<double> grid(n_grid);
  for (std::size_t k = 0; k < n_grid; ++k) {
    grid[k] = static_cast<double>(first_k + static_cast<std::int64_t>(k)) * period_ms;
  }

  std::vector<TimeSeries> out;
  out.reserve(streams.size());
  for (const auto& in : streams) {
    TimeSeries res{in.channel, {}, in.device, target_rate_hz};
    res.samples.resize(n_grid);
    const auto& src = in.samples;
    std::size_t j = 0;
    for (std::size_t k = 0; k < n_grid; ++k) {
      const double t = grid[k];
      double v;
      if (t <= static_cast<double>(src.front().t_ms)) {
        v = src.front().value;
      } else if (t >= static_cast<double>(src.back().t_ms)) {
        v = src.back().value;
      } else {
        while (static_cast<double>(src[j + 1].t_ms) <= t) ++j;
        const double t0 = static_cast<double>(src[j].t_ms);
        const double t1 = static_cast<double>(src[j + 1].t_ms);
        v = src[j].value + (src[j + 1].value - src[j].value) * (t - t0) / (t1 - t0);
      }
      res.samples[k] = Sample{static_cast<std::int64_t>(std::llround(t)), v};
    }
    out.push_back(std::move(res));
  }
  return out;
}

TimeSeries median_filter(const TimeSeries& series, std::size_t order) {
  if (order == 0) throw ConfigError("median filter order must be >= 1");
  if (series.samples.empty()) throw IngestError("median filter on empty series");

  TimeSeries out = series;
  const auto& in = series.samples;
  std::vector<double> window;  // kept sorted
  window.reserve(order + 1);
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double x = in[i].value;
    window.insert(std::lower_bound(window.begin(), window.end(), x), x);
    if (window.size() > order) {
      const double old = in[i - order].value;
      window.erase(std::lower_bound(window.begin(), window.end(), old));
    }
    const std::size_t m = window.size();
    out.samples[i].value =
        (m % 2 == 1) ? window[m / 2] : (window[m / 2 - 1] + window[m / 2]) / 2.0;
  }
  return out;
}

NormalizedSeries normalize_session(const TimeSeries& series) {
  NormalizedSeries out{series, false};
  const std::size_t n = series.samples.size();
  if (n == 0) return out;

  double sum = 0.0;
  for (const auto& s : series.samples) sum += s.value;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (const auto& s : series.samples) ss += (s.value - mean) * (s.value - mean);
  const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;

  if (sd < 1e-12) {
    out.degenerate = true;
    for (auto& s : out.series.samples) s.value = 0.0;
    return out;
  }
  for (auto& s : out.series.samples) s.value = (s.value - mean) / sd;
  return out;
}

const std::optional<std::string>* LabeledSignalSet::clip_at(std::size_t i) const {
  const int seg = segment_index[i];
  if (seg < 0) return nullptr;
  return &segments[static_cast<std::size_t>(seg)].clip_id;
}

LabeledSignalSet label_stream(std::span<const TimeSeries> grid, const SessionSchedule& schedule,
                              double trim_s) {
  if (!(trim_s >= 0.0)) throw ConfigError("trim_s must be >= 0");
  if (grid.empty()) throw IngestError("label_stream needs at least one resampled channel");
  validate(schedule);

  LabeledSignalSet out;
  out.session_id = schedule.session_id;
  out.segments = schedule.segments;

  const auto& ref = grid.front().samples;
  if (ref.empty()) throw IngestError("empty grid");
  out.t_ms.reserve(ref.size());
  for (const auto& s : ref) out.t_ms.push_back(s.t_ms);

  for (const auto& series : grid) {
    auto& dst = out.channels[index_of(series.channel)];
    if (!dst.empty()) {
      throw IngestError("channel " + std::string(channel_name(series.channel)) +
                        " appears twice in the grid");
    }
    if (series.samples.size() != ref.size()) {
      throw IngestError("grid channels have different lengths");
    }
    dst.reserve(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      if (series.samples[i].t_ms != ref[i].t_ms) {
        throw IngestError("grid channels are not on a shared time grid");
      }
      dst.push_back(series.samples[i].value);
    }
  }

  if (grid.front().sample_rate_hint) {
    out.sample_period_s = 1.0 / *grid.front().sample_rate_hint;
  } else if (ref.size() > 1) {
    out.sample_period_s = static_cast<double>(ref[1].t_ms - ref[0].t_ms) / 1000.0;
  }

  const double grid_begin_s = static_cast<double>(ref.front().t_ms) / 1000.0;
  const double grid_end_s = static_cast<double>(ref.back().t_ms) / 1000.0 + out.sample_period_s;
  constexpr double kSlack = 1e-9;
  for (const auto& seg : schedule.segments) {
    if (seg.start_s < grid_begin_s - kSlack || seg.end_s > grid_end_s + kSlack) {
      throw ScheduleError("segment [" + std::to_string(seg.start_s) + ", " +
                          std::to_string(seg.end_s) + ") of " + schedule.session_id +
                          " lies outside the recorded range");
    }
  }

  const std::size_t n = ref.size();
  out.labels.assign(n, Emotion::Rest);
  out.excluded.assign(n, 1);
  out.segment_index.assign(n, -1);

  std::size_t seg = 0;
  const auto& segs = schedule.segments;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(out.t_ms[i]) / 1000.0;
    while (seg < segs.size() && segs[seg].end_s <= t) ++seg;
    if (seg == segs.size() || t < segs[seg].start_s) continue;
    const auto& s = segs[seg];
    out.labels[i] = s.label;
    out.segment_index[i] = static_cast<int>(seg);
    const bool in_trim = s.label != Emotion::Rest && t < s.start_s + trim_s;
    out.excluded[i] = in_trim ? 1 : 0;
  }
  return out;
}

PreprocessedSession preprocess_session(std::span<const TimeSeries> raw,
                                       const SessionSchedule& schedule,
                                       const PreprocessOptions& options) {
  auto grid = align_and_resample(raw, options.target_rate_hz);
  PreprocessedSession out;
  for (auto& series : grid) {
    if (series.channel == Channel::GSR && options.gsr_median_order > 0) {
      series = median_filter(series, options.gsr_median_order);
    }
    if (options.normalize) {
      auto norm = normalize_session(series);
      if (norm.degenerate) out.degenerate_channels.push_back(series.channel);
      series = std::move(norm.series);
    }
  }
  out.signals = label_stream(grid, schedule, options.trim_s);
  return out;
}

}  // namespace emobase::signal
