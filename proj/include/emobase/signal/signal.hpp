#pragma once

#include "emobase/types.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace emobase::signal {

struct Sample {
  std::int64_t t_ms = 0;  // milliseconds since the session epoch
  double value = 0.0;
};

// One channel from one device. Timestamps strictly increase and every value
// is finite; validate() enforces both.
struct TimeSeries {
  Channel channel = Channel::HR;
  std::vector<Sample> samples;
  std::string device;
  std::optional<double> sample_rate_hint;

  std::vector<double> values() const;
};

void validate(const TimeSeries& series);

struct Segment {
  double start_s = 0.0;  // inclusive
  double end_s = 0.0;    // exclusive
  Emotion label = Emotion::Rest;
  std::optional<std::string> clip_id;

  double length_s() const { return end_s - start_s; }
};

struct SessionSchedule {
  std::string session_id;
  std::int64_t epoch_ms = 0;  // wall-clock anchor; sample times are relative to it
  std::vector<Segment> segments;
};

// Ordered, non-overlapping segments; every non-rest segment names a clip.
void validate(const SessionSchedule& schedule);

// Resamples every stream onto one shared grid of period 1/target_rate that
// covers the union of the input time ranges. Interior gaps are linearly
// interpolated; values before the first / after the last observation hold
// the nearest observed value.
std::vector<TimeSeries> align_and_resample(std::span<const TimeSeries> streams,
                                           double target_rate_hz = 1.0);

// Trailing (causal) median over the last `order` samples, shrinking at the
// start. Even-sized windows take the mean of the two middle values.
TimeSeries median_filter(const TimeSeries& series, std::size_t order);

struct NormalizedSeries {
  TimeSeries series;
  bool degenerate = false;  // standard deviation below 1e-12; output is all zeros
};

// z-score over the whole session using the sample (n-1) standard deviation.
NormalizedSeries normalize_session(const TimeSeries& series);

// Per-sample labels on the uniform grid of one session.
struct LabeledSignalSet {
  std::string session_id;
  double sample_period_s = 1.0;
  std::vector<std::int64_t> t_ms;
  std::array<std::vector<double>, kChannelCount> channels;  // empty when absent
  std::vector<Emotion> labels;
  std::vector<std::uint8_t> excluded;
  std::vector<int> segment_index;  // -1 outside every segment
  std::vector<Segment> segments;

  std::size_t size() const { return t_ms.size(); }
  bool has(Channel c) const { return !channels[index_of(c)].empty(); }
  const std::vector<double>& channel(Channel c) const { return channels[index_of(c)]; }
  const std::optional<std::string>* clip_at(std::size_t i) const;
};

// Attaches the label of the containing segment to every grid sample. The
// first trim_s seconds of each non-rest segment, and samples outside every
// segment, are marked excluded.
LabeledSignalSet label_stream(std::span<const TimeSeries> grid, const SessionSchedule& schedule,
                              double trim_s = 15.0);

struct PreprocessOptions {
  double target_rate_hz = 1.0;
  std::size_t gsr_median_order = 10;
  bool normalize = true;
  double trim_s = 15.0;
};

struct PreprocessedSession {
  LabeledSignalSet signals;
  std::vector<Channel> degenerate_channels;
};

// align -> median-filter GSR -> per-session z-score -> label.
PreprocessedSession preprocess_session(std::span<const TimeSeries> raw,
                                       const SessionSchedule& schedule,
                                       const PreprocessOptions& options = {});

}  // namespace emobase::signal
