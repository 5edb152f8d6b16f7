#pragma once

#include "emobase/eval/pipeline.hpp"
#include "emobase/types.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <vector>

namespace emobase::eval {

enum class SktMode {
  Noise,  // no label information at all
  Leak,   // rises steadily through each session, so it tracks position in the session
};

struct ChannelStats {
  double mean = 0.0;
  double stddev = 1.0;
};

inline constexpr std::size_t kLabelCount = 7;  // Rest + six emotions, by code

struct SyntheticSpec {
  // Rest-state level and noise scale per channel.
  std::array<ChannelStats, kChannelCount> baseline{};
  // Per label code: mean shift in units of the channel stddev, and a noise
  // multiplier.
  std::array<std::array<double, kChannelCount>, kLabelCount> shift{};
  std::array<std::array<double, kChannelCount>, kLabelCount> spread{};
  // Scales every shift and every spread's distance from 1; 0 makes all
  // labels identical. 0.5 gives roughly 30% six-class error.
  double separability = 0.5;
  double autocorrelation = 0.8;

  SktMode skt_mode = SktMode::Noise;
  double skt_rise = 1.5;  // leak mode: total rise over a session, in SKT stddevs

  std::size_t sessions = 9;
  // Emotions shown in each session; cycled when there are more sessions.
  // Empty = built-in rotation. Groups are played in canonical order.
  std::vector<std::vector<Emotion>> session_emotions;
  std::size_t clips_per_emotion = 2;
  double rest_s = 300.0;
  double clip_min_s = 240.0;
  double clip_max_s = 480.0;
  // When set for a label, its segments are sized to add up to exactly this
  // many seconds: every segment a multiple of quantum_s except the last,
  // which absorbs the remainder.
  std::map<Emotion, double> total_seconds;
  double quantum_s = 32.0;

  double chest_rate_hz = 1.0;
  double wrist_rate_hz = 2.0;
  std::int64_t wrist_offset_ms = 250;
  double wrist_dropout = 0.01;

  int rank_min = 3;
  int rank_max = 10;

  // Throws ConfigError.
  void validate() const;
};

SyntheticSpec default_synthetic_spec();

// Totals per label matching the reference instance counts at w = 32 with no
// trimming: 240/129/122/158/109/149/120 windows.
std::map<Emotion, double> reference_totals();

// Session schedules, chest (HR, HRV, HRP, BR) and wrist (GSR, SKT) streams,
// and a ranking for every clip. Deterministic in (spec, seed).
SubjectRecordings generate_synthetic_subject(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace emobase::eval
