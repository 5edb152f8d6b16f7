#include "emobase/eval/synthetic.hpp"

#include "emobase/errors.hpp"
#include "emobase/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace emobase::eval {

namespace {

constexpr std::array<Emotion, 6> kPlayOrder = {Emotion::SadAnger, Emotion::Fear,    Emotion::Disgust,
                                               Emotion::AweRev,   Emotion::Content, Emotion::JoyAmus};

int play_rank(Emotion e) {
  return static_cast<int>(std::find(kPlayOrder.begin(), kPlayOrder.end(), e) - kPlayOrder.begin());
}

std::vector<std::vector<Emotion>> default_rotation() {
  using E = Emotion;
  return {{E::Fear, E::JoyAmus},
          {E::AweRev, E::Content},
          {E::SadAnger, E::AweRev},
          {E::Disgust, E::JoyAmus, E::Content},
          {E::Fear, E::AweRev},
          {E::JoyAmus, E::Content},
          {E::SadAnger, E::Disgust, E::JoyAmus},
          {E::Fear, E::Content},
          {E::SadAnger, E::Fear, E::Disgust, E::AweRev, E::Content, E::JoyAmus}};
}

// Splits total into `parts` lengths that are whole multiples of quantum,
// except that the last one also carries the sub-quantum remainder.
std::vector<double> split_total(double total, std::size_t parts, double quantum, Emotion label) {
  const auto quanta = static_cast<std::size_t>(std::floor(total / quantum));
  if (quanta < parts) {
    throw ConfigError("total of " + std::to_string(total) + " s for " + std::string(emotion_name(label)) +
                      " cannot fill " + std::to_string(parts) + " segments");
  }
  const double remainder = total - static_cast<double>(quanta) * quantum;
  std::vector<double> out(parts);
  for (std::size_t i = 0; i < parts; ++i) {
    const std::size_t q = quanta / parts + (i < quanta % parts ? 1 : 0);
    out[i] = static_cast<double>(q) * quantum;
  }
  out.back() += remainder;
  return out;
}

struct PlannedSegment {
  Emotion label;
  double length_s;
};

std::vector<std::vector<PlannedSegment>> plan_sessions(const SyntheticSpec& spec, Rng& rng) {
  const auto rotation = spec.session_emotions.empty() ? default_rotation() : spec.session_emotions;
  std::vector<std::vector<Emotion>> groups(spec.sessions);
  std::array<std::size_t, kLabelCount> segment_count{};
  for (std::size_t s = 0; s < spec.sessions; ++s) {
    groups[s] = rotation[s % rotation.size()];
    std::sort(groups[s].begin(), groups[s].end(),
              [](Emotion a, Emotion b) { return play_rank(a) < play_rank(b); });
    segment_count[0] += groups[s].size();
    for (Emotion e : groups[s]) segment_count[code_of(e)] += spec.clips_per_emotion;
  }

  std::array<std::vector<double>, kLabelCount> fixed;
  for (const auto& [label, total] : spec.total_seconds) {
    const auto c = static_cast<std::size_t>(code_of(label));
    if (segment_count[c] == 0) {
      throw ConfigError("a total is set for " + std::string(emotion_name(label)) +
                        " but no session shows it");
    }
    fixed[c] = split_total(total, segment_count[c], spec.quantum_s, label);
  }
  std::array<std::size_t, kLabelCount> used{};
  auto next_length = [&](Emotion label, double fallback) {
    const auto c = static_cast<std::size_t>(code_of(label));
    return fixed[c].empty() ? fallback : fixed[c][used[c]++];
  };

  std::vector<std::vector<PlannedSegment>> out(spec.sessions);
  for (std::size_t s = 0; s < spec.sessions; ++s) {
    for (Emotion e : groups[s]) {
      out[s].push_back({Emotion::Rest, next_length(Emotion::Rest, spec.rest_s)});
      for (std::size_t k = 0; k < spec.clips_per_emotion; ++k) {
        const double len = std::round(rng.uniform(spec.clip_min_s, spec.clip_max_s));
        out[s].push_back({e, next_length(e, len)});
      }
    }
  }
  return out;
}

std::string session_name(std::size_t s) {
  std::string n = std::to_string(s + 1);
  return "s" + std::string(n.size() < 2 ? 2 - n.size() : 0, '0') + n;
}

// Label code at time t (seconds) of a session; Rest outside every segment.
int label_at(const signal::SessionSchedule& sched, double t) {
  for (const auto& seg : sched.segments) {
    if (t >= seg.start_s && t < seg.end_s) return code_of(seg.label);
  }
  return 0;
}

}  // namespace

void SyntheticSpec::validate() const {
  for (const auto& b : baseline) {
    if (!std::isfinite(b.mean) || !(b.stddev > 0.0) || !std::isfinite(b.stddev)) {
      throw ConfigError("every channel needs a finite mean and a positive stddev");
    }
  }
  for (std::size_t l = 0; l < kLabelCount; ++l) {
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      if (!std::isfinite(shift[l][c])) throw ConfigError("class shifts must be finite");
      if (!(spread[l][c] > 0.0) || !std::isfinite(spread[l][c])) {
        throw ConfigError("class noise multipliers must be positive");
      }
    }
  }
  if (!(separability >= 0.0) || !std::isfinite(separability)) throw ConfigError("separability must be >= 0");
  if (!(autocorrelation >= 0.0 && autocorrelation < 1.0)) throw ConfigError("autocorrelation must be in [0, 1)");
  if (sessions == 0) throw ConfigError("at least one session is required");
  for (const auto& g : session_emotions) {
    if (g.empty()) throw ConfigError("a session must show at least one emotion");
    for (Emotion e : g) {
      if (e == Emotion::Rest) throw ConfigError("Rest is not a session emotion");
    }
    auto sorted = g;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ConfigError("an emotion appears twice in one session");
    }
  }
  if (clips_per_emotion == 0) throw ConfigError("clips_per_emotion must be >= 1");
  if (!(rest_s > 0.0)) throw ConfigError("rest_s must be positive");
  if (!(clip_min_s > 0.0) || clip_max_s < clip_min_s) throw ConfigError("bad clip length range");
  if (!(quantum_s > 0.0)) throw ConfigError("quantum_s must be positive");
  for (const auto& [label, total] : total_seconds) {
    if (!(total > 0.0) || total != std::floor(total)) {
      throw ConfigError("label totals must be positive whole seconds");
    }
  }
  if (!(chest_rate_hz > 0.0) || !(wrist_rate_hz > 0.0)) throw ConfigError("sample rates must be positive");
  if (wrist_offset_ms < 0) throw ConfigError("wrist offset must be >= 0");
  if (!(wrist_dropout >= 0.0 && wrist_dropout < 1.0)) throw ConfigError("wrist dropout must be in [0, 1)");
  if (rank_min < 1 || rank_max > 10 || rank_min > rank_max) throw ConfigError("ranking range must lie in 1..10");
}

SyntheticSpec default_synthetic_spec() {
  SyntheticSpec s;
  // HR bpm, HRV ms, HRP mmHg-like pulse amplitude, BR breaths/min, GSR uS, SKT C.
  s.baseline = {ChannelStats{72.0, 4.0}, ChannelStats{55.0, 9.0}, ChannelStats{40.0, 5.0},
                ChannelStats{15.0, 2.0}, ChannelStats{6.0, 0.6},  ChannelStats{33.0, 0.3}};
  // Columns: HR, HRV, HRP, BR, GSR, SKT. Rows by label code.
  s.shift = {{
      {0.0, 0.0, 0.0, 0.0, 0.0, 0.0},     // Rest
      {1.2, -0.9, 0.6, 1.0, 1.1, 0.0},    // Fear
      {-0.5, 0.7, -0.9, 0.6, 0.5, 0.0},   // SadAnger
      {0.3, 1.0, 0.6, -0.7, 0.9, 0.0},    // AweRev
      {0.9, -0.2, -0.6, -0.3, 1.4, 0.0},  // Disgust
      {1.0, 0.5, 1.0, 1.2, 0.2, 0.0},     // JoyAmus
      {-0.7, 0.3, 0.3, -1.0, -0.5, 0.0},  // Content
  }};
  s.spread = {{
      {1.0, 1.0, 1.0, 1.0, 1.0, 1.0},
      {1.3, 0.9, 1.1, 1.2, 1.2, 1.0},
      {0.8, 1.1, 0.9, 1.0, 0.8, 1.0},
      {1.0, 1.2, 1.0, 0.8, 1.1, 1.0},
      {1.1, 0.8, 1.2, 1.0, 1.3, 1.0},
      {1.2, 1.0, 1.1, 1.3, 0.9, 1.0},
      {0.8, 1.0, 0.8, 0.9, 0.9, 1.0},
  }};
  return s;
}

std::map<Emotion, double> reference_totals() {
  return {{Emotion::Rest, 7680.0},   {Emotion::Fear, 4128.0},    {Emotion::SadAnger, 3906.0},
          {Emotion::AweRev, 5058.0}, {Emotion::Disgust, 3488.0}, {Emotion::JoyAmus, 4768.0},
          {Emotion::Content, 3840.0}};
}

SubjectRecordings generate_synthetic_subject(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng layout_rng(derive_seed(seed, 0));
  const auto plan = plan_sessions(spec, layout_rng);

  SubjectRecordings out;
  constexpr std::array<Channel, 4> kChest = {Channel::HR, Channel::HRV, Channel::HRP, Channel::BR};
  constexpr std::array<Channel, 2> kWrist = {Channel::GSR, Channel::SKT};

  for (std::size_t s = 0; s < plan.size(); ++s) {
    SessionRecording rec;
    rec.schedule.session_id = session_name(s);
    rec.schedule.epoch_ms = 1'700'000'000'000LL + static_cast<std::int64_t>(s) * 86'400'000LL;
    double t = 0.0;
    std::array<int, kLabelCount> clip_no{};
    for (const auto& seg : plan[s]) {
      signal::Segment out_seg{t, t + seg.length_s, seg.label, std::nullopt};
      if (seg.label != Emotion::Rest) {
        out_seg.clip_id = rec.schedule.session_id + "-" + std::string(emotion_name(seg.label)) + "-" +
                          std::to_string(++clip_no[code_of(seg.label)]);
        out.rankings[*out_seg.clip_id] =
            spec.rank_min + static_cast<int>(layout_rng.index(
                                static_cast<std::size_t>(spec.rank_max - spec.rank_min + 1)));
      }
      rec.schedule.segments.push_back(out_seg);
      t += seg.length_s;
    }
    const double session_s = t;

    Rng rng(derive_seed(seed, s + 1));
    const double rho = spec.autocorrelation;
    const double innovation = std::sqrt(1.0 - rho * rho);

    auto emit = [&](std::span<const Channel> channels, const std::string& device, double rate,
                    std::int64_t offset_ms, double dropout) {
      std::vector<signal::TimeSeries> streams;
      for (Channel c : channels) {
        signal::TimeSeries ts;
        ts.channel = c;
        ts.device = device;
        ts.sample_rate_hint = rate;
        streams.push_back(std::move(ts));
      }
      std::vector<double> noise(channels.size());
      for (auto& z : noise) z = rng.normal();
      const auto n = static_cast<std::size_t>(std::floor((session_s * 1000.0 - static_cast<double>(offset_ms)) *
                                                         rate / 1000.0));
      for (std::size_t k = 0; k < n; ++k) {
        const auto t_ms = offset_ms + static_cast<std::int64_t>(std::llround(static_cast<double>(k) * 1000.0 / rate));
        const double t_s = static_cast<double>(t_ms) / 1000.0;
        const int label = label_at(rec.schedule, t_s);
        for (auto& z : noise) z = rho * z + innovation * rng.normal();
        const bool drop = dropout > 0.0 && k > 0 && k + 1 < n && rng.uniform() < dropout;
        if (drop) continue;
        for (std::size_t i = 0; i < channels.size(); ++i) {
          const auto c = static_cast<std::size_t>(index_of(channels[i]));
          const auto& base = spec.baseline[c];
          double v;
          if (channels[i] == Channel::SKT && spec.skt_mode == SktMode::Leak) {
            v = base.mean + base.stddev * spec.skt_rise * (t_s / session_s);
          } else {
            const double spread = 1.0 + spec.separability * (spec.spread[label][c] - 1.0);
            v = base.mean + base.stddev * (spec.separability * spec.shift[label][c] +
                                           std::max(spread, 0.05) * noise[i]);
          }
          streams[i].samples.push_back({t_ms, v});
        }
      }
      rec.streams.insert(rec.streams.end(), streams.begin(), streams.end());
    };
    emit(kChest, "chest", spec.chest_rate_hz, 0, 0.0);
    emit(kWrist, "wrist", spec.wrist_rate_hz, spec.wrist_offset_ms, spec.wrist_dropout);
    out.sessions.push_back(std::move(rec));
  }
  return out;
}

}  // namespace emobase::eval
