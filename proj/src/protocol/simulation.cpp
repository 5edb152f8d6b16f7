#include "emobase/protocol/simulation.hpp"

#include "emobase/rng.hpp"

#include <algorithm>
#include <cmath>

namespace emobase::protocol {

Pool simulation_pool(const SimulationSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  Pool pool;
  for (auto e : kPlayOrder) {
    const bool positive = valence_of(e) == Valence::Positive;
    for (std::size_t i = 0; i < spec.clips_per_emotion; ++i) {
      StimulusClip c;
      c.clip_id = std::string(emotion_name(e)) + "-" + std::to_string(i + 1);
      c.title = c.clip_id;
      c.source_url = "https://example.org/" + c.clip_id;
      c.target = e;
      c.tags.insert("t" + std::to_string(rng.index(spec.tags_per_emotion)));
      if (rng.uniform() < 0.4) c.tags.insert("t" + std::to_string(rng.index(spec.tags_per_emotion)));
      c.is_compilation = positive && rng.uniform() < 0.15;
      if (c.is_compilation) {
        c.tags.insert("compilation");
        c.duration_s = static_cast<double>(600 + 60 * rng.index(11));
      } else {
        c.duration_s = static_cast<double>(180 + 30 * rng.index(11));
      }
      c.recency = rng.uniform() < 0.5 ? RecencyClass::Contemporary : RecencyClass::Classic;
      pool.push_back(std::move(c));
    }
  }
  return pool;
}

SimulatedSubject simulated_subject(const Pool& pool, std::uint64_t seed) {
  Rng rng(seed);
  SimulatedSubject s;
  for (const auto& clip : pool) {
    for (const auto& tag : clip.tags) {
      if (!s.weight.count({tag, clip.target})) s.weight[{tag, clip.target}] = rng.uniform();
    }
  }
  return s;
}

int simulated_score(const SimulatedSubject& subject, const StimulusClip& clip, double noise_draw) {
  double q = 0.0;
  for (const auto& tag : clip.tags) q += subject.weight.at({tag, clip.target});
  q /= static_cast<double>(std::max<std::size_t>(1, clip.tags.size()));
  const double raw = 1.0 + 9.0 * q + subject.noise * noise_draw;
  return static_cast<int>(std::clamp(std::lround(raw), 1L, 10L));
}

SimulationRun simulate(const SimulationSpec& spec, std::uint64_t seed, const ProtocolConfig& config) {
  const Pool pool = simulation_pool(spec, derive_seed(seed, 0));
  const SimulatedSubject subject = simulated_subject(pool, derive_seed(seed, 1));
  Rng rng(derive_seed(seed, 2));

  Questionnaire neutral;
  for (auto e : kTargetEmotions) neutral.affinity[e] = {};
  SubjectProfile profile = seed_profile("sim", neutral, config);
  SimulationRun run;
  for (std::size_t s = 0; s < spec.sessions; ++s) {
    SessionPlan plan;
    try {
      plan = generate_session(profile, pool, {"s" + std::to_string(s + 1), false}, config);
    } catch (const PoolExhaustedError&) {
      break;
    }
    for (auto& v : validate_plan(plan, pool, profile, config)) run.violations.push_back(plan.session_id + ": " + v);
    record_session(profile, plan, config);
    double sum = 0.0;
    int count = 0;
    for (const auto& item : plan.items) {
      const auto* block = std::get_if<ClipBlock>(&item);
      if (!block) continue;
      const auto& clip = *find_clip(pool, block->clip_id);
      Ranking r;
      r.clip_id = clip.clip_id;
      r.session_id = plan.session_id;
      r.score = simulated_score(subject, clip, rng.normal());
      double q = 0.0;
      for (const auto& tag : clip.tags) q += subject.weight.at({tag, clip.target});
      q /= static_cast<double>(clip.tags.size());
      if (q < subject.misfire_below && rng.uniform() < 0.5) {
        r.evoked = valence_of(clip.target) == Valence::Negative ? Emotion::JoyAmus : Emotion::Fear;
      }
      ingest_ranking(profile, pool, r, config);
      sum += r.score;
      ++count;
    }
    run.mean_rank.push_back(sum / count);
  }
  run.exclusions = profile.excluded.size();
  return run;
}

double trend_slope(const std::vector<double>& y) {
  const auto n = static_cast<double>(y.size());
  if (y.size() < 2) return 0.0;
  const double xbar = (n - 1.0) / 2.0;
  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double dx = static_cast<double>(i) - xbar;
    sxy += dx * (y[i] - ybar);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace emobase::protocol
