#include "emobase/protocol/stimulus.hpp"

#include <algorithm>
#include <unordered_set>

namespace emobase::protocol {

void validate_clip(const StimulusClip& clip) {
  if (clip.clip_id.empty()) throw ValidationError("clip id is empty");
  const std::string who = "clip '" + clip.clip_id + "': ";
  if (!(clip.duration_s > 0.0)) throw ValidationError(who + "duration must be positive");
  if (clip.target == Emotion::Rest) throw ValidationError(who + "Rest is not a stimulus target");
  if (clip.is_compilation && valence_of(clip.target) != Valence::Positive) {
    throw ValidationError(who + "compilations may only target positive emotions");
  }
}

void validate_pool(const Pool& pool) {
  std::unordered_set<std::string> seen;
  for (const auto& clip : pool) {
    validate_clip(clip);
    if (!seen.insert(clip.clip_id).second) throw ValidationError("duplicate clip id '" + clip.clip_id + "'");
  }
}

const StimulusClip* find_clip(const Pool& pool, const std::string& clip_id) {
  auto it = std::find_if(pool.begin(), pool.end(), [&](const StimulusClip& c) { return c.clip_id == clip_id; });
  return it == pool.end() ? nullptr : &*it;
}

void validate_ranking(const Ranking& ranking) {
  if (ranking.score < 1 || ranking.score > 10) {
    throw ValidationError("score " + std::to_string(ranking.score) + " is outside 1..10");
  }
  if (ranking.clip_id.empty()) throw ValidationError("ranking without clip id");
  if (ranking.session_id.empty()) throw ValidationError("ranking without session id");
  if (ranking.evoked == Emotion::Rest) throw ValidationError("evoked emotion cannot be Rest");
  if (ranking.effective_span) {
    const auto [a, b] = *ranking.effective_span;
    if (!(a >= 0.0 && b > a)) throw ValidationError("effective span must satisfy 0 <= start < end");
  }
}

int play_rank(Emotion e) {
  return static_cast<int>(std::find(kPlayOrder.begin(), kPlayOrder.end(), e) - kPlayOrder.begin());
}

bool predominantly_negative(const SessionPlan& plan) {
  int neg = 0;
  int pos = 0;
  for (auto e : plan.emotions_covered) {
    if (valence_of(e) == Valence::Negative) ++neg;
    if (valence_of(e) == Valence::Positive) ++pos;
  }
  return neg > pos;
}

PoolExhaustedError::PoolExhaustedError(Emotion emotion, const std::string& detail)
    : Error("no eligible clips for " + std::string(emotion_name(emotion)) + (detail.empty() ? "" : ": " + detail)),
      emotion_(emotion) {}

}  // namespace emobase::protocol
