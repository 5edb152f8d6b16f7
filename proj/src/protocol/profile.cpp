#include "emobase/protocol/profile.hpp"

#include <algorithm>
#include <numeric>

namespace emobase::protocol {

void ProtocolConfig::validate() const {
  if (!(ema_weight > 0.0 && ema_weight <= 1.0)) throw ConfigError("ema_weight must be in (0, 1]");
  if (exclusion_strikes < 1) throw ConfigError("exclusion_strikes must be at least 1");
  if (!(rest_s > 0.0) || !(personalized_rest_s > 0.0)) throw ConfigError("rest durations must be positive");
  if (!(min_total_s > 0.0 && max_total_s >= min_total_s)) throw ConfigError("bad session duration window");
  if (min_clips < 1 || max_clips < min_clips) throw ConfigError("need 1 <= min_clips <= max_clips");
  if (!(clip_min_s > 0.0 && clip_max_s >= clip_min_s)) throw ConfigError("bad clip length window");
  if (!(compilation_min_s > 0.0 && compilation_max_s >= compilation_min_s)) {
    throw ConfigError("bad compilation length window");
  }
  if (good_rank < 1 || good_rank > 10) throw ConfigError("good_rank must be in 1..10");
  if (!(target_minutes > 0.0)) throw ConfigError("target_minutes must be positive");
  if (max_sessions < 1) throw ConfigError("max_sessions must be at least 1");
}

double prior_from_affinity(int affinity) { return kNeutralPrior + 0.15 * affinity; }

std::string_view convergence_name(ConvergenceKind kind) {
  switch (kind) {
    case ConvergenceKind::Converged:
      return "Converged";
    case ConvergenceKind::NeedMore:
      return "NeedMore";
    case ConvergenceKind::MaxIterations:
      return "MaxIterations";
  }
  return "?";
}

double SubjectProfile::tag_effectiveness(const std::string& tag, Emotion e) const {
  const TagKey key{tag, e};
  if (auto it = effectiveness.find(key); it != effectiveness.end()) return it->second;
  if (auto it = priors.find(key); it != priors.end()) return it->second;
  return kNeutralPrior;
}

double SubjectProfile::clip_effectiveness(const StimulusClip& clip) const {
  if (clip.tags.empty()) return kNeutralPrior;
  double sum = 0.0;
  for (const auto& tag : clip.tags) sum += tag_effectiveness(tag, clip.target);
  return sum / static_cast<double>(clip.tags.size());
}

bool SubjectProfile::is_excluded(const StimulusClip& clip) const {
  return std::any_of(clip.tags.begin(), clip.tags.end(),
                     [&](const std::string& tag) { return excluded.count({tag, clip.target}) > 0; });
}

bool SubjectProfile::was_shown(const std::string& clip_id) const {
  for (const auto& plan : sessions) {
    for (const auto& item : plan.items) {
      if (auto* c = std::get_if<ClipBlock>(&item); c && c->clip_id == clip_id) return true;
    }
  }
  return false;
}

const SessionPlan* SubjectProfile::find_session(const std::string& session_id) const {
  for (const auto& plan : sessions) {
    if (plan.session_id == session_id) return &plan;
  }
  return nullptr;
}

SubjectProfile seed_profile(const std::string& subject_id, const Questionnaire& answers,
                            const ProtocolConfig& config) {
  config.validate();
  if (subject_id.empty()) throw QuestionnaireError("subject id is empty");
  if (answers.affinity.empty()) throw QuestionnaireError("questionnaire is empty");
  SubjectProfile p;
  p.subject_id = subject_id;
  p.questionnaire = answers;
  for (auto e : kTargetEmotions) {
    auto it = answers.affinity.find(e);
    if (it == answers.affinity.end()) {
      throw QuestionnaireError("no answer for " + std::string(emotion_name(e)));
    }
    for (const auto& [tag, a] : it->second) {
      if (tag.empty()) throw QuestionnaireError("empty tag in answers for " + std::string(emotion_name(e)));
      if (a < -2 || a > 2) {
        throw QuestionnaireError("affinity for '" + tag + "' must be in -2..2, got " + std::to_string(a));
      }
      p.priors[{tag, e}] = prior_from_affinity(a);
    }
  }
  if (answers.affinity.count(Emotion::Rest)) throw QuestionnaireError("Rest takes no answers");
  replay(p, config);
  return p;
}

void replay(SubjectProfile& p, const ProtocolConfig& config) {
  p.effectiveness.clear();
  p.strikes.clear();
  for (std::size_t i = 0; i < p.rankings.size(); ++i) {
    const auto& rec = p.rankings[i];
    const double target = rec.ranking.score / 10.0;
    for (const auto& tag : rec.tags) {
      const TagKey key{tag, rec.target};
      double& eff = p.effectiveness.try_emplace(key, p.tag_effectiveness(tag, rec.target)).first->second;
      eff += config.ema_weight * (target - eff);
      if (rec.ranking.evoked && *rec.ranking.evoked != rec.target) {
        auto reset = p.reset_at.find(key);
        if (reset == p.reset_at.end() || i >= reset->second) ++p.strikes[key];
      }
    }
  }
  for (const auto& [key, n] : p.strikes) {
    if (n >= config.exclusion_strikes) p.excluded.insert(key);
  }
  p.convergence = check_convergence(p, config);
}

void ingest_ranking(SubjectProfile& profile, const Pool& pool, const Ranking& ranking,
                    const ProtocolConfig& config) {
  validate_ranking(ranking);
  const auto* clip = find_clip(pool, ranking.clip_id);
  if (!clip) throw NotFoundError("unknown clip '" + ranking.clip_id + "'");
  if (!profile.find_session(ranking.session_id)) {
    throw ValidationError("session '" + ranking.session_id + "' does not belong to subject '" +
                          profile.subject_id + "'");
  }
  RankingRecord rec{ranking, clip->target, clip->tags, clip->duration_s};
  auto same = std::find_if(profile.rankings.begin(), profile.rankings.end(), [&](const RankingRecord& r) {
    return r.ranking.clip_id == ranking.clip_id && r.ranking.session_id == ranking.session_id;
  });
  if (same != profile.rankings.end()) {
    *same = std::move(rec);
  } else {
    profile.rankings.push_back(std::move(rec));
  }
  replay(profile, config);
}

void record_session(SubjectProfile& profile, const SessionPlan& plan, const ProtocolConfig& config) {
  if (plan.session_id.empty()) throw ValidationError("plan has no session id");
  if (profile.find_session(plan.session_id)) {
    throw ValidationError("session '" + plan.session_id + "' already exists");
  }
  profile.sessions.push_back(plan);
  profile.convergence = check_convergence(profile, config);
}

void reset_exclusion(SubjectProfile& profile, const TagKey& key, const ProtocolConfig& config) {
  profile.excluded.erase(key);
  profile.reset_at[key] = profile.rankings.size();
  replay(profile, config);
}

std::map<Emotion, double> good_minutes(const SubjectProfile& profile, const ProtocolConfig& config) {
  std::map<Emotion, double> out;
  for (auto e : kTargetEmotions) out[e] = 0.0;
  for (const auto& rec : profile.rankings) {
    if (rec.ranking.score < config.good_rank) continue;
    if (rec.ranking.evoked && *rec.ranking.evoked != rec.target) continue;
    out[rec.target] += rec.duration_s / 60.0;
  }
  return out;
}

ConvergenceStatus check_convergence(const std::map<Emotion, double>& minutes, std::size_t sessions_done,
                                    const ProtocolConfig& config) {
  ConvergenceStatus s;
  for (auto e : kPlayOrder) {
    auto it = minutes.find(e);
    const double got = it == minutes.end() ? 0.0 : it->second;
    if (got < config.target_minutes) s.deficient.push_back(e);
  }
  if (s.deficient.empty()) {
    s.kind = ConvergenceKind::Converged;
  } else if (sessions_done >= config.max_sessions) {
    s.kind = ConvergenceKind::MaxIterations;
  } else {
    s.kind = ConvergenceKind::NeedMore;
  }
  return s;
}

ConvergenceStatus check_convergence(const SubjectProfile& profile, const ProtocolConfig& config) {
  return check_convergence(good_minutes(profile, config), profile.sessions.size(), config);
}

}  // namespace emobase::protocol
