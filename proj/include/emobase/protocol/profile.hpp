#pragma once

#include "emobase/protocol/stimulus.hpp"

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace emobase::protocol {

struct ProtocolConfig {
  double ema_weight = 0.5;     // effectiveness step toward score/10
  int exclusion_strikes = 2;   // wrong-emotion reports before a tag is dropped
  double rest_s = 300.0;
  double personalized_rest_s = 180.0;
  double min_total_s = 3600.0;
  double max_total_s = 4200.0;
  std::size_t min_clips = 2;   // per emotion group, relaxed when the pool has fewer
  std::size_t max_clips = 4;
  double clip_min_s = 180.0;
  double clip_max_s = 720.0;
  double compilation_min_s = 600.0;
  double compilation_max_s = 2400.0;
  double personalized_minutes = 10.0;  // per emotion
  int good_rank = 7;
  double target_minutes = 50.0;        // of good material per emotion
  std::size_t max_sessions = 9;

  void validate() const;  // throws ConfigError
};

// Per-emotion tag affinity in -2..2: negative means the subject is
// desensitized to that kind of material, positive means it reliably works.
struct Questionnaire {
  std::map<Emotion, std::map<std::string, int>> affinity;
};

using TagKey = std::pair<std::string, Emotion>;

inline constexpr double kNeutralPrior = 0.5;
double prior_from_affinity(int affinity);

// What a ranking referred to, captured at ingest so that replays do not need
// the pool.
struct RankingRecord {
  Ranking ranking;
  Emotion target = Emotion::Fear;
  std::set<std::string> tags;
  double duration_s = 0.0;
};

enum class ConvergenceKind : std::uint8_t { Converged, NeedMore, MaxIterations };

struct ConvergenceStatus {
  ConvergenceKind kind = ConvergenceKind::NeedMore;
  std::vector<Emotion> deficient;  // play order
};

std::string_view convergence_name(ConvergenceKind kind);

struct SubjectProfile {
  std::string subject_id;
  Questionnaire questionnaire;
  std::map<TagKey, double> priors;
  std::vector<RankingRecord> rankings;  // submission order; one per (clip, session)
  std::vector<SessionPlan> sessions;    // every plan handed out, oldest first
  std::set<TagKey> excluded;            // absorbing
  // Strikes are counted only from this ranking index on, after a manual reset.
  std::map<TagKey, std::size_t> reset_at;

  // Derived by replaying `rankings`.
  std::map<TagKey, double> effectiveness;
  std::map<TagKey, int> strikes;
  ConvergenceStatus convergence;

  double tag_effectiveness(const std::string& tag, Emotion e) const;
  // Mean over the clip's tags, neutral for an untagged clip.
  double clip_effectiveness(const StimulusClip& clip) const;
  bool is_excluded(const StimulusClip& clip) const;
  bool was_shown(const std::string& clip_id) const;
  const SessionPlan* find_session(const std::string& session_id) const;
};

// Throws QuestionnaireError when an emotion has no answer, a tag is empty or
// an affinity is outside -2..2.
SubjectProfile seed_profile(const std::string& subject_id, const Questionnaire& answers,
                            const ProtocolConfig& config = {});

// pre: the clip is in the pool (NotFoundError) and the session was handed to
// this subject (ValidationError). A second ranking of the same clip in the
// same session replaces the first.
void ingest_ranking(SubjectProfile& profile, const Pool& pool, const Ranking& ranking,
                    const ProtocolConfig& config = {});

// Adds a generated plan to the history. Duplicate session ids are rejected.
void record_session(SubjectProfile& profile, const SessionPlan& plan, const ProtocolConfig& config = {});

// Lifts an exclusion; strikes from earlier rankings no longer count.
void reset_exclusion(SubjectProfile& profile, const TagKey& key, const ProtocolConfig& config = {});

// Recomputes effectiveness, strikes, exclusions and convergence.
void replay(SubjectProfile& profile, const ProtocolConfig& config);

// Minutes of clips ranked >= good_rank per target emotion. A clip reported
// as evoking another emotion does not count.
std::map<Emotion, double> good_minutes(const SubjectProfile& profile, const ProtocolConfig& config);

ConvergenceStatus check_convergence(const std::map<Emotion, double>& minutes, std::size_t sessions_done,
                                    const ProtocolConfig& config);
ConvergenceStatus check_convergence(const SubjectProfile& profile, const ProtocolConfig& config);

}  // namespace emobase::protocol
