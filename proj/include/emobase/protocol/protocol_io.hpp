#pragma once

#include "emobase/protocol/profile.hpp"

#include "json.hpp"

namespace emobase::protocol {

inline constexpr int kProtocolSchemaVersion = 1;

// Emotions are written by name; readers accept names or codes. Malformed
// documents throw FormatError, well-formed but invalid ones ValidationError.
nlohmann::json clip_to_json(const StimulusClip& clip);
StimulusClip clip_from_json(const nlohmann::json& j);

// Pool file: a bare JSON array of clips.
nlohmann::json pool_to_json(const Pool& pool);
Pool pool_from_json(const nlohmann::json& j);

nlohmann::json ranking_to_json(const Ranking& r);
Ranking ranking_from_json(const nlohmann::json& j);

// {"schema_version": 1, "session_id": "...", "personalized": false,
//  "items": [{"type": "rest", "duration_s": 300},
//            {"type": "clip", "clip_id": "...", "target_emotion": "Fear", "duration_s": 420}, ...],
//  "planned_total_s": ..., "emotions_covered": [...]}
nlohmann::json plan_to_json(const SessionPlan& plan);
SessionPlan plan_from_json(const nlohmann::json& j);

// {"schema_version": 1, "affinity": {"Fear": {"horror": -2}, ...}}
nlohmann::json questionnaire_to_json(const Questionnaire& q);
Questionnaire questionnaire_from_json(const nlohmann::json& j);

ProtocolConfig config_from_json(const nlohmann::json& j);  // missing keys keep defaults
nlohmann::json config_to_json(const ProtocolConfig& c);

nlohmann::json convergence_to_json(const ConvergenceStatus& s);

// Stores the inputs (answers, rankings, sessions, exclusions, resets); the
// derived estimates are written for readers but rebuilt on load.
nlohmann::json profile_to_json(const SubjectProfile& p);
SubjectProfile profile_from_json(const nlohmann::json& j, const ProtocolConfig& config = {});

}  // namespace emobase::protocol
