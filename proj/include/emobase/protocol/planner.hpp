#pragma once

#include "emobase/protocol/profile.hpp"

#include <string>
#include <vector>

namespace emobase::protocol {

struct SessionRequest {
  std::string session_id;
  bool personalized = false;
};

// Length rule for one clip, independent of the subject.
bool length_ok(const StimulusClip& clip, const ProtocolConfig& config);

// Clips of `e` that may still be shown: right length, not shown before, no
// excluded tag. Best first (effectiveness, then clip id).
std::vector<const StimulusClip*> eligible_clips(const SubjectProfile& profile, const Pool& pool, Emotion e,
                                                const ProtocolConfig& config);

// Pure: the profile is not modified. Emotions are picked by deficit of good
// material, then by how little they have been planned so far. Throws
// PoolExhaustedError when an emotion that still needs material has no
// eligible clip, or when no emotion set fits the duration window.
SessionPlan generate_session(const SubjectProfile& profile, const Pool& pool, const SessionRequest& request,
                             const ProtocolConfig& config = {});

// Structural problems of a plan against the pool and the subject's history
// (which must not contain the plan itself). Empty means valid. Written
// separately from the planner so that it can check it.
std::vector<std::string> validate_plan(const SessionPlan& plan, const Pool& pool, const SubjectProfile& history,
                                       const ProtocolConfig& config = {});

}  // namespace emobase::protocol
