// Plan checks. Deliberately shares no helpers with the planner.
#include "emobase/protocol/planner.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace emobase::protocol {

namespace {

constexpr double kSlack = 1e-6;

std::string name(Emotion e) { return std::string(emotion_name(e)); }

}  // namespace

std::vector<std::string> validate_plan(const SessionPlan& plan, const Pool& pool, const SubjectProfile& history,
                                       const ProtocolConfig& config) {
  std::vector<std::string> bad;
  auto fail = [&](const std::string& msg) { bad.push_back(msg); };

  if (plan.items.empty()) {
    fail("plan is empty");
    return bad;
  }
  if (!std::holds_alternative<RestBlock>(plan.items.front())) fail("plan does not start with a rest");
  if (std::holds_alternative<RestBlock>(plan.items.back())) fail("plan ends with a rest");

  const double rest = plan.personalized ? config.personalized_rest_s : config.rest_s;
  std::vector<Emotion> groups;
  std::vector<std::size_t> group_sizes;
  std::set<std::string> in_plan;
  double total = 0.0;
  bool after_rest = false;
  for (std::size_t i = 0; i < plan.items.size(); ++i) {
    if (const auto* r = std::get_if<RestBlock>(&plan.items[i])) {
      total += r->duration_s;
      if (std::abs(r->duration_s - rest) > kSlack) {
        std::ostringstream os;
        os << "rest " << i << " lasts " << r->duration_s << " s, expected " << rest;
        fail(os.str());
      }
      if (after_rest) fail("two rests in a row at item " + std::to_string(i));
      after_rest = true;
      continue;
    }
    const auto& c = std::get<ClipBlock>(plan.items[i]);
    total += c.duration_s;
    if (after_rest || groups.empty()) {
      groups.push_back(c.target);
      group_sizes.push_back(0);
    } else if (groups.back() != c.target) {
      fail("emotion changes from " + name(groups.back()) + " to " + name(c.target) + " without a rest");
      groups.push_back(c.target);
      group_sizes.push_back(0);
    }
    ++group_sizes.back();
    after_rest = false;

    if (!in_plan.insert(c.clip_id).second) fail("clip '" + c.clip_id + "' appears twice");
    if (history.was_shown(c.clip_id)) fail("clip '" + c.clip_id + "' was shown in an earlier session");
    const StimulusClip* clip = nullptr;
    for (const auto& p : pool) {
      if (p.clip_id == c.clip_id) clip = &p;
    }
    if (!clip) {
      fail("clip '" + c.clip_id + "' is not in the pool");
      continue;
    }
    if (clip->target != c.target) fail("clip '" + c.clip_id + "' targets " + name(clip->target));
    if (std::abs(clip->duration_s - c.duration_s) > kSlack) fail("clip '" + c.clip_id + "' duration mismatch");
    const bool positive = valence_of(clip->target) == Valence::Positive;
    if (clip->is_compilation) {
      if (!positive) fail("compilation '" + c.clip_id + "' targets a negative emotion");
      if (clip->duration_s < config.compilation_min_s || clip->duration_s > config.compilation_max_s) {
        fail("compilation '" + c.clip_id + "' has a disallowed length");
      }
    } else if (clip->duration_s < config.clip_min_s || clip->duration_s > config.clip_max_s) {
      fail("clip '" + c.clip_id + "' has a disallowed length");
    }
    for (const auto& tag : clip->tags) {
      if (history.excluded.count({tag, clip->target})) {
        fail("clip '" + c.clip_id + "' carries excluded tag '" + tag + "' for " + name(clip->target));
      }
    }
  }

  if (std::abs(total - plan.planned_total_s) > kSlack) fail("planned_total_s does not match the items");
  if (groups != plan.emotions_covered) fail("emotions_covered does not match the groups");
  std::set<Emotion> distinct(groups.begin(), groups.end());
  if (distinct.size() != groups.size()) fail("an emotion is split over several groups");
  for (std::size_t g = 0; g < group_sizes.size(); ++g) {
    if (group_sizes[g] > config.max_clips) fail(name(groups[g]) + " has too many clips");
  }

  if (plan.personalized) {
    if (groups != std::vector<Emotion>(kPlayOrder.begin(), kPlayOrder.end())) {
      fail("personalized session must play all six emotions in order");
    }
    return bad;
  }

  if (distinct.size() < 2 || distinct.size() > 3) {
    fail("session covers " + std::to_string(distinct.size()) + " emotions");
  }
  if (total < config.min_total_s - kSlack || total > config.max_total_s + kSlack) {
    std::ostringstream os;
    os << "session lasts " << total / 60.0 << " min";
    fail(os.str());
  }
  int neg = 0;
  int pos = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto v = valence_of(groups[g]);
    (v == Valence::Negative ? neg : pos) += 1;
    if (g > 0 && valence_of(groups[g - 1]) == Valence::Positive && v == Valence::Negative) {
      fail("positive to negative transition before " + name(groups[g]));
    }
  }
  if (neg > 0 && pos > 0 && valence_of(groups.back()) != Valence::Positive) fail("mixed session ends negative");
  if (neg > pos && !history.sessions.empty()) {
    int pn = 0;
    int pp = 0;
    for (auto e : history.sessions.back().emotions_covered) {
      (valence_of(e) == Valence::Negative ? pn : pp) += 1;
    }
    if (pn > pp) fail("two predominantly negative sessions in a row");
  }
  return bad;
}

}  // namespace emobase::protocol
