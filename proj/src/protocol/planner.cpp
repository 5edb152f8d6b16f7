#include "emobase/protocol/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace emobase::protocol {

bool length_ok(const StimulusClip& clip, const ProtocolConfig& config) {
  if (clip.is_compilation) {
    return valence_of(clip.target) == Valence::Positive && clip.duration_s >= config.compilation_min_s &&
           clip.duration_s <= config.compilation_max_s;
  }
  return clip.duration_s >= config.clip_min_s && clip.duration_s <= config.clip_max_s;
}

std::vector<const StimulusClip*> eligible_clips(const SubjectProfile& profile, const Pool& pool, Emotion e,
                                                const ProtocolConfig& config) {
  std::vector<std::pair<double, const StimulusClip*>> scored;
  for (const auto& clip : pool) {
    if (clip.target != e || !length_ok(clip, config)) continue;
    if (profile.is_excluded(clip) || profile.was_shown(clip.clip_id)) continue;
    scored.emplace_back(profile.clip_effectiveness(clip), &clip);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second->clip_id < b.second->clip_id;
  });
  std::vector<const StimulusClip*> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back(s.second);
  return out;
}

namespace {

struct Group {
  Emotion emotion;
  std::vector<const StimulusClip*> pool;    // eligible, best first
  std::vector<const StimulusClip*> chosen;
  std::size_t min_count = 1;
};

double clips_total(const std::vector<Group>& groups) {
  double t = 0.0;
  for (const auto& g : groups) {
    for (const auto* c : g.chosen) t += c->duration_s;
  }
  return t;
}

// Start from the best clips and drop the weakest one while the session is
// too long.
void greedy_fit(std::vector<Group>& groups, const SubjectProfile& profile, double budget_max,
                const ProtocolConfig& config) {
  for (auto& g : groups) {
    g.chosen.assign(g.pool.begin(), g.pool.begin() + static_cast<std::ptrdiff_t>(
                                                         std::min(config.max_clips, g.pool.size())));
  }
  while (clips_total(groups) > budget_max) {
    Group* from = nullptr;
    std::size_t at = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (auto& g : groups) {
      if (g.chosen.size() <= g.min_count) continue;
      for (std::size_t i = 0; i < g.chosen.size(); ++i) {
        const double eff = profile.clip_effectiveness(*g.chosen[i]);
        if (eff <= worst) {
          worst = eff;
          from = &g;
          at = i;
        }
      }
    }
    if (!from) return;
    from->chosen.erase(from->chosen.begin() + static_cast<std::ptrdiff_t>(at));
  }
}

// Exact fallback: per group a subset of its best few clips, maximizing total
// effectiveness with the clip time inside [lo, hi]. Durations are binned to
// whole seconds; the result is re-checked with the real values.
bool dp_fit(std::vector<Group>& groups, const SubjectProfile& profile, double lo, double hi,
            const ProtocolConfig& config) {
  constexpr std::size_t kCandidates = 8;
  if (hi < 0.0) return false;
  const auto cap = static_cast<std::size_t>(std::floor(hi));
  struct Option {
    std::vector<const StimulusClip*> clips;
    std::size_t secs = 0;
    double eff = 0.0;
  };
  std::vector<std::vector<Option>> options(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const std::size_t m = std::min(kCandidates, groups[g].pool.size());
    for (unsigned mask = 1; mask < (1u << m); ++mask) {
      const auto n = static_cast<std::size_t>(__builtin_popcount(mask));
      if (n < groups[g].min_count || n > config.max_clips) continue;
      Option o;
      double dur = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (!(mask & (1u << i))) continue;
        o.clips.push_back(groups[g].pool[i]);
        dur += groups[g].pool[i]->duration_s;
        o.eff += profile.clip_effectiveness(*groups[g].pool[i]);
      }
      o.secs = static_cast<std::size_t>(std::llround(dur));
      if (o.secs <= cap) options[g].push_back(std::move(o));
    }
  }

  constexpr double kNone = -std::numeric_limits<double>::infinity();
  std::vector<double> best(cap + 1, kNone);
  best[0] = 0.0;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> back(
      groups.size(), std::vector<std::pair<std::size_t, std::size_t>>(cap + 1));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::vector<double> next(cap + 1, kNone);
    for (std::size_t d = 0; d <= cap; ++d) {
      if (best[d] == kNone) continue;
      for (std::size_t o = 0; o < options[g].size(); ++o) {
        const std::size_t nd = d + options[g][o].secs;
        if (nd > cap) continue;
        const double v = best[d] + options[g][o].eff;
        if (v > next[nd]) {
          next[nd] = v;
          back[g][nd] = {d, o};
        }
      }
    }
    best = std::move(next);
  }
  const auto start = static_cast<std::size_t>(std::max(0.0, std::ceil(lo)));
  std::size_t end = cap + 1;
  for (std::size_t d = start; d <= cap; ++d) {
    if (best[d] != kNone && (end > cap || best[d] > best[end])) end = d;
  }
  if (end > cap) return false;
  for (std::size_t g = groups.size(); g-- > 0;) {
    const auto [d, o] = back[g][end];
    groups[g].chosen = options[g][o].clips;
    end = d;
  }
  const double t = clips_total(groups);
  return t >= lo && t <= hi;
}

SessionPlan assemble(const std::string& session_id, bool personalized, const std::vector<Group>& groups,
                     double rest_s, const SubjectProfile& profile) {
  SessionPlan plan;
  plan.session_id = session_id;
  plan.personalized = personalized;
  for (const auto& g : groups) {
    plan.items.emplace_back(RestBlock{rest_s});
    plan.planned_total_s += rest_s;
    plan.emotions_covered.push_back(g.emotion);
    // weakest first so that each group escalates
    auto clips = g.chosen;
    std::stable_sort(clips.begin(), clips.end(), [&](const StimulusClip* a, const StimulusClip* b) {
      return profile.clip_effectiveness(*a) < profile.clip_effectiveness(*b);
    });
    for (const auto* c : clips) {
      plan.items.emplace_back(ClipBlock{c->clip_id, c->target, c->duration_s});
      plan.planned_total_s += c->duration_s;
    }
  }
  return plan;
}

SessionPlan personalized_session(const SubjectProfile& profile, const Pool& pool, const SessionRequest& request,
                                 const ProtocolConfig& config) {
  std::vector<Group> groups;
  for (auto e : kPlayOrder) {
    auto clips = eligible_clips(profile, pool, e, config);
    if (clips.empty()) throw PoolExhaustedError(e, "personalized session needs all six emotions");
    std::stable_sort(clips.begin(), clips.end(),
                     [](const StimulusClip* a, const StimulusClip* b) { return a->is_personal > b->is_personal; });
    Group g{e, clips, {}, 1};
    double t = 0.0;
    for (const auto* c : clips) {
      if (g.chosen.size() == config.max_clips || t >= config.personalized_minutes * 60.0) break;
      g.chosen.push_back(c);
      t += c->duration_s;
    }
    groups.push_back(std::move(g));
  }
  return assemble(request.session_id, true, groups, config.personalized_rest_s, profile);
}

}  // namespace

SessionPlan generate_session(const SubjectProfile& profile, const Pool& pool, const SessionRequest& request,
                             const ProtocolConfig& config) {
  config.validate();
  if (request.session_id.empty()) throw ValidationError("session id is empty");
  if (profile.find_session(request.session_id)) {
    throw ValidationError("session '" + request.session_id + "' already exists");
  }
  if (request.personalized) return personalized_session(profile, pool, request, config);

  const auto minutes = good_minutes(profile, config);
  std::map<Emotion, double> planned;
  for (const auto& plan : profile.sessions) {
    for (const auto& item : plan.items) {
      if (auto* c = std::get_if<ClipBlock>(&item)) planned[c->target] += c->duration_s;
    }
  }
  std::map<Emotion, std::vector<const StimulusClip*>> eligible;
  for (auto e : kPlayOrder) {
    eligible[e] = eligible_clips(profile, pool, e, config);
    if (eligible[e].empty() && minutes.at(e) < config.target_minutes) throw PoolExhaustedError(e);
  }

  // Most deficient first; among equals, the least planned so far.
  std::vector<Emotion> order(kPlayOrder.begin(), kPlayOrder.end());
  auto deficit = [&](Emotion e) { return std::max(0.0, config.target_minutes - minutes.at(e)); };
  std::stable_sort(order.begin(), order.end(), [&](Emotion a, Emotion b) {
    if (deficit(a) != deficit(b)) return deficit(a) > deficit(b);
    return planned[a] < planned[b];
  });
  std::vector<Emotion> candidates;
  for (auto e : order) {
    if (!eligible[e].empty()) candidates.push_back(e);
  }

  // Candidate emotion sets as index lists into `candidates`, best first:
  // compare the sorted indices lexicographically, a missing entry losing to
  // any present one, so that {0,1,3} beats {0,1} but {0,1} beats {0,2,3}.
  std::vector<std::vector<std::size_t>> sets;
  const std::size_t n = candidates.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      sets.push_back({a, b});
      for (std::size_t c = b + 1; c < n; ++c) sets.push_back({a, b, c});
    }
  }
  std::sort(sets.begin(), sets.end(), [](const auto& x, const auto& y) {
    for (std::size_t i = 0; i < 3; ++i) {
      const std::size_t xi = i < x.size() ? x[i] : SIZE_MAX;
      const std::size_t yi = i < y.size() ? y[i] : SIZE_MAX;
      if (xi != yi) return xi < yi;
    }
    return false;
  });

  const bool after_negative = !profile.sessions.empty() && predominantly_negative(profile.sessions.back());
  for (const auto& set : sets) {
    int neg = 0;
    int pos = 0;
    std::vector<Group> groups;
    for (auto i : set) {
      const Emotion e = candidates[i];
      (valence_of(e) == Valence::Negative ? neg : pos) += 1;
      groups.push_back({e, eligible[e], {}, std::min(config.min_clips, eligible[e].size())});
    }
    if (pos == 0) continue;                    // always close on a positive note
    if (after_negative && neg > pos) continue;  // negative sessions alternate
    std::sort(groups.begin(), groups.end(),
              [](const Group& x, const Group& y) { return play_rank(x.emotion) < play_rank(y.emotion); });

    const double rests = config.rest_s * static_cast<double>(groups.size());
    const double lo = config.min_total_s - rests;
    const double hi = config.max_total_s - rests;
    greedy_fit(groups, profile, hi, config);
    const double t = clips_total(groups);
    if ((t >= lo && t <= hi) || dp_fit(groups, profile, lo, hi, config)) {
      return assemble(request.session_id, false, groups, config.rest_s, profile);
    }
  }
  throw PoolExhaustedError(order.front(), "no emotion set fits the session duration window");
}

}  // namespace emobase::protocol
