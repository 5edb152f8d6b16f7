#pragma once

#include "emobase/protocol/planner.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace emobase::protocol {

// A subject whose responses follow fixed hidden tag weights.
struct SimulatedSubject {
  std::map<TagKey, double> weight;  // true effectiveness in [0, 1]
  double noise = 0.6;               // score noise, in rank points
  // A clip this weak is reported as evoking something else half the time.
  double misfire_below = 0.25;
};

struct SimulationSpec {
  std::size_t clips_per_emotion = 48;
  std::size_t tags_per_emotion = 6;
  std::size_t sessions = 8;
};

struct SimulationRun {
  std::vector<double> mean_rank;  // per generated session
  std::size_t exclusions = 0;
  std::vector<std::string> violations;  // validator findings, should stay empty
};

Pool simulation_pool(const SimulationSpec& spec, std::uint64_t seed);
SimulatedSubject simulated_subject(const Pool& pool, std::uint64_t seed);
int simulated_score(const SimulatedSubject& subject, const StimulusClip& clip, double noise_draw);

// Neutral questionnaire, then generate, rank and ingest session after session.
// Stops early if the pool runs out.
SimulationRun simulate(const SimulationSpec& spec, std::uint64_t seed, const ProtocolConfig& config = {});

// Least-squares slope of y against 0, 1, 2, ...
double trend_slope(const std::vector<double>& y);

}  // namespace emobase::protocol
