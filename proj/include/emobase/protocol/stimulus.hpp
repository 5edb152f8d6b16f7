#pragma once

#include "emobase/errors.hpp"
#include "emobase/types.hpp"

#include <array>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace emobase::protocol {

enum class RecencyClass : std::uint8_t { Contemporary, Classic };

struct StimulusClip {
  std::string clip_id;
  std::string title;
  std::string source_url;  // opaque; the core never fetches media
  Emotion target = Emotion::Fear;
  std::set<std::string> tags;
  double duration_s = 0.0;
  bool is_compilation = false;
  bool is_personal = false;
  RecencyClass recency = RecencyClass::Contemporary;
};

using Pool = std::vector<StimulusClip>;

// Throws ValidationError: empty id, non-positive duration, Rest target,
// compilation aimed at a negative emotion.
void validate_clip(const StimulusClip& clip);
// Also rejects duplicate clip ids.
void validate_pool(const Pool& pool);
const StimulusClip* find_clip(const Pool& pool, const std::string& clip_id);

struct Ranking {
  std::string clip_id;
  std::string session_id;
  int score = 0;                          // 1..10
  std::optional<Emotion> evoked;          // set only when it differs from the target
  std::optional<std::pair<double, double>> effective_span;
  std::string notes;
};

void validate_ranking(const Ranking& ranking);

struct RestBlock {
  double duration_s = 0.0;
};

struct ClipBlock {
  std::string clip_id;
  Emotion target = Emotion::Fear;
  double duration_s = 0.0;
};

using PlanItem = std::variant<RestBlock, ClipBlock>;

struct SessionPlan {
  std::string session_id;
  bool personalized = false;
  std::vector<PlanItem> items;
  double planned_total_s = 0.0;
  std::vector<Emotion> emotions_covered;  // group order
};

// Order in which emotion groups are played: negatives first, close on a
// positive note.
inline constexpr std::array<Emotion, 6> kPlayOrder{Emotion::SadAnger, Emotion::Fear,    Emotion::Disgust,
                                                   Emotion::AweRev,   Emotion::Content, Emotion::JoyAmus};
int play_rank(Emotion e);

// More negative than positive groups.
bool predominantly_negative(const SessionPlan& plan);

class PoolExhaustedError : public Error {
 public:
  explicit PoolExhaustedError(Emotion emotion, const std::string& detail = {});
  const char* code() const noexcept override { return "PoolExhaustedError"; }
  Emotion emotion() const { return emotion_; }

 private:
  Emotion emotion_;
};

}  // namespace emobase::protocol
