#include "emobase/errors.hpp"
#include "emobase/rng.hpp"
#include "emobase/types.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

namespace emobase {

namespace {
constexpr std::array<std::string_view, kChannelCount> kChannelNames{"HR", "HRV", "HRP",
                                                                    "BR", "GSR", "SKT"};
constexpr std::array<std::string_view, 7> kEmotionNames{
    "Rest", "Fear", "SadAnger", "AweRev", "Disgust", "JoyAmus", "Content"};
}  // namespace

std::string_view channel_name(Channel channel) { return kChannelNames[index_of(channel)]; }

Channel parse_channel(std::string_view name) {
  for (std::size_t i = 0; i < kChannelNames.size(); ++i) {
    if (kChannelNames[i] == name) return static_cast<Channel>(i);
  }
  throw FormatError("unknown channel '" + std::string(name) + "'");
}

std::optional<Emotion> emotion_from_code(int code) {
  if (code < 0 || code > 6) return std::nullopt;
  return static_cast<Emotion>(code);
}

std::string_view emotion_name(Emotion e) { return kEmotionNames[static_cast<std::size_t>(e)]; }

Emotion parse_emotion(std::string_view text) {
  for (std::size_t i = 0; i < kEmotionNames.size(); ++i) {
    if (kEmotionNames[i] == text) return static_cast<Emotion>(i);
  }
  int code = -1;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), code);
  if (ec == std::errc() && ptr == text.data() + text.size()) {
    if (auto e = emotion_from_code(code)) return *e;
  }
  throw FormatError("unknown emotion '" + std::string(text) + "'");
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  // Partial Fisher-Yates: the first k slots end up holding the sample.
  for (std::size_t i = 0; i < k && i < n; ++i) {
    std::swap(pool[i], pool[i + index(n - i)]);
  }
  pool.resize(std::min(k, n));
  return pool;
}

}  // namespace emobase
