#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace emobase {

// Physiological channels. HR/HRV/HRP/BR come from the chest strap, GSR/SKT
// from the wrist device.
enum class Channel : std::uint8_t { HR, HRV, HRP, BR, GSR, SKT };

inline constexpr std::size_t kChannelCount = 6;
inline constexpr std::array<Channel, kChannelCount> kAllChannels{
    Channel::HR, Channel::HRV, Channel::HRP, Channel::BR, Channel::GSR, Channel::SKT};

std::string_view channel_name(Channel channel);
Channel parse_channel(std::string_view name);

// SKT drifts monotonically within a session and leaks session position.
constexpr bool is_leak_prone(Channel channel) { return channel == Channel::SKT; }

constexpr std::size_t index_of(Channel channel) { return static_cast<std::size_t>(channel); }

// Label codes are fixed: 0 is rest, 1..6 are the targeted emotions.
enum class Emotion : std::uint8_t {
  Rest = 0,
  Fear = 1,
  SadAnger = 2,
  AweRev = 3,
  Disgust = 4,
  JoyAmus = 5,
  Content = 6,
};

inline constexpr std::array<Emotion, 6> kTargetEmotions{
    Emotion::Fear,    Emotion::SadAnger, Emotion::AweRev,
    Emotion::Disgust, Emotion::JoyAmus,  Emotion::Content};

enum class Valence : std::uint8_t { Neutral, Negative, Positive };

constexpr int code_of(Emotion e) { return static_cast<int>(e); }
std::optional<Emotion> emotion_from_code(int code);
std::string_view emotion_name(Emotion e);
// Accepts either the name ("Fear") or the numeric code ("1").
Emotion parse_emotion(std::string_view text);

constexpr Valence valence_of(Emotion e) {
  switch (e) {
    case Emotion::Fear:
    case Emotion::SadAnger:
    case Emotion::Disgust:
      return Valence::Negative;
    case Emotion::AweRev:
    case Emotion::JoyAmus:
    case Emotion::Content:
      return Valence::Positive;
    case Emotion::Rest:
      break;
  }
  return Valence::Neutral;
}

}  // namespace emobase
