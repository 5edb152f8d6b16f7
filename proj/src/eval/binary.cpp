#include "emobase/eval/binary.hpp"

#include "emobase/errors.hpp"

#include <string>

namespace emobase::eval {

int binary_code(Emotion e) {
  switch (valence_of(e)) {
    case Valence::Negative: return kBinaryNegative;
    case Valence::Positive: return kBinaryPositive;
    case Valence::Neutral: break;
  }
  throw MappingError("label " + std::string(emotion_name(e)) + " has no binary class");
}

int binary_code_of(int emotion_code) {
  const auto e = emotion_from_code(emotion_code);
  if (!e) throw MappingError("label code " + std::to_string(emotion_code) + " is not an emotion");
  return binary_code(*e);
}

std::string_view binary_name(int code) { return code == kBinaryNegative ? "Negative" : "Positive"; }

std::vector<int> binarize(std::span<const int> emotion_codes) {
  std::vector<int> out;
  out.reserve(emotion_codes.size());
  for (int c : emotion_codes) out.push_back(binary_code_of(c));
  return out;
}

ConfusionMatrix collapse_binary(const ConfusionMatrix& six_class) {
  ConfusionMatrix out({kBinaryNegative, kBinaryPositive});
  const auto& labels = six_class.labels();
  for (std::size_t p = 0; p < labels.size(); ++p) {
    const int bp = binary_code_of(labels[p]);
    for (std::size_t a = 0; a < labels.size(); ++a) {
      const int ba = binary_code_of(labels[a]);
      out.add(bp, ba, six_class.count(p, a));
    }
  }
  return out;
}

}  // namespace emobase::eval
