#pragma once

#include "emobase/eval/confusion.hpp"
#include "emobase/types.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace emobase::eval {

// Negative = {Fear, SadAnger, Disgust}, Positive = {AweRev, JoyAmus, Content}.
inline constexpr int kBinaryNegative = 0;
inline constexpr int kBinaryPositive = 1;

// Throws MappingError for Rest or an unknown code.
int binary_code(Emotion e);
int binary_code_of(int emotion_code);
std::string_view binary_name(int binary_code);

std::vector<int> binarize(std::span<const int> emotion_codes);
// Merges the rows and columns of a six-class matrix into the two groups.
// Within-group confusions become correct, so the collapsed error never
// exceeds the original.
ConfusionMatrix collapse_binary(const ConfusionMatrix& six_class);

}  // namespace emobase::eval
