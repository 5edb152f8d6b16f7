#pragma once

#include "emobase/learn/classifier.hpp"

#include "json.hpp"

#include <filesystem>

namespace emobase::learn {

inline constexpr int kModelSchemaVersion = 1;

// {"schema_version": 1, "kind": "rf" | "tree" | "ann" | "svm", "model": {...}}
// Doubles are written with round-trip precision, so a reloaded model makes
// bit-identical predictions.
nlohmann::json model_to_json(const Model& model);
Model model_from_json(const nlohmann::json& j);

void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

}  // namespace emobase::learn
