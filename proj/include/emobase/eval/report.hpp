#pragma once

#include "emobase/eval/confusion.hpp"
#include "emobase/learn/forest.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace emobase::eval {

struct SetupDescriptor {
  std::string classifier = "rf";
  std::vector<std::string> features;  // active columns, canonical order
  std::optional<int> min_rank;
  std::size_t window = 32;
  bool binary = false;
  std::string method = "cv";  // "cv" or "oob"
  std::size_t folds = 10;     // 0 for oob
};

struct EvalReport {
  SetupDescriptor setup;
  std::uint64_t seed = 0;
  ConfusionMatrix confusion;
  // OOB error, or the mean of the per-fold errors.
  double mean_error = 0.0;
  std::vector<double> fold_errors;
  // Fold of every instance (cv only), kept so the split can be audited.
  std::vector<int> fold_of;
  // Held-out prediction per instance; -1 when a row was never out of bag.
  std::vector<int> predictions;
  std::size_t instances = 0;
  double elapsed_ms = 0.0;  // not part of the reproducible content
};

// with_timing = false gives the canonical form used for equality checks.
nlohmann::json report_to_json(const EvalReport& report, bool with_timing = true);
EvalReport report_from_json(const nlohmann::json& j);

struct SweepPoint {
  std::size_t window = 0;
  EvalReport six_class;
  EvalReport binary;
};

struct AblationResult {
  EvalReport with_skt;
  EvalReport without_skt;

  double delta() const { return without_skt.mean_error - with_skt.mean_error; }
};

nlohmann::json sweep_to_json(std::span<const SweepPoint> points, bool with_timing = true);
nlohmann::json ablation_to_json(const AblationResult& result, bool with_timing = true);
nlohmann::json comparison_to_json(std::span<const EvalReport> reports, bool with_timing = true);

std::string class_display_name(int label, bool binary);

// Plain-text tables. Errors print as percentages with one decimal.
std::string render_confusion(const EvalReport& report);
std::string render_sweep(std::span<const SweepPoint> points);
std::string render_ablation(const AblationResult& result);
std::string render_comparison(std::span<const EvalReport> reports);
std::string render_importance(std::span<const learn::ImportanceEntry> entries);

}  // namespace emobase::eval
