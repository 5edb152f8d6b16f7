#include "emobase/eval/report.hpp"

#include "emobase/errors.hpp"
#include "emobase/eval/binary.hpp"
#include "emobase/learn/classifier.hpp"
#include "emobase/types.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace emobase::eval {

using nlohmann::json;

namespace {

json confusion_to_json(const ConfusionMatrix& m) {
  json classes = json::array();
  for (std::size_t a = 0; a < m.labels().size(); ++a) {
    classes.push_back({{"label", m.labels()[a]}, {"count", m.column_total(a)}, {"error", m.class_error(a)}});
  }
  return {{"labels", m.labels()}, {"counts", m.counts()}, {"classes", classes}, {"error", m.error()}};
}

ConfusionMatrix confusion_from_json(const json& j) {
  ConfusionMatrix m(j.at("labels").get<std::vector<int>>());
  const auto counts = j.at("counts").get<std::vector<std::vector<std::size_t>>>();
  if (counts.size() != m.labels().size()) throw FormatError("confusion counts do not match labels");
  for (std::size_t p = 0; p < counts.size(); ++p) {
    if (counts[p].size() != m.labels().size()) throw FormatError("confusion counts do not match labels");
    for (std::size_t a = 0; a < counts[p].size(); ++a) m.add(m.labels()[p], m.labels()[a], counts[p][a]);
  }
  return m;
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
  return buf;
}

std::string pad(std::string s, std::size_t width, bool left = false) {
  if (s.size() >= width) return s;
  return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

std::string title_of(const std::string& classifier) {
  try {
    return std::string(learn::classifier_title(learn::parse_classifier(classifier)));
  } catch (const ConfigError&) {
    return classifier;
  }
}

}  // namespace

json report_to_json(const EvalReport& r, bool with_timing) {
  json setup = {{"classifier", r.setup.classifier},
                {"features", r.setup.features},
                {"min_rank", r.setup.min_rank ? json(*r.setup.min_rank) : json(nullptr)},
                {"window", r.setup.window},
                {"binary", r.setup.binary},
                {"method", r.setup.method},
                {"folds", r.setup.folds}};
  json j = {{"schema_version", 1},
            {"setup", setup},
            {"seed", r.seed},
            {"instances", r.instances},
            {"mean_error", r.mean_error},
            {"fold_errors", r.fold_errors},
            {"fold_of", r.fold_of},
            {"predictions", r.predictions},
            {"confusion", confusion_to_json(r.confusion)}};
  if (with_timing) j["elapsed_ms"] = r.elapsed_ms;
  return j;
}

EvalReport report_from_json(const json& j) {
  try {
    EvalReport r;
    const auto& s = j.at("setup");
    r.setup.classifier = s.at("classifier").get<std::string>();
    r.setup.features = s.at("features").get<std::vector<std::string>>();
    if (!s.at("min_rank").is_null()) r.setup.min_rank = s.at("min_rank").get<int>();
    r.setup.window = s.at("window").get<std::size_t>();
    r.setup.binary = s.at("binary").get<bool>();
    r.setup.method = s.at("method").get<std::string>();
    r.setup.folds = s.at("folds").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.instances = j.at("instances").get<std::size_t>();
    r.mean_error = j.at("mean_error").get<double>();
    r.fold_errors = j.at("fold_errors").get<std::vector<double>>();
    r.fold_of = j.at("fold_of").get<std::vector<int>>();
    r.predictions = j.at("predictions").get<std::vector<int>>();
    r.confusion = confusion_from_json(j.at("confusion"));
    if (j.contains("elapsed_ms")) r.elapsed_ms = j.at("elapsed_ms").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
}

json sweep_to_json(std::span<const SweepPoint> points, bool with_timing) {
  json rows = json::array();
  for (const auto& p : points) {
    rows.push_back({{"window", p.window},
                    {"six_class", report_to_json(p.six_class, with_timing)},
                    {"binary", report_to_json(p.binary, with_timing)}});
  }
  return {{"schema_version", 1}, {"kind", "window_sweep"}, {"rows", rows}};
}

json ablation_to_json(const AblationResult& r, bool with_timing) {
  return {{"schema_version", 1},
          {"kind", "skt_ablation"},
          {"with_skt", report_to_json(r.with_skt, with_timing)},
          {"without_skt", report_to_json(r.without_skt, with_timing)},
          {"delta", r.delta()}};
}

json comparison_to_json(std::span<const EvalReport> reports, bool with_timing) {
  json rows = json::array();
  for (const auto& r : reports) {
    rows.push_back({{"classifier", r.setup.classifier},
                    {"title", title_of(r.setup.classifier)},
                    {"error", r.mean_error},
                    {"report", report_to_json(r, with_timing)}});
  }
  return {{"schema_version", 1}, {"kind", "classifier_comparison"}, {"rows", rows}};
}

std::string class_display_name(int label, bool binary) {
  if (binary) return std::string(binary_name(label));
  const auto e = emotion_from_code(label);
  return e ? std::string(emotion_name(*e)) : std::to_string(label);
}

std::string render_confusion(const EvalReport& r) {
  const auto& m = r.confusion;
  const auto& labels = m.labels();
  constexpr std::size_t kHead = 14;
  constexpr std::size_t kCell = 10;
  std::ostringstream out;
  out << pad("pred \\ actual", kHead, true);
  for (int l : labels) out << pad(class_display_name(l, r.setup.binary), kCell);
  out << '\n';
  for (std::size_t p = 0; p < labels.size(); ++p) {
    out << pad(class_display_name(labels[p], r.setup.binary), kHead, true);
    for (std::size_t a = 0; a < labels.size(); ++a) out << pad(std::to_string(m.count(p, a)), kCell);
    out << '\n';
  }
  out << pad("class error", kHead, true);
  for (std::size_t a = 0; a < labels.size(); ++a) out << pad(percent(m.class_error(a)), kCell);
  out << '\n';
  out << "average error " << percent(r.mean_error) << " (" << r.setup.method;
  if (r.setup.method == "cv") out << ", " << r.setup.folds << " folds";
  out << ", n=" << r.instances << ")\n";
  return out.str();
}

std::string render_sweep(std::span<const SweepPoint> points) {
  std::ostringstream out;
  out << pad("window", 8, true) << pad("instances", 11) << pad("6 emotions", 12) << pad("binary", 10) << '\n';
  for (const auto& p : points) {
    out << pad(std::to_string(p.window), 8, true) << pad(std::to_string(p.six_class.instances), 11)
        << pad(percent(p.six_class.mean_error), 12) << pad(percent(p.binary.mean_error), 10) << '\n';
  }
  return out.str();
}

std::string render_ablation(const AblationResult& r) {
  std::ostringstream out;
  out << pad("features", 16, true) << pad("error", 10) << '\n';
  out << pad("with SKT", 16, true) << pad(percent(r.with_skt.mean_error), 10) << '\n';
  out << pad("without SKT", 16, true) << pad(percent(r.without_skt.mean_error), 10) << '\n';
  return out.str();
}

std::string render_comparison(std::span<const EvalReport> reports) {
  std::size_t width = 12;
  for (const auto& r : reports) width = std::max(width, title_of(r.setup.classifier).size() + 2);
  std::ostringstream out;
  out << pad("classifier", width, true) << pad("error", 10) << '\n';
  for (const auto& r : reports) {
    out << pad(title_of(r.setup.classifier), width, true) << pad(percent(r.mean_error), 10) << '\n';
  }
  return out.str();
}

std::string render_importance(std::span<const learn::ImportanceEntry> entries) {
  std::ostringstream out;
  out << pad("rank", 6, true) << pad("feature", 20, true) << pad("mean decrease", 14) << '\n';
  std::size_t rank = 1;
  for (const auto& e : entries) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", e.score);
    out << pad(std::to_string(rank++), 6, true) << pad(e.feature, 20, true) << pad(buf, 14) << '\n';
  }
  return out.str();
}

}  // namespace emobase::eval
