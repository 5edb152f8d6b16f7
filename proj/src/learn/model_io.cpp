#include "emobase/learn/model_io.hpp"

#include "emobase/errors.hpp"

#include <fstream>

namespace emobase::learn {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return {{"cols", m.cols()}, {"rows", std::move(rows)}};
}

Matrix matrix_from_json(const json& j) {
  Matrix m(0, j.at("cols").get<std::size_t>());
  for (const auto& r : j.at("rows")) m.append_row(r.get<std::vector<double>>());
  return m;
}

json tree_to_json(const TreeModel& t) {
  std::vector<int> feature, left, right;
  std::vector<double> threshold, weight, decrease;
  json dist = json::array();
  for (const auto& n : t.nodes) {
    feature.push_back(n.feature);
    left.push_back(n.left);
    right.push_back(n.right);
    threshold.push_back(n.threshold);
    weight.push_back(n.weight);
    decrease.push_back(n.decrease);
    dist.push_back(n.is_leaf() ? json(n.distribution) : json(nullptr));
  }
  return {{"classes", t.classes},
          {"n_features", t.n_features},
          {"params",
           {{"min_leaf", t.params.min_leaf},
            {"max_depth", t.params.max_depth},
            {"mtry", t.params.mtry}}},
          {"nodes",
           {{"feature", feature},
            {"threshold", threshold},
            {"left", left},
            {"right", right},
            {"weight", weight},
            {"decrease", decrease},
            {"distribution", std::move(dist)}}}};
}

TreeModel tree_from_json(const json& j) {
  TreeModel t;
  t.classes = j.at("classes").get<std::vector<int>>();
  t.n_features = j.at("n_features").get<std::size_t>();
  const auto& p = j.at("params");
  t.params.min_leaf = p.at("min_leaf").get<std::size_t>();
  t.params.max_depth = p.at("max_depth").get<std::size_t>();
  t.params.mtry = p.at("mtry").get<std::size_t>();
  const auto& n = j.at("nodes");
  const auto feature = n.at("feature").get<std::vector<int>>();
  const auto threshold = n.at("threshold").get<std::vector<double>>();
  const auto left = n.at("left").get<std::vector<int>>();
  const auto right = n.at("right").get<std::vector<int>>();
  const auto weight = n.at("weight").get<std::vector<double>>();
  const auto decrease = n.at("decrease").get<std::vector<double>>();
  const auto& dist = n.at("distribution");
  const std::size_t count = feature.size();
  if (threshold.size() != count || left.size() != count || right.size() != count ||
      weight.size() != count || decrease.size() != count || dist.size() != count) {
    throw FormatError("tree node arrays differ in length");
  }
  t.nodes.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto& node = t.nodes[i];
    node.feature = feature[i];
    node.threshold = threshold[i];
    node.left = left[i];
    node.right = right[i];
    node.weight = weight[i];
    node.decrease = decrease[i];
    if (node.is_leaf()) {
      node.distribution = dist[i].get<std::vector<double>>();
    } else if (node.left < 0 || node.right < 0 || static_cast<std::size_t>(node.left) >= count ||
               static_cast<std::size_t>(node.right) >= count) {
      throw FormatError("tree node has invalid children");
    }
  }
  if (count == 0) throw FormatError("tree has no nodes");
  return t;
}

constexpr std::string_view kDigits = "0123456789abcdefghijklmnopqrstuvwxyz";

// One base-36 digit per row; multiplicities above 35 saturate (only zero vs
// non-zero matters after training).
std::string encode_bag(const std::vector<std::uint8_t>& bag) {
  std::string s(bag.size(), '0');
  for (std::size_t i = 0; i < bag.size(); ++i) s[i] = kDigits[std::min<std::uint8_t>(bag[i], 35)];
  return s;
}

std::vector<std::uint8_t> decode_bag(const std::string& s) {
  std::vector<std::uint8_t> bag(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto pos = kDigits.find(s[i]);
    if (pos == std::string_view::npos) throw FormatError("invalid in-bag encoding");
    bag[i] = static_cast<std::uint8_t>(pos);
  }
  return bag;
}

json forest_to_json(const ForestModel& f) {
  json trees = json::array();
  for (const auto& t : f.trees) trees.push_back(tree_to_json(t));
  json bags = json::array();
  for (const auto& b : f.in_bag) bags.push_back(encode_bag(b));
  json oob = json::array();
  for (const auto& p : f.oob_predictions) oob.push_back(p ? json(*p) : json(nullptr));
  return {{"classes", f.classes},
          {"feature_names", f.feature_names},
          {"n_features", f.n_features},
          {"mtry", f.mtry},
          {"seed", f.seed},
          {"oob_error", f.oob_error},
          {"importance", f.importance},
          {"oob_predictions", std::move(oob)},
          {"in_bag", std::move(bags)},
          {"trees", std::move(trees)}};
}

ForestModel forest_from_json(const json& j) {
  ForestModel f;
  f.classes = j.at("classes").get<std::vector<int>>();
  f.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  f.n_features = j.at("n_features").get<std::size_t>();
  f.mtry = j.at("mtry").get<std::size_t>();
  f.seed = j.at("seed").get<std::uint64_t>();
  f.oob_error = j.at("oob_error").get<double>();
  f.importance = j.at("importance").get<std::vector<double>>();
  for (const auto& p : j.at("oob_predictions")) {
    f.oob_predictions.push_back(p.is_null() ? std::nullopt : std::optional<int>(p.get<int>()));
  }
  for (const auto& b : j.at("in_bag")) f.in_bag.push_back(decode_bag(b.get<std::string>()));
  for (const auto& t : j.at("trees")) f.trees.push_back(tree_from_json(t));
  if (f.trees.empty()) throw FormatError("forest has no trees");
  return f;
}

json ann_to_json(const AnnModel& m) {
  return {{"classes", m.classes},
          {"seed", m.seed},
          {"final_loss", m.final_loss},
          {"params",
           {{"hidden", m.params.hidden},
            {"activation", activation_name(m.params.activation)},
            {"learning_rate", m.params.learning_rate},
            {"epochs", m.params.epochs},
            {"batch_size", m.params.batch_size}}},
          {"standardizer", {{"mean", m.standardizer.mean}, {"scale", m.standardizer.scale}}},
          {"network",
           {{"inputs", m.network.inputs()},
            {"hidden", m.network.hidden()},
            {"outputs", m.network.outputs()},
            {"activation", activation_name(m.network.activation())},
            {"parameters", m.network.parameters()}}}};
}

AnnModel ann_from_json(const json& j) {
  AnnModel m;
  m.classes = j.at("classes").get<std::vector<int>>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.final_loss = j.at("final_loss").get<double>();
  const auto& p = j.at("params");
  m.params.hidden = p.at("hidden").get<std::size_t>();
  m.params.activation = parse_activation(p.at("activation").get<std::string>());
  m.params.learning_rate = p.at("learning_rate").get<double>();
  m.params.epochs = p.at("epochs").get<std::size_t>();
  m.params.batch_size = p.at("batch_size").get<std::size_t>();
  m.standardizer.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
  m.standardizer.scale = j.at("standardizer").at("scale").get<std::vector<double>>();
  const auto& n = j.at("network");
  m.network = AnnNetwork(n.at("inputs").get<std::size_t>(), n.at("hidden").get<std::size_t>(),
                         n.at("outputs").get<std::size_t>(),
                         parse_activation(n.at("activation").get<std::string>()));
  auto params = n.at("parameters").get<std::vector<double>>();
  if (params.size() != m.network.parameter_count()) throw FormatError("network parameter count mismatch");
  m.network.parameters() = std::move(params);
  return m;
}

json svm_to_json(const SvmModel& m) {
  json machines = json::array();
  for (const auto& b : m.machines) {
    machines.push_back({{"positive_label", b.positive_label},
                        {"negative_label", b.negative_label},
                        {"rho", b.rho},
                        {"iterations", b.iterations},
                        {"converged", b.converged},
                        {"coef", b.coef},
                        {"sv_rows", b.sv_rows},
                        {"support_vectors", matrix_to_json(b.support_vectors)}});
  }
  return {{"classes", m.classes},
          {"converged", m.converged},
          {"params",
           {{"gamma", m.params.gamma},
            {"cost", m.params.cost},
            {"tolerance", m.params.tolerance},
            {"max_iterations", m.params.max_iterations},
            {"standardize", m.params.standardize}}},
          {"standardizer", {{"mean", m.standardizer.mean}, {"scale", m.standardizer.scale}}},
          {"machines", std::move(machines)}};
}

SvmModel svm_from_json(const json& j) {
  SvmModel m;
  m.classes = j.at("classes").get<std::vector<int>>();
  m.converged = j.at("converged").get<bool>();
  const auto& p = j.at("params");
  m.params.gamma = p.at("gamma").get<double>();
  m.params.cost = p.at("cost").get<double>();
  m.params.tolerance = p.at("tolerance").get<double>();
  m.params.max_iterations = p.at("max_iterations").get<std::size_t>();
  m.params.standardize = p.at("standardize").get<bool>();
  m.standardizer.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
  m.standardizer.scale = j.at("standardizer").at("scale").get<std::vector<double>>();
  for (const auto& b : j.at("machines")) {
    BinarySvm s;
    s.positive_label = b.at("positive_label").get<int>();
    s.negative_label = b.at("negative_label").get<int>();
    s.rho = b.at("rho").get<double>();
    s.iterations = b.at("iterations").get<std::size_t>();
    s.converged = b.at("converged").get<bool>();
    s.coef = b.at("coef").get<std::vector<double>>();
    s.sv_rows = b.at("sv_rows").get<std::vector<std::size_t>>();
    s.support_vectors = matrix_from_json(b.at("support_vectors"));
    if (s.support_vectors.rows() != s.coef.size()) throw FormatError("support vector count mismatch");
    m.machines.push_back(std::move(s));
  }
  return m;
}

}  // namespace

json model_to_json(const Model& model) {
  json body = std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TreeModel>) return tree_to_json(m);
        else if constexpr (std::is_same_v<T, ForestModel>) return forest_to_json(m);
        else if constexpr (std::is_same_v<T, AnnModel>) return ann_to_json(m);
        else return svm_to_json(m);
      },
      model);
  return {{"schema_version", kModelSchemaVersion},
          {"kind", classifier_name(kind_of(model))},
          {"model", std::move(body)}};
}

Model model_from_json(const json& j) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kModelSchemaVersion) {
      throw FormatError("unsupported model schema version " + std::to_string(version));
    }
    const auto kind = parse_classifier(j.at("kind").get<std::string>());
    const auto& body = j.at("model");
    switch (kind) {
      case ClassifierKind::DecisionTree: return tree_from_json(body);
      case ClassifierKind::RandomForest: return forest_from_json(body);
      case ClassifierKind::NeuralNetwork: return ann_from_json(body);
      case ClassifierKind::Svm: return svm_from_json(body);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  }
  throw FormatError("unknown model kind");
}

void save_model(const std::filesystem::path& path, const Model& model) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file " + path.string());
  out << model_to_json(model).dump();
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot read model file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError(std::string("model file is not JSON: ") + e.what());
  }
  return model_from_json(j);
}

}  // namespace emobase::learn
