#include "emobase/learn/classifier.hpp"

#include "emobase/errors.hpp"

#include <string>

namespace emobase::learn {

std::string_view classifier_name(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::DecisionTree: return "tree";
    case ClassifierKind::RandomForest: return "rf";
    case ClassifierKind::NeuralNetwork: return "ann";
    case ClassifierKind::Svm: return "svm";
  }
  return "rf";
}

std::string_view classifier_title(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::DecisionTree: return "Decision Tree";
    case ClassifierKind::RandomForest: return "Random Forests";
    case ClassifierKind::NeuralNetwork: return "Artificial Neural Network";
    case ClassifierKind::Svm: return "Support Vector Machines";
  }
  return "";
}

ClassifierKind parse_classifier(std::string_view name) {
  if (name == "tree" || name == "dt") return ClassifierKind::DecisionTree;
  if (name == "rf" || name == "forest") return ClassifierKind::RandomForest;
  if (name == "ann" || name == "nn") return ClassifierKind::NeuralNetwork;
  if (name == "svm") return ClassifierKind::Svm;
  throw ConfigError("unknown classifier '" + std::string(name) + "'");
}

Model train(const ClassifierConfig& config, const Samples& data, std::uint64_t seed) {
  switch (config.kind) {
    case ClassifierKind::DecisionTree: return train_tree(data, config.tree, seed);
    case ClassifierKind::RandomForest: return train_forest(data, config.forest, seed);
    case ClassifierKind::NeuralNetwork: return train_ann(data, config.ann, seed);
    case ClassifierKind::Svm: return train_svm(data, config.svm);
  }
  throw ConfigError("unknown classifier kind");
}

int predict(const Model& model, std::span<const double> x) {
  return std::visit([&](const auto& m) { return m.predict(x); }, model);
}

ClassifierKind kind_of(const Model& model) {
  return static_cast<ClassifierKind>(model.index());
}

std::size_t input_dimension(const Model& model) {
  struct {
    std::size_t operator()(const TreeModel& m) const { return m.n_features; }
    std::size_t operator()(const ForestModel& m) const { return m.n_features; }
    std::size_t operator()(const AnnModel& m) const { return m.network.inputs(); }
    std::size_t operator()(const SvmModel& m) const { return m.standardizer.mean.size(); }
  } visitor;
  return std::visit(visitor, model);
}

}  // namespace emobase::learn
