#pragma once

#include "emobase/learn/ann.hpp"
#include "emobase/learn/forest.hpp"
#include "emobase/learn/svm.hpp"
#include "emobase/learn/tree.hpp"

#include <string_view>
#include <variant>

namespace emobase::learn {

enum class ClassifierKind { DecisionTree, RandomForest, NeuralNetwork, Svm };

std::string_view classifier_name(ClassifierKind kind);     // "tree", "rf", "ann", "svm"
std::string_view classifier_title(ClassifierKind kind);    // "Decision Tree", ...
ClassifierKind parse_classifier(std::string_view name);

struct ClassifierConfig {
  ClassifierKind kind = ClassifierKind::RandomForest;
  TreeParams tree;
  ForestParams forest;
  AnnParams ann;
  SvmParams svm;
};

using Model = std::variant<TreeModel, ForestModel, AnnModel, SvmModel>;

Model train(const ClassifierConfig& config, const Samples& data, std::uint64_t seed);
int predict(const Model& model, std::span<const double> x);
ClassifierKind kind_of(const Model& model);
std::size_t input_dimension(const Model& model);

}  // namespace emobase::learn
