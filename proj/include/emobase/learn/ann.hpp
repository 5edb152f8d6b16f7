#pragma once

#include "emobase/learn/samples.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace emobase::learn {

enum class Activation { Logistic, GaussianRbf };

std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

struct AnnParams {
  std::size_t hidden = 10;
  Activation activation = Activation::Logistic;
  double learning_rate = 0.01;
  std::size_t epochs = 500;
  std::size_t batch_size = 32;
};

// One hidden layer, softmax output, mean cross-entropy loss. Parameters are
// stored flat: W1 (hidden x inputs), b1, W2 (outputs x hidden), b2.
class AnnNetwork {
 public:
  AnnNetwork() = default;
  AnnNetwork(std::size_t inputs, std::size_t hidden, std::size_t outputs, Activation activation);

  std::size_t inputs() const { return inputs_; }
  std::size_t hidden() const { return hidden_; }
  std::size_t outputs() const { return outputs_; }
  Activation activation() const { return activation_; }

  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }
  std::size_t parameter_count() const { return params_.size(); }

  std::vector<double> probabilities(std::span<const double> x) const;

  // Mean cross-entropy over `rows` (all rows when empty); targets are class
  // positions. The gradient w.r.t. parameters() is written to `grad`.
  double loss(const Matrix& x, std::span<const std::size_t> targets,
              std::span<const std::size_t> rows = {}) const;
  double loss_and_gradient(const Matrix& x, std::span<const std::size_t> targets,
                           std::vector<double>& grad,
                           std::span<const std::size_t> rows = {}) const;

 private:
  double forward(std::span<const double> x, std::vector<double>& pre, std::vector<double>& act,
                 std::vector<double>& prob) const;

  std::size_t inputs_ = 0;
  std::size_t hidden_ = 0;
  std::size_t outputs_ = 0;
  Activation activation_ = Activation::Logistic;
  std::vector<double> params_;
};

struct AnnModel {
  AnnNetwork network;
  Standardizer standardizer;
  std::vector<int> classes;
  AnnParams params;
  std::uint64_t seed = 0;
  double final_loss = 0.0;

  std::vector<double> predict_proba(std::span<const double> x) const;
  int predict(std::span<const double> x) const;
};

// Mini-batch gradient descent with backpropagation on standardized inputs.
// Throws TrainError if the loss becomes non-finite.
AnnModel train_ann(const Samples& data, const AnnParams& params, std::uint64_t seed);

}  // namespace emobase::learn
