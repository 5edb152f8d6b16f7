#include "emobase/learn/ann.hpp"

#include "emobase/errors.hpp"
#include "emobase/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace emobase::learn {

std::string_view activation_name(Activation a) {
  return a == Activation::Logistic ? "logistic" : "gaussian-rbf";
}

Activation parse_activation(std::string_view name) {
  if (name == "logistic") return Activation::Logistic;
  if (name == "gaussian-rbf" || name == "rbf") return Activation::GaussianRbf;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

AnnNetwork::AnnNetwork(std::size_t inputs, std::size_t hidden, std::size_t outputs,
                       Activation activation)
    : inputs_(inputs),
      hidden_(hidden),
      outputs_(outputs),
      activation_(activation),
      params_(hidden * inputs + hidden + outputs * hidden + outputs, 0.0) {}

double AnnNetwork::forward(std::span<const double> x, std::vector<double>& pre,
                           std::vector<double>& act, std::vector<double>& prob) const {
  const double* w1 = params_.data();
  const double* b1 = w1 + hidden_ * inputs_;
  const double* w2 = b1 + hidden_;
  const double* b2 = w2 + outputs_ * hidden_;
  pre.resize(hidden_);
  act.resize(hidden_);
  prob.resize(outputs_);
  for (std::size_t j = 0; j < hidden_; ++j) {
    double a = b1[j];
    for (std::size_t i = 0; i < inputs_; ++i) a += w1[j * inputs_ + i] * x[i];
    pre[j] = a;
    act[j] = activation_ == Activation::Logistic ? 1.0 / (1.0 + std::exp(-a)) : std::exp(-a * a);
  }
  double z_max = -INFINITY;
  for (std::size_t k = 0; k < outputs_; ++k) {
    double z = b2[k];
    for (std::size_t j = 0; j < hidden_; ++j) z += w2[k * hidden_ + j] * act[j];
    prob[k] = z;
    z_max = std::max(z_max, z);
  }
  double norm = 0.0;
  for (auto& z : prob) {
    z = std::exp(z - z_max);
    norm += z;
  }
  for (auto& z : prob) z /= norm;
  return std::log(norm) + z_max;  // log-sum-exp of the logits
}

std::vector<double> AnnNetwork::probabilities(std::span<const double> x) const {
  if (x.size() != inputs_) throw PredictError("feature vector has wrong dimension");
  std::vector<double> pre, act, prob;
  forward(x, pre, act, prob);
  return prob;
}

double AnnNetwork::loss(const Matrix& x, std::span<const std::size_t> targets,
                        std::span<const std::size_t> rows) const {
  std::vector<double> pre, act, prob;
  const std::size_t n = rows.empty() ? x.rows() : rows.size();
  double total = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    const std::size_t r = rows.empty() ? b : rows[b];
    forward(x.row(r), pre, act, prob);
    total -= std::log(std::max(prob[targets[r]], 1e-300));
  }
  return total / static_cast<double>(n);
}

double AnnNetwork::loss_and_gradient(const Matrix& x, std::span<const std::size_t> targets,
                                     std::vector<double>& grad,
                                     std::span<const std::size_t> rows) const {
  grad.assign(params_.size(), 0.0);
  double* g_w1 = grad.data();
  double* g_b1 = g_w1 + hidden_ * inputs_;
  double* g_w2 = g_b1 + hidden_;
  double* g_b2 = g_w2 + outputs_ * hidden_;
  const double* w2 = params_.data() + hidden_ * inputs_ + hidden_;

  const std::size_t n = rows.empty() ? x.rows() : rows.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> pre, act, prob;
  std::vector<double> d_hidden(hidden_);
  double total = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    const std::size_t r = rows.empty() ? b : rows[b];
    const auto xr = x.row(r);
    forward(xr, pre, act, prob);
    const std::size_t t = targets[r];
    total -= std::log(std::max(prob[t], 1e-300));

    std::fill(d_hidden.begin(), d_hidden.end(), 0.0);
    for (std::size_t k = 0; k < outputs_; ++k) {
      const double dz = (prob[k] - (k == t ? 1.0 : 0.0)) * inv_n;
      g_b2[k] += dz;
      for (std::size_t j = 0; j < hidden_; ++j) {
        g_w2[k * hidden_ + j] += dz * act[j];
        d_hidden[j] += w2[k * hidden_ + j] * dz;
      }
    }
    for (std::size_t j = 0; j < hidden_; ++j) {
      const double deriv = activation_ == Activation::Logistic
                               ? act[j] * (1.0 - act[j])
                               : -2.0 * pre[j] * act[j];
      const double da = d_hidden[j] * deriv;
      g_b1[j] += da;
      for (std::size_t i = 0; i < inputs_; ++i) g_w1[j * inputs_ + i] += da * xr[i];
    }
  }
  return total * inv_n;
}

std::vector<double> AnnModel::predict_proba(std::span<const double> x) const {
  return network.probabilities(standardizer.apply(x));
}

int AnnModel::predict(std::span<const double> x) const {
  const auto p = predict_proba(x);
  std::size_t best = 0;
  for (std::size_t k = 1; k < p.size(); ++k) {
    if (p[k] > p[best]) best = k;
  }
  return classes[best];
}

AnnModel train_ann(const Samples& data, const AnnParams& params, std::uint64_t seed) {
  const std::size_t n = data.size();
  if (n == 0) throw TrainError("cannot train a network on an empty dataset");
  if (params.hidden == 0 || params.batch_size == 0) throw ConfigError("hidden and batch size must be >= 1");
  if (!(params.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");

  AnnModel model;
  model.params = params;
  model.seed = seed;
  model.classes = distinct_labels(data.y);
  model.standardizer = Standardizer::fit(data.x);
  const Matrix x = model.standardizer.apply(data.x);
  std::vector<std::size_t> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    targets[i] = static_cast<std::size_t>(class_index(model.classes, data.y[i]));
  }

  const std::size_t p = data.dimension();
  model.network = AnnNetwork(p, params.hidden, model.classes.size(), params.activation);
  Rng rng(seed);
  {
    auto& w = model.network.parameters();
    const std::size_t h = params.hidden;
    const double r1 = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(p, 1)));
    const double r2 = 1.0 / std::sqrt(static_cast<double>(h));
    for (std::size_t i = 0; i < h * p; ++i) w[i] = rng.uniform(-r1, r1);
    const std::size_t w2_begin = h * p + h;
    for (std::size_t i = 0; i < model.classes.size() * h; ++i) w[w2_begin + i] = rng.uniform(-r2, r2);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0U);
  std::vector<double> grad;
  auto& w = model.network.parameters();
  double epoch_loss = 0.0;
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    rng.shuffle(order);
    epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += params.batch_size) {
      const std::size_t len = std::min(params.batch_size, n - start);
      std::span<const std::size_t> batch(order.data() + start, len);
      const double loss = model.network.loss_and_gradient(x, targets, grad, batch);
      if (!std::isfinite(loss)) {
        throw TrainError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                         std::to_string(start / params.batch_size) + " (learning rate " +
                         std::to_string(params.learning_rate) + ")");
      }
      epoch_loss += loss * static_cast<double>(len);
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= params.learning_rate * grad[i];
    }
    epoch_loss /= static_cast<double>(n);
  }
  model.final_loss = epoch_loss;
  return model;
}

}  // namespace emobase::learn
