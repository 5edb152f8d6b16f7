#pragma once

#include "emobase/errors.hpp"
#include "emobase/learn/samples.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace emobase::learn {

struct SvmParams {
  double gamma = 0.1;
  double cost = 10.0;
  double tolerance = 1e-3;         // maximal-violating-pair gap at termination
  std::size_t max_iterations = 0;  // 0 = max(10^7, 100 n)
  bool standardize = true;
};

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

// Soft-margin RBF machine for one class pair. decision(z) = sum coef_i K(sv_i, z) - rho,
// positive means `positive_label`.
struct BinarySvm {
  int positive_label = 0;
  int negative_label = 0;
  Matrix support_vectors;           // in the model's (possibly standardized) input space
  std::vector<double> coef;         // alpha_i * y_i
  std::vector<std::size_t> sv_rows; // rows of the training set the vectors came from
  double rho = 0.0;
  std::size_t iterations = 0;
  bool converged = true;

  double decision(std::span<const double> z, double gamma) const;
};

// One-vs-one ensemble over all class pairs; prediction by voting, ties to
// the lowest label code.
struct SvmModel {
  std::vector<int> classes;
  std::vector<BinarySvm> machines;  // pairs (i < j) in lexicographic order
  Standardizer standardizer;
  SvmParams params;
  bool converged = true;

  // Input as the model sees it (standardized when params.standardize).
  std::vector<double> transform(std::span<const double> x) const;
  std::vector<double> decision_values(std::span<const double> x) const;
  int predict(std::span<const double> x) const;
};

// Raised when SMO hits max_iterations; carries the best-so-far model with
// converged == false.
class SvmConvergenceError : public TrainError {
 public:
  SvmConvergenceError(const std::string& what, SvmModel partial)
      : TrainError(what), partial_(std::move(partial)) {}
  const SvmModel& partial_model() const { return partial_; }

 private:
  SvmModel partial_;
};

// Sequential minimal optimization with second-order working-set selection.
SvmModel train_svm(const Samples& data, const SvmParams& params = {});

}  // namespace emobase::learn
