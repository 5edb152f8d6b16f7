#pragma once

// Reference checks for the learners, shared by unit and acceptance tests.

#include "emobase/learn/ann.hpp"
#include "emobase/learn/samples.hpp"
#include "emobase/learn/svm.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

// Mean cross-entropy of a one-hidden-layer softmax network, written from the
// formulas in long double. Parameter layout: W1 (h x p), b1, W2 (k x h), b2.
inline long double network_loss(const std::vector<long double>& w, std::size_t p, std::size_t h,
                                std::size_t k, bool logistic, const emobase::learn::Matrix& x,
                                const std::vector<std::size_t>& targets) {
  long double total = 0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::vector<long double> a(h);
    for (std::size_t j = 0; j < h; ++j) {
      long double s = w[h * p + j];
      for (std::size_t i = 0; i < p; ++i) s += w[j * p + i] * x(r, i);
      a[j] = logistic ? 1.0L / (1.0L + std::exp(-s)) : std::exp(-s * s);
    }
    const std::size_t w2 = h * p + h;
    const std::size_t b2 = w2 + k * h;
    std::vector<long double> z(k);
    for (std::size_t c = 0; c < k; ++c) {
      z[c] = w[b2 + c];
      for (std::size_t j = 0; j < h; ++j) z[c] += w[w2 + c * h + j] * a[j];
    }
    const long double zmax = *std::max_element(z.begin(), z.end());
    long double norm = 0;
    for (auto v : z) norm += std::exp(v - zmax);
    total += -(z[targets[r]] - zmax - std::log(norm));
  }
  return total / static_cast<long double>(x.rows());
}

// Relative error of one gradient component; magnitudes below `floor` are
// compared absolutely so that near-zero components do not blow up.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

// Largest relative error between backprop and long-double central
// differences over all parameters.
inline double gradient_check(const emobase::learn::AnnNetwork& net, const emobase::learn::Matrix& x,
                             const std::vector<std::size_t>& targets, long double step = 1e-6L) {
  std::vector<double> grad;
  net.loss_and_gradient(x, targets, grad);
  const auto& params = net.parameters();
  std::vector<long double> w(params.begin(), params.end());
  const bool logistic = net.activation() == emobase::learn::Activation::Logistic;
  double worst = 0.0;
  for (std::size_t q = 0; q < w.size(); ++q) {
    const long double keep = w[q];
    w[q] = keep + step;
    const long double up = network_loss(w, net.inputs(), net.hidden(), net.outputs(), logistic, x, targets);
    w[q] = keep - step;
    const long double down = network_loss(w, net.inputs(), net.hidden(), net.outputs(), logistic, x, targets);
    w[q] = keep;
    const double numeric = static_cast<double>((up - down) / (2.0L * step));
    worst = std::max(worst, relative_error(grad[q], numeric));
  }
  return worst;
}

struct SvmResiduals {
  double kkt = 0.0;        // largest KKT violation in margin units
  double expansion = 0.0;  // largest |decision - direct kernel sum|
};

// Checks machine m of a trained model against its training data. Margins
// y f(x) are recomputed from the support vectors: free vectors sit on the
// margin, zero-weight points outside it, bounded ones inside it.
inline SvmResiduals svm_residuals(const emobase::learn::SvmModel& model, const emobase::learn::Samples& data,
                                  std::size_t m) {
  const auto& mach = model.machines[m];
  const double c = model.params.cost;
  const double gamma = model.params.gamma;
  SvmResiduals out;

  std::vector<double> alpha(data.size(), 0.0);
  for (std::size_t s = 0; s < mach.sv_rows.size(); ++s) alpha[mach.sv_rows[s]] = std::abs(mach.coef[s]);

  for (std::size_t i = 0; i < data.size(); ++i) {
    const int label = data.y[i];
    if (label != mach.positive_label && label != mach.negative_label) continue;
    const double y = label == mach.positive_label ? 1.0 : -1.0;
    const auto z = model.transform(data.x.row(i));
    long double f = -mach.rho;
    for (std::size_t s = 0; s < mach.coef.size(); ++s) {
      long double d2 = 0;
      for (std::size_t k = 0; k < z.size(); ++k) {
        const long double diff = static_cast<long double>(mach.support_vectors(s, k)) - z[k];
        d2 += diff * diff;
      }
      f += mach.coef[s] * std::exp(-gamma * d2);
    }
    out.expansion = std::max(out.expansion, std::abs(static_cast<double>(f) - mach.decision(z, gamma)));
    const double margin = y * static_cast<double>(f);
    double violation = 0.0;
    if (alpha[i] <= 0.0) {
      violation = std::max(0.0, 1.0 - margin);
    } else if (alpha[i] >= c) {
      violation = std::max(0.0, margin - 1.0);
    } else {
      violation = std::abs(margin - 1.0);
    }
    out.kkt = std::max(out.kkt, violation);
  }
  return out;
}

}  // namespace oracle
