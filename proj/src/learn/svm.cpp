#include "emobase/learn/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace emobase::learn {

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

double BinarySvm::decision(std::span<const double> z, double gamma) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < coef.size(); ++i) {
    sum += coef[i] * rbf_kernel(support_vectors.row(i), z, gamma);
  }
  return sum - rho;
}

std::vector<double> SvmModel::transform(std::span<const double> x) const {
  if (x.size() != standardizer.mean.size()) throw PredictError("feature vector has wrong dimension");
  if (params.standardize) return standardizer.apply(x);
  return {x.begin(), x.end()};
}

std::vector<double> SvmModel::decision_values(std::span<const double> x) const {
  const auto z = transform(x);
  std::vector<double> out;
  out.reserve(machines.size());
  for (const auto& m : machines) out.push_back(m.decision(z, params.gamma));
  return out;
}

int SvmModel::predict(std::span<const double> x) const {
  if (classes.size() == 1) return classes.front();
  const auto dec = decision_values(x);
  std::vector<std::size_t> votes(classes.size(), 0);
  std::size_t m = 0;
  for (std::size_t a = 0; a < classes.size(); ++a) {
    for (std::size_t b = a + 1; b < classes.size(); ++b, ++m) {
      ++votes[dec[m] > 0.0 ? a : b];
    }
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < votes.size(); ++k) {
    if (votes[k] > votes[best]) best = k;
  }
  return classes[best];
}

namespace {

constexpr double kTau = 1e-12;

struct BinarySolution {
  std::vector<double> alpha;
  double rho = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Dual: min 1/2 a'Qa - e'a  s.t. y'a = 0, 0 <= a <= C, with Q_ij = y_i y_j K_ij.
BinarySolution solve_binary(const Matrix& x, std::span<const int> y, const SvmParams& params) {
  const std::size_t n = y.size();
  const double c = params.cost;
  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    k[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = rbf_kernel(x.row(i), x.row(j), params.gamma);
      k[i * n + j] = v;
      k[j * n + i] = v;
    }
  }

  BinarySolution sol;
  sol.alpha.assign(n, 0.0);
  std::vector<double> grad(n, -1.0);
  auto& alpha = sol.alpha;
  const std::size_t max_iter =
      params.max_iterations != 0 ? params.max_iterations
                                 : std::max<std::size_t>(10'000'000, 100 * n);

  auto upper = [&](std::size_t t) { return alpha[t] >= c; };
  auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

  while (true) {
    // Maximal violating i, then second-order choice of j.
    double g_max = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i_sel = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] == 1) {
        if (!upper(t) && -grad[t] >= g_max) {
          g_max = -grad[t];
          i_sel = static_cast<std::ptrdiff_t>(t);
        }
      } else if (!lower(t) && grad[t] >= g_max) {
        g_max = grad[t];
        i_sel = static_cast<std::ptrdiff_t>(t);
      }
    }
    double g_max2 = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t j_sel = -1;
    double obj_min = std::numeric_limits<double>::infinity();
    if (i_sel >= 0) {
      const auto i = static_cast<std::size_t>(i_sel);
      for (std::size_t t = 0; t < n; ++t) {
        if (y[t] == 1) {
          if (lower(t)) continue;
          const double diff = g_max + grad[t];
          g_max2 = std::max(g_max2, grad[t]);
          if (diff > 0.0) {
            double quad = 2.0 - 2.0 * k[i * n + t];
            if (quad <= 0.0) quad = kTau;
            const double obj = -(diff * diff) / quad;
            if (obj <= obj_min) {
              obj_min = obj;
              j_sel = static_cast<std::ptrdiff_t>(t);
            }
          }
        } else {
          if (upper(t)) continue;
          const double diff = g_max - grad[t];
          g_max2 = std::max(g_max2, -grad[t]);
          if (diff > 0.0) {
            double quad = 2.0 - 2.0 * k[i * n + t];
            if (quad <= 0.0) quad = kTau;
            const double obj = -(diff * diff) / quad;
            if (obj <= obj_min) {
              obj_min = obj;
              j_sel = static_cast<std::ptrdiff_t>(t);
            }
          }
        }
      }
    }
    if (i_sel < 0 || j_sel < 0 || g_max + g_max2 < params.tolerance) {
      sol.converged = true;
      break;
    }
    if (sol.iterations >= max_iter) break;
    ++sol.iterations;

    const auto i = static_cast<std::size_t>(i_sel);
    const auto j = static_cast<std::size_t>(j_sel);
    const double old_i = alpha[i];
    const double old_j = alpha[j];
    const double yi = y[i];
    const double yj = y[j];
    const double q_ij = yi * yj * k[i * n + j];

    if (y[i] != y[j]) {
      double quad = 2.0 + 2.0 * q_ij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = 2.0 - 2.0 * q_ij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double d_i = alpha[i] - old_i;
    const double d_j = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += y[t] * (yi * k[i * n + t] * d_i + yj * k[j * n + t] * d_j);
    }
  }

  // rho: average of y_i G_i over free vectors, else the midpoint of the
  // feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (upper(t)) {
      if (y[t] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] == 1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  sol.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  return sol;
}

}  // namespace

SvmModel train_svm(const Samples& data, const SvmParams& params) {
  if (!(params.gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (!(params.cost > 0.0)) throw ConfigError("cost must be positive");
  if (!(params.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (data.size() == 0) throw TrainError("cannot train an SVM on an empty dataset");

  SvmModel model;
  model.params = params;
  model.classes = distinct_labels(data.y);
  model.standardizer = Standardizer::fit(data.x);
  const Matrix x = params.standardize ? model.standardizer.apply(data.x) : data.x;

  std::size_t total_iterations = 0;
  for (std::size_t a = 0; a < model.classes.size(); ++a) {
    for (std::size_t b = a + 1; b < model.classes.size(); ++b) {
      std::vector<std::size_t> rows;
      std::vector<int> y;
      for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.y[i] == model.classes[a]) {
          rows.push_back(i);
          y.push_back(1);
        } else if (data.y[i] == model.classes[b]) {
          rows.push_back(i);
          y.push_back(-1);
        }
      }
      Matrix sub(rows.size(), x.cols());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto src = x.row(rows[r]);
        std::copy(src.begin(), src.end(), sub.row(r).begin());
      }
      const auto sol = solve_binary(sub, y, params);

      BinarySvm m;
      m.positive_label = model.classes[a];
      m.negative_label = model.classes[b];
      m.rho = sol.rho;
      m.iterations = sol.iterations;
      m.converged = sol.converged;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (sol.alpha[r] > 0.0) {
          m.support_vectors.append_row(sub.row(r));
          m.coef.push_back(sol.alpha[r] * y[r]);
          m.sv_rows.push_back(rows[r]);
        }
      }
      if (m.coef.empty()) m.support_vectors = Matrix(0, x.cols());
      model.converged = model.converged && m.converged;
      total_iterations += m.iterations;
      model.machines.push_back(std::move(m));
    }
  }
  if (!model.converged) {
    throw SvmConvergenceError("SMO did not reach tolerance " + std::to_string(params.tolerance) +
                                  " within the iteration limit (" +
                                  std::to_string(total_iterations) + " iterations)",
                              std::move(model));
  }
  return model;
}

}  // namespace emobase::learn
