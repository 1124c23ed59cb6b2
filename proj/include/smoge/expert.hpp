#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "smoge/common.hpp"

namespace smoge {

// Mean-function families for the experts. The parameter layouts are:
//   linear   beta = [intercept, slope_1 .. slope_d]        (p = d + 1)
//   sigmoid  beta = [w_1 .. w_d], mean = logistic(x'w)     (p = d)
//   constant beta = [level]                                (p = 1)
enum class ExpertFamily { linear, sigmoid, constant };

inline std::string family_name(ExpertFamily f) {
  switch (f) {
    case ExpertFamily::linear: return "linear";
    case ExpertFamily::sigmoid: return "sigmoid";
    case ExpertFamily::constant: return "constant";
  }
  return "?";
}

inline ExpertFamily family_from_name(const std::string& name) {
  if (name == "linear") return ExpertFamily::linear;
  if (name == "sigmoid") return ExpertFamily::sigmoid;
  if (name == "constant") return ExpertFamily::constant;
  throw ConfigError("unknown expert family '" + name + "'");
}

inline int expert_param_count(ExpertFamily f, int input_dim) {
  switch (f) {
    case ExpertFamily::linear: return input_dim + 1;
    case ExpertFamily::sigmoid: return input_dim;
    case ExpertFamily::constant: return 1;
  }
  return 0;
}

inline double logistic(double t) {
  return t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

inline double expert_mean(ExpertFamily f, std::span<const double> beta,
                          std::span<const double> x) {
  const int d = static_cast<int>(x.size());
  require(static_cast<int>(beta.size()) == expert_param_count(f, d),
          "expert_mean: parameter size does not match family/input dimension");
  switch (f) {
    case ExpertFamily::linear: {
      double m = beta[0];
      for (int u = 0; u < d; ++u) m += beta[1 + u] * x[u];
      return m;
    }
    case ExpertFamily::sigmoid: {
      double t = 0.0;
      for (int u = 0; u < d; ++u) t += beta[u] * x[u];
      return logistic(t);
    }
    case ExpertFamily::constant: return beta[0];
  }
  return 0.0;
}

// dE/dbeta at x, written into grad (size p).
inline void expert_mean_grad(ExpertFamily f, std::span<const double> beta,
                             std::span<const double> x, std::span<double> grad) {
  const int d = static_cast<int>(x.size());
  switch (f) {
    case ExpertFamily::linear:
      grad[0] = 1.0;
      for (int u = 0; u < d; ++u) grad[1 + u] = x[u];
      return;
    case ExpertFamily::sigmoid: {
      double t = 0.0;
      for (int u = 0; u < d; ++u) t += beta[u] * x[u];
      const double s = logistic(t);
      const double sp = s * (1.0 - s);
      for (int u = 0; u < d; ++u) grad[u] = sp * x[u];
      return;
    }
    case ExpertFamily::constant: grad[0] = 1.0; return;
  }
}

// d2E/dbeta_u dbeta_v at x. Linear and constant means have vanishing
// second derivatives; the logistic mean does not.
inline double expert_mean_hess(ExpertFamily f, std::span<const double> beta,
                               std::span<const double> x, int u, int v) {
  switch (f) {
    case ExpertFamily::linear:
    case ExpertFamily::constant: return 0.0;
    case ExpertFamily::sigmoid: {
      double t = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) t += beta[i] * x[i];
      const double s = logistic(t);
      return s * (1.0 - s) * (1.0 - 2.0 * s) * x[u] * x[v];
    }
  }
  return 0.0;
}

inline bool family_has_second_derivatives(ExpertFamily f) {
  (void)f;
  return true;  // all built-in families are twice differentiable
}

// Lipschitz constant of beta -> E(x, beta) over x in [-1,1]^d and the
// given parameter box. Linear: |E - E'| <= ||(1,x)|| ||dbeta|| <= sqrt(d+1).
// Sigmoid: slope of the logistic is at most 1/4 and ||x|| <= sqrt(d).
inline double expert_lipschitz_constant(ExpertFamily f, int input_dim) {
  switch (f) {
    case ExpertFamily::linear: return std::sqrt(static_cast<double>(input_dim) + 1.0);
    case ExpertFamily::sigmoid: return 0.25 * std::sqrt(static_cast<double>(input_dim));
    case ExpertFamily::constant: return 1.0;
  }
  return 1.0;
}

}  // namespace smoge
