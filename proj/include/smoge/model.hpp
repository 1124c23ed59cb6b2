#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "smoge/measure.hpp"
#include "smoge/stats.hpp"

namespace smoge {

// Gating logits z_k = alpha0_k + x' alpha1_k.
inline void gate_logits(const MixingMeasure& g, std::span<const double> x,
                        std::span<double> out) {
  require(static_cast<int>(x.size()) == g.input_dim, "gate: input dimension mismatch");
  for (int k = 0; k < g.size(); ++k) {
    const auto& c = g.components[k];
    double z = c.alpha0;
    for (int u = 0; u < g.input_dim; ++u) z += c.alpha1[u] * x[u];
    out[k] = z;
  }
}

// Softmax gate weights at x; max-subtraction keeps the exponentials tame.
inline std::vector<double> gate_weights(const MixingMeasure& g, std::span<const double> x) {
  std::vector<double> z(g.size());
  gate_logits(g, x, z);
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (auto& v : z) {
    v = std::exp(v - m);
    s += v;
  }
  for (auto& v : z) v /= s;
  return z;
}

// log f_G(y | x), evaluated with a single log-sum-exp over
// z_k + log N(y | E(x, beta_k), sigma2_k).
inline double log_conditional_density(const MixingMeasure& g, double y,
                                      std::span<const double> x) {
  std::vector<double> z(g.size());
  gate_logits(g, x, z);
  std::vector<double> num(g.size());
  for (int k = 0; k < g.size(); ++k) {
    const auto& c = g.components[k];
    const double m = expert_mean(g.family, c.beta, x);
    num[k] = z[k] + log_normal_pdf(y, m, c.sigma2);
  }
  return log_sum_exp(num) - log_sum_exp(z);
}

inline double conditional_density(const MixingMeasure& g, double y,
                                  std::span<const double> x) {
  return std::exp(log_conditional_density(g, y, x));
}

inline bool in_covariate_box(std::span<const double> x) {
  for (double v : x)
    if (v < -1.0 || v > 1.0) return false;
  return true;
}

// Joint density over (y, x) with x uniform on [-1,1]^d.
inline double joint_density(const MixingMeasure& g, double y, std::span<const double> x) {
  if (!in_covariate_box(x)) return 0.0;
  return conditional_density(g, y, x) * std::exp2(-static_cast<double>(g.input_dim));
}

inline double log_joint_density(const MixingMeasure& g, double y, std::span<const double> x) {
  return log_conditional_density(g, y, x) -
         static_cast<double>(g.input_dim) * kLogTwo;
}

}  // namespace smoge
