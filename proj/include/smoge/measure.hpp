#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "smoge/common.hpp"
#include "smoge/expert.hpp"

namespace smoge {

// One expert with its gating parameters. The mixture weight of the
// component is exp(alpha0); weights are stored on the log scale and never
// as raw probabilities.
struct ExpertComponent {
  double alpha0 = 0.0;          // gating bias (log weight)
  std::vector<double> alpha1;   // gating slope, size d
  std::vector<double> beta;     // expert mean parameters, size p
  double sigma2 = 1.0;          // expert variance

  double weight() const { return std::exp(alpha0); }
};

// A finite positive mixing measure: the full parameterization of a
// softmax-gated mixture of Gaussian experts.
struct MixingMeasure {
  ExpertFamily family = ExpertFamily::linear;
  int input_dim = 0;
  std::vector<ExpertComponent> components;

  int size() const { return static_cast<int>(components.size()); }
};

// Compact parameter box. Variances are bounded away from zero.
struct ParamBounds {
  double alpha0_lo = -20.0, alpha0_hi = 20.0;
  double alpha1_lo = -20.0, alpha1_hi = 20.0;
  double beta_lo = -20.0, beta_hi = 20.0;
  double sigma2_lo = 1e-3, sigma2_hi = 1e3;
};

inline void validate_measure(const MixingMeasure& g) {
  require(g.size() >= 1, "mixing measure needs at least one component");
  require(g.input_dim >= 1, "mixing measure needs input_dim >= 1");
  const int p = expert_param_count(g.family, g.input_dim);
  for (const auto& c : g.components) {
    require(static_cast<int>(c.alpha1.size()) == g.input_dim,
            "component gating slope has wrong dimension");
    require(static_cast<int>(c.beta.size()) == p, "component expert block has wrong size");
    require(c.sigma2 > 0.0 && std::isfinite(c.sigma2), "component variance must be positive");
  }
}

inline bool within_bounds(const MixingMeasure& g, const ParamBounds& b) {
  auto in = [](double x, double lo, double hi) { return x >= lo && x <= hi; };
  for (const auto& c : g.components) {
    if (!in(c.alpha0, b.alpha0_lo, b.alpha0_hi)) return false;
    for (double a : c.alpha1)
      if (!in(a, b.alpha1_lo, b.alpha1_hi)) return false;
    for (double v : c.beta)
      if (!in(v, b.beta_lo, b.beta_hi)) return false;
    if (!in(c.sigma2, b.sigma2_lo, b.sigma2_hi)) return false;
  }
  return true;
}

// Support-point block omega = (alpha1, beta, sigma2) used by the Voronoi
// cell construction; concatenated without rescaling.
inline std::vector<double> omega_block(const ExpertComponent& c) {
  std::vector<double> w;
  w.reserve(c.alpha1.size() + c.beta.size() + 1);
  w.insert(w.end(), c.alpha1.begin(), c.alpha1.end());
  w.insert(w.end(), c.beta.begin(), c.beta.end());
  w.push_back(c.sigma2);
  return w;
}

inline double omega_distance(const ExpertComponent& a, const ExpertComponent& b) {
  const auto wa = omega_block(a);
  const auto wb = omega_block(b);
  require(wa.size() == wb.size(), "omega blocks differ in size");
  double s = 0.0;
  for (std::size_t i = 0; i < wa.size(); ++i) s += (wa[i] - wb[i]) * (wa[i] - wb[i]);
  return std::sqrt(s);
}

// True when the last component's gating pair is exactly zero, i.e. the
// measure is in the translation-normalized form.
inline bool gating_normalized(const MixingMeasure& g) {
  const auto& last = g.components.back();
  if (last.alpha0 != 0.0) return false;
  for (double a : last.alpha1)
    if (a != 0.0) return false;
  return true;
}

}  // namespace smoge
