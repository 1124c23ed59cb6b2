#pragma once

#include <vector>

#include "smoge/vi.hpp"

namespace smoge {

// Metropolis log acceptance ratio for a symmetric proposal; antisymmetric
// under swapping the two states.
inline double metropolis_log_ratio(double log_post_from, double log_post_to) {
  return log_post_to - log_post_from;
}

// Fold a coordinate into [lo, hi] by reflection at the walls.
inline double reflect_into(double v, double lo, double hi) {
  const double width = hi - lo;
  double t = std::fmod(v - lo, 2.0 * width);
  if (t < 0.0) t += 2.0 * width;
  return t <= width ? lo + t : lo + 2.0 * width - t;
}

struct MhResult {
  ParamLayout layout;
  std::vector<std::vector<double>> chain;  // one state per step
  double acceptance_rate = 0.0;
  bool low_acceptance = false;  // rate < 0.01
};

// Random-walk Metropolis on the log posterior over the flat parameter
// vector (variances on the log scale), independent Gaussian moves on every
// coordinate and reflection at the parameter box walls.
inline MhResult mh_sample(const Dataset& data, int k, ExpertFamily family,
                          const PriorConfig& prior, const ParamBounds& bounds, int steps,
                          double proposal_scale, std::uint64_t seed,
                          const std::vector<double>* init = nullptr) {
  require(steps >= 1, "mh_sample: steps must be >= 1");
  require(proposal_scale > 0.0, "mh_sample: proposal scale must be positive");
  const int d = data.input_dim >= 1 ? data.input_dim : 1;
  const auto lay = ParamLayout::make(family, k, d);
  const int n = lay.total();

  auto lo_of = [&](int i) {
    switch (role_of(lay, i)) {
      case ParamRole::log_variance: return std::log(bounds.sigma2_lo);
      case ParamRole::gating: return i < lay.k ? bounds.alpha0_lo : bounds.alpha1_lo;
      default: return bounds.beta_lo;
    }
  };
  auto hi_of = [&](int i) {
    switch (role_of(lay, i)) {
      case ParamRole::log_variance: return std::log(bounds.sigma2_hi);
      case ParamRole::gating: return i < lay.k ? bounds.alpha0_hi : bounds.alpha1_hi;
      default: return bounds.beta_hi;
    }
  };

  Rng rng(derive_seed(seed, seed_salt::kMh));
  std::vector<double> theta(n);
  if (init) {
    require(static_cast<int>(init->size()) == n, "mh_sample: init size mismatch");
    theta = *init;
    for (int i = 0; i < n; ++i) theta[i] = reflect_into(theta[i], lo_of(i), hi_of(i));
  } else {
    for (int i = 0; i < n; ++i) theta[i] = reflect_into(rng.normal(0.0, 0.1), lo_of(i), hi_of(i));
  }

  MhResult result;
  result.layout = lay;
  result.chain.reserve(steps);
  double lp = log_joint(theta, lay, data, prior);
  long accepted = 0;
  std::vector<double> proposal(n);
  for (int t = 0; t < steps; ++t) {
    for (int i = 0; i < n; ++i)
      proposal[i] = reflect_into(theta[i] + proposal_scale * rng.normal(), lo_of(i), hi_of(i));
    const double lp_new = log_joint(proposal, lay, data, prior);
    if (std::log(std::max(rng.uniform01(), 1e-300)) <
        metropolis_log_ratio(lp, lp_new)) {
      theta = proposal;
      lp = lp_new;
      ++accepted;
    }
    result.chain.push_back(theta);
  }
  result.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(steps);
  result.low_acceptance = result.acceptance_rate < 0.01;
  return result;
}

// Coordinate-wise mean of the second half of the chain.
inline std::vector<double> mh_posterior_mean(const MhResult& r) {
  const int n = r.layout.total();
  const std::size_t steps = r.chain.size();
  const std::size_t keep = (steps + 1) / 2;
  const std::size_t start = steps - keep;
  std::vector<double> mean(n, 0.0);
  for (std::size_t t = start; t < steps; ++t)
    for (int i = 0; i < n; ++i) mean[i] += r.chain[t][i];
  for (int i = 0; i < n; ++i) mean[i] /= static_cast<double>(keep);
  return mean;
}

}  // namespace smoge
