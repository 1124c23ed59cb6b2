#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "smoge/model.hpp"
#include "smoge/rng.hpp"

namespace smoge {

inline constexpr int kDefaultPairwiseMc = 200'000;
inline constexpr int kGoldenValueMc = 1'000'000;

struct DivergenceEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long n_samples = 0;
  std::uint64_t seed = 0;
  bool infinite = false;  // a sample hit a vanishing reference density
};

namespace detail {

// Draw y at x from the balanced two-model mixture (f1 + f2) / 2.
inline double sample_mixture_y(const MixingMeasure& g1, const MixingMeasure& g2,
                               std::span<const double> x, Rng& rng) {
  const MixingMeasure& g = rng.uniform01() < 0.5 ? g1 : g2;
  const auto w = gate_weights(g, x);
  const auto& c = g.components[rng.categorical(w)];
  return rng.normal(expert_mean(g.family, c.beta, x), std::sqrt(c.sigma2));
}

template <typename Integrand>
DivergenceEstimate mc_mean(const MixingMeasure& g1, const MixingMeasure& g2, int n_mc,
                           std::uint64_t seed, int shards, bool sample_from_g1_only,
                           Integrand integrand) {
  require(g1.input_dim == g2.input_dim, "divergence: input dimension mismatch");
  require(n_mc >= 1, "divergence: n_mc must be >= 1");
  require(shards >= 1, "divergence: shards must be >= 1");
  validate_measure(g1);
  validate_measure(g2);

  const int d = g1.input_dim;
  double sum = 0.0, sum_sq = 0.0;
  bool hit_infinite = false;
  long total = 0;
  std::vector<double> x(d);
  for (int shard = 0; shard < shards; ++shard) {
    Rng rng(derive_seed(seed, seed_salt::kShard, static_cast<std::uint64_t>(shard)));
    const long lo = static_cast<long>(shard) * n_mc / shards;
    const long hi = static_cast<long>(shard + 1) * n_mc / shards;
    for (long i = lo; i < hi; ++i) {
      for (int u = 0; u < d; ++u) x[u] = rng.uniform(-1.0, 1.0);
      double y;
      if (sample_from_g1_only) {
        const auto w = gate_weights(g1, x);
        const auto& c = g1.components[rng.categorical(w)];
        y = rng.normal(expert_mean(g1.family, c.beta, x), std::sqrt(c.sigma2));
      } else {
        y = sample_mixture_y(g1, g2, x, rng);
      }
      const double lf1 = log_conditional_density(g1, y, x);
      const double lf2 = log_conditional_density(g2, y, x);
      const double v = integrand(lf1, lf2);
      if (!std::isfinite(v)) {
        hit_infinite = true;
        continue;
      }
      sum += v;
      sum_sq += v * v;
      ++total;
    }
  }

  DivergenceEstimate est;
  est.n_samples = n_mc;
  est.seed = seed;
  est.infinite = hit_infinite;
  if (hit_infinite) {
    est.value = std::numeric_limits<double>::infinity();
    est.std_error = std::numeric_limits<double>::infinity();
    return est;
  }
  const double n = static_cast<double>(total);
  est.value = sum / n;
  const double var = std::max(0.0, (sum_sq - sum * sum / n) / std::max(1.0, n - 1.0));
  est.std_error = std::sqrt(var / n);
  return est;
}

}  // namespace detail

// Squared Hellinger distance between the joint densities of g1 and g2,
// estimated as 2 - 2 E[sqrt(f1 f2) / m] with (x, y) drawn from the
// balanced mixture m = (f1 + f2)/2. The weight sqrt(f1 f2)/m lies in [0,1],
// so the estimate stays inside [0, 2].
inline DivergenceEstimate hellinger_sq_mc(const MixingMeasure& g1, const MixingMeasure& g2,
                                          int n_mc = kDefaultPairwiseMc, std::uint64_t seed = 0,
                                          int shards = 1) {
  auto est = detail::mc_mean(g1, g2, n_mc, seed, shards, /*sample_from_g1_only=*/false,
                             [](double lf1, double lf2) {
                               const double lmix =
                                   log_sum_exp(std::array{lf1, lf2}) - kLogTwo;
                               return std::exp(0.5 * (lf1 + lf2) - lmix);
                             });
  est.std_error *= 2.0;
  est.value = 2.0 - 2.0 * est.value;
  return est;
}

// Kullback-Leibler divergence K(g1, g2), estimated from samples of g1.
inline DivergenceEstimate kl_mc(const MixingMeasure& g1, const MixingMeasure& g2,
                                int n_mc = kDefaultPairwiseMc, std::uint64_t seed = 0,
                                int shards = 1) {
  return detail::mc_mean(g1, g2, n_mc, seed, shards, /*sample_from_g1_only=*/true,
                         [](double lf1, double lf2) { return lf1 - lf2; });
}

// L1 distance between the joint densities, same balanced-mixture proposal;
// the integrand |f1 - f2| / m is bounded by 2.
inline DivergenceEstimate l1_norm_mc(const MixingMeasure& g1, const MixingMeasure& g2,
                                     int n_mc = kDefaultPairwiseMc, std::uint64_t seed = 0,
                                     int shards = 1) {
  return detail::mc_mean(g1, g2, n_mc, seed, shards, /*sample_from_g1_only=*/false,
                         [](double lf1, double lf2) {
                           const double lmix = log_sum_exp(std::array{lf1, lf2}) - kLogTwo;
                           const double hi = std::max(lf1, lf2);
                           return std::exp(hi - lmix) * (1.0 - std::exp(-std::abs(lf1 - lf2)));
                         });
}

}  // namespace smoge
