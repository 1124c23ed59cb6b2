#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "smoge/common.hpp"

namespace smoge {

// splitmix64 step; used both as a stream finalizer and for seed mixing.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic derivation of independent sub-streams from a master seed.
// Every harness that forks work (replications, candidate fits, MC shards)
// derives its seeds through here so that runs are reproducible regardless
// of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) {
  std::uint64_t s = master ^ (0x9e3779b97f4a7c15ULL + salt);
  splitmix64(s);
  std::uint64_t t = s ^ (salt << 1);
  return splitmix64(t);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return derive_seed(derive_seed(master, a), b);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
  return derive_seed(derive_seed(master, a, b), c);
}

// Salts for the fixed sub-stream roles.
namespace seed_salt {
inline constexpr std::uint64_t kData = 0x10;
inline constexpr std::uint64_t kFitInit = 0x20;
inline constexpr std::uint64_t kFitStep = 0x21;
inline constexpr std::uint64_t kFinalElbo = 0x22;
inline constexpr std::uint64_t kFit = 0x23;
inline constexpr std::uint64_t kSlopes = 0x30;
inline constexpr std::uint64_t kShard = 0x40;
inline constexpr std::uint64_t kMh = 0x50;
inline constexpr std::uint64_t kLoss = 0x60;
inline constexpr std::uint64_t kScan = 0x70;
}  // namespace seed_salt

// mt19937_64 with explicit float conversions. std::*_distribution is
// implementation-defined, so uniforms and normals are generated by hand to
// keep streams bit-reproducible across standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; the paired draw is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Index draw from unnormalized nonnegative weights.
  int categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    require(total > 0.0, "categorical: weights must have positive sum");
    double u = uniform01() * total;
    for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
      u -= weights[k];
      if (u < 0.0) return static_cast<int>(k);
    }
    return static_cast<int>(weights.size()) - 1;
  }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace smoge
