#pragma once

#include <string>
#include <vector>

#include "smoge/data.hpp"
#include "smoge/rng.hpp"

namespace smoge {

// Data-generating processes. Besides sampling from a mixing measure itself,
// three hard-gated benchmark generators are built in:
//   b2  two linear regimes on [-1,1]^2 split along the diagonal x1 > x2
//   b3  four linear regimes on [-1,1]^6 gated by argmax of the first four
//       covariates, slopes redrawn with N(0, 0.2^2) noise per replication
//   b4  K* linear regimes gated by a hard max over diagonal logits
//       separation * x_k - 0.2 * separation * k, slope noise N(0, 0.3^2)
enum class DgpKind { smoge, b2, b3, b4 };

inline std::string dgp_name(DgpKind k) {
  switch (k) {
    case DgpKind::smoge: return "smoge";
    case DgpKind::b2: return "b2";
    case DgpKind::b3: return "b3";
    case DgpKind::b4: return "b4";
  }
  return "?";
}

inline DgpKind dgp_from_name(const std::string& s) {
  if (s == "smoge") return DgpKind::smoge;
  if (s == "b2") return DgpKind::b2;
  if (s == "b3") return DgpKind::b3;
  if (s == "b4") return DgpKind::b4;
  throw ConfigError("unknown dgp '" + s + "'");
}

struct DgpSpec {
  DgpKind kind = DgpKind::smoge;
  MixingMeasure measure;    // smoge only
  double separation = 5.0;  // b4 only
  int d = 2;                // b4 only
  int k_star = 2;           // b4 only

  static DgpSpec smoge_spec(MixingMeasure g) {
    DgpSpec s;
    s.kind = DgpKind::smoge;
    s.measure = std::move(g);
    return s;
  }
  static DgpSpec b2() { return DgpSpec{DgpKind::b2, {}, 0.0, 2, 2}; }
  static DgpSpec b3() { return DgpSpec{DgpKind::b3, {}, 0.0, 6, 4}; }
  static DgpSpec b4(double separation, int d, int k_star) {
    return DgpSpec{DgpKind::b4, {}, separation, d, k_star};
  }
};

inline void validate_dgp(const DgpSpec& spec) {
  switch (spec.kind) {
    case DgpKind::smoge: validate_measure(spec.measure); return;
    case DgpKind::b2:
    case DgpKind::b3: return;
    case DgpKind::b4: {
      require(spec.separation > 0.0, "b4: separation must be > 0");
      const bool ok = (spec.d == 2 && spec.k_star == 1) || (spec.d == 2 && spec.k_star == 2) ||
                      (spec.d == 4 && spec.k_star == 3);
      require(ok, "b4: (d, k_star) must be one of (2,1), (2,2), (4,3)");
      return;
    }
  }
}

inline int dgp_input_dim(const DgpSpec& spec) {
  switch (spec.kind) {
    case DgpKind::smoge: return spec.measure.input_dim;
    case DgpKind::b2: return 2;
    case DgpKind::b3: return 6;
    case DgpKind::b4: return spec.d;
  }
  return 0;
}

inline int dgp_true_expert_count(const DgpSpec& spec) {
  switch (spec.kind) {
    case DgpKind::smoge: return spec.measure.size();
    case DgpKind::b2: return 2;
    case DgpKind::b3: return 4;
    case DgpKind::b4: return spec.k_star;
  }
  return 0;
}

// Evenly spaced values over [lo, hi]; a single point sits at lo.
inline std::vector<double> linear_spacing(double lo, double hi, int count) {
  std::vector<double> v(count);
  if (count == 1) {
    v[0] = lo;
    return v;
  }
  for (int i = 0; i < count; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return v;
}

inline Dataset sample_smoge(const MixingMeasure& g, int n, std::uint64_t seed) {
  validate_measure(g);
  require(n >= 0, "sample size must be nonnegative");
  Rng rng(seed);
  Dataset ds;
  ds.input_dim = g.input_dim;
  ds.x.reserve(static_cast<std::size_t>(n) * g.input_dim);
  ds.y.reserve(n);
  ds.z.reserve(n);
  std::vector<double> xi(g.input_dim);
  for (int i = 0; i < n; ++i) {
    for (int u = 0; u < g.input_dim; ++u) xi[u] = rng.uniform(-1.0, 1.0);
    const auto w = gate_weights(g, xi);
    const int k = rng.categorical(w);
    const auto& c = g.components[k];
    const double y = rng.normal(expert_mean(g.family, c.beta, xi), std::sqrt(c.sigma2));
    ds.x.insert(ds.x.end(), xi.begin(), xi.end());
    ds.y.push_back(y);
    ds.z.push_back(k + 1);
  }
  ds.provenance.dgp_id = "smoge";
  ds.provenance.seed = seed;
  ds.provenance.detail = {{"family", "\"" + family_name(g.family) + "\""},
                          {"d", std::to_string(g.input_dim)},
                          {"k_star", std::to_string(g.size())}};
  for (int k = 0; k < g.size(); ++k) {
    const auto& c = g.components[k];
    const std::string p = "component_" + std::to_string(k + 1) + "_";
    ds.provenance.detail.emplace_back(p + "alpha0", fmt_double(c.alpha0));
    ds.provenance.detail.emplace_back(p + "alpha1", fmt_array(c.alpha1));
    ds.provenance.detail.emplace_back(p + "beta", fmt_array(c.beta));
    ds.provenance.detail.emplace_back(p + "sigma2", fmt_double(c.sigma2));
  }
  return ds;
}

namespace detail {

struct HardGatedTruth {
  std::vector<double> intercepts;
  std::vector<std::vector<double>> slopes;
  std::vector<double> variances;
};

// Responses follow the assigned regime's linear model.
inline Dataset sample_hard_gated(const HardGatedTruth& truth, int d, int n, Rng& rng,
                                 int (*assign)(std::span<const double>, const DgpSpec&),
                                 const DgpSpec& spec) {
  Dataset ds;
  ds.input_dim = d;
  std::vector<double> xi(d);
  for (int i = 0; i < n; ++i) {
    for (int u = 0; u < d; ++u) xi[u] = rng.uniform(-1.0, 1.0);
    const int k = assign(xi, spec);
    double mean = truth.intercepts[k];
    for (int u = 0; u < d; ++u) mean += truth.slopes[k][u] * xi[u];
    const double y = rng.normal(mean, std::sqrt(truth.variances[k]));
    ds.x.insert(ds.x.end(), xi.begin(), xi.end());
    ds.y.push_back(y);
    ds.z.push_back(k + 1);
  }
  return ds;
}

inline void record_truth(Provenance& prov, const HardGatedTruth& truth) {
  prov.detail.emplace_back("intercepts", fmt_array(truth.intercepts));
  for (std::size_t k = 0; k < truth.slopes.size(); ++k)
    prov.detail.emplace_back("slopes_" + std::to_string(k + 1), fmt_array(truth.slopes[k]));
  prov.detail.emplace_back("variances", fmt_array(truth.variances));
}

}  // namespace detail

// The two expert blocks of the b2 generator; handy for diagnostics.
inline std::vector<std::pair<std::vector<double>, double>> b2_expert_blocks() {
  return {{{2.0, 1.0, 1.0}, 1.0}, {{-2.0, -1.0, -1.0}, 2.0}};
}

inline Dataset sample_dgp(const DgpSpec& spec, int n, std::uint64_t seed) {
  validate_dgp(spec);
  require(n >= 0, "sample size must be nonnegative");
  if (spec.kind == DgpKind::smoge) return sample_smoge(spec.measure, n, seed);

  // Regime slopes (where noisy) are drawn before any data, from their own
  // sub-stream, so the realized truth is a function of the seed alone.
  Rng slope_rng(derive_seed(seed, seed_salt::kSlopes));
  Rng data_rng(derive_seed(seed, seed_salt::kData));
  detail::HardGatedTruth truth;
  Dataset ds;

  switch (spec.kind) {
    case DgpKind::b2: {
      truth.intercepts = {2.0, -2.0};
      truth.slopes = {{1.0, 1.0}, {-1.0, -1.0}};
      truth.variances = {1.0, 2.0};
      auto assign = +[](std::span<const double> x, const DgpSpec&) {
        return x[0] > x[1] ? 0 : 1;
      };
      ds = detail::sample_hard_gated(truth, 2, n, data_rng, assign, spec);
      break;
    }
    case DgpKind::b3: {
      const int k_star = 4, d = 6;
      truth.variances = linear_spacing(1.0, 2.0, k_star);
      for (int k = 0; k < k_star; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        truth.intercepts.push_back(2.0 * sign);
        std::vector<double> slope(d, 0.0);
        slope[k] = 2.0 * sign;
        for (int u = 0; u < d; ++u) slope[u] += slope_rng.normal(0.0, 0.2);
        truth.slopes.push_back(std::move(slope));
      }
      auto assign = +[](std::span<const double> x, const DgpSpec&) {
        int best = 0;
        for (int k = 1; k < 4; ++k)
          if (x[k] > x[best]) best = k;
        return best;
      };
      ds = detail::sample_hard_gated(truth, d, n, data_rng, assign, spec);
      break;
    }
    case DgpKind::b4: {
      truth.intercepts = linear_spacing(-2.0, 2.0, spec.k_star);
      truth.variances.assign(spec.k_star, 0.8);
      for (int k = 0; k < spec.k_star; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        std::vector<double> slope(spec.d, 0.0);
        slope[k] = 2.0 * sign;
        for (int u = 0; u < spec.d; ++u) slope[u] += slope_rng.normal(0.0, 0.3);
        truth.slopes.push_back(std::move(slope));
      }
      // logit_k(x) = separation * x_k + b_k with b_k = -0.2 * separation * k
      auto assign = +[](std::span<const double> x, const DgpSpec& s) {
        int best = 0;
        double best_logit = -1e300;
        for (int k = 0; k < s.k_star; ++k) {
          const double logit =
              s.separation * x[k] - 0.2 * s.separation * static_cast<double>(k + 1);
          if (logit > best_logit) {
            best_logit = logit;
            best = k;
          }
        }
        return best;
      };
      ds = detail::sample_hard_gated(truth, spec.d, n, data_rng, assign, spec);
      break;
    }
    default: break;
  }

  ds.provenance.dgp_id = dgp_name(spec.kind);
  ds.provenance.seed = seed;
  ds.provenance.detail = {{"d", std::to_string(dgp_input_dim(spec))},
                          {"k_star", std::to_string(dgp_true_expert_count(spec))}};
  if (spec.kind == DgpKind::b4)
    ds.provenance.detail.emplace_back("separation", fmt_double(spec.separation));
  detail::record_truth(ds.provenance, truth);
  return ds;
}

inline std::vector<double> b4_biases(double separation, int k_star) {
  std::vector<double> b(k_star);
  for (int k = 0; k < k_star; ++k) b[k] = -0.2 * separation * static_cast<double>(k + 1);
  return b;
}

}  // namespace smoge
