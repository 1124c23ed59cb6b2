#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "smoge/data.hpp"
#include "smoge/rng.hpp"

namespace smoge {

// Flat parameter vector layout for a K-component model:
//   [alpha0 (K)] [alpha1 (K x d)] [beta (K x p)] [log_sigma2 (K)]
// Variances live on the log scale throughout inference.
struct ParamLayout {
  ExpertFamily family = ExpertFamily::linear;
  int k = 1;
  int d = 1;
  int p = 2;

  static ParamLayout make(ExpertFamily family, int k, int d) {
    require(k >= 1 && d >= 1, "layout needs k >= 1 and d >= 1");
    return {family, k, d, expert_param_count(family, d)};
  }

  int alpha0(int j) const { return j; }
  int alpha1(int j, int u) const { return k + j * d + u; }
  int beta(int j, int u) const { return k + k * d + j * p + u; }
  int log_sigma2(int j) const { return k + k * d + k * p + j; }
  int total() const { return k * (2 + d + p); }

  std::string block_name(int idx) const {
    if (idx < k) return "alpha0[" + std::to_string(idx) + "]";
    idx -= k;
    if (idx < k * d) return "alpha1[" + std::to_string(idx / d) + "]";
    idx -= k * d;
    if (idx < k * p) return "beta[" + std::to_string(idx / p) + "]";
    idx -= k * p;
    return "log_sigma2[" + std::to_string(idx) + "]";
  }
};

enum class ParamRole { gating, slope, intercept, log_variance };

inline ParamRole role_of(const ParamLayout& lay, int idx) {
  if (idx < lay.k + lay.k * lay.d) return ParamRole::gating;
  idx -= lay.k + lay.k * lay.d;
  if (idx < lay.k * lay.p) {
    const int within = idx % lay.p;
    switch (lay.family) {
      case ExpertFamily::linear: return within == 0 ? ParamRole::intercept : ParamRole::slope;
      case ExpertFamily::sigmoid: return ParamRole::slope;
      case ExpertFamily::constant: return ParamRole::intercept;
    }
  }
  return ParamRole::log_variance;
}

// Zero-mean Gaussian priors on the gating and regression blocks and an
// inverse-gamma prior on the variances, expressed on log sigma^2 with the
// change-of-variables Jacobian folded in.
struct PriorConfig {
  double gating_var = 10.0;     // tau1
  double slope_var = 10.0;      // tau2
  double intercept_var = 10.0;  // tau3
  double sigma2_shape = 2.0;    // inverse-gamma shape a
  double sigma2_rate = 2.0;     // inverse-gamma rate b

  void validate() const {
    require(gating_var > 0.0 && slope_var > 0.0 && intercept_var > 0.0,
            "prior variances must be positive");
    require(sigma2_shape > 0.0 && sigma2_rate > 0.0,
            "inverse-gamma shape and rate must be positive");
  }
};

inline MixingMeasure measure_from_theta(std::span<const double> theta, const ParamLayout& lay,
                                        const ParamBounds* clamp_bounds = nullptr) {
  MixingMeasure g;
  g.family = lay.family;
  g.input_dim = lay.d;
  g.components.resize(lay.k);
  for (int j = 0; j < lay.k; ++j) {
    auto& c = g.components[j];
    c.alpha0 = theta[lay.alpha0(j)];
    c.alpha1.resize(lay.d);
    for (int u = 0; u < lay.d; ++u) c.alpha1[u] = theta[lay.alpha1(j, u)];
    c.beta.resize(lay.p);
    for (int u = 0; u < lay.p; ++u) c.beta[u] = theta[lay.beta(j, u)];
    c.sigma2 = std::exp(theta[lay.log_sigma2(j)]);
    if (clamp_bounds)
      c.sigma2 = std::clamp(c.sigma2, clamp_bounds->sigma2_lo, clamp_bounds->sigma2_hi);
  }
  return g;
}

inline std::vector<double> theta_from_measure(const MixingMeasure& g) {
  const auto lay = ParamLayout::make(g.family, g.size(), g.input_dim);
  std::vector<double> theta(lay.total());
  for (int j = 0; j < lay.k; ++j) {
    const auto& c = g.components[j];
    theta[lay.alpha0(j)] = c.alpha0;
    for (int u = 0; u < lay.d; ++u) theta[lay.alpha1(j, u)] = c.alpha1[u];
    for (int u = 0; u < lay.p; ++u) theta[lay.beta(j, u)] = c.beta[u];
    theta[lay.log_sigma2(j)] = std::log(c.sigma2);
  }
  return theta;
}

namespace detail {

inline double log_prior(std::span<const double> theta, const ParamLayout& lay,
                        const PriorConfig& prior) {
  double lp = 0.0;
  const double lg_a = std::lgamma(prior.sigma2_shape);
  for (int i = 0; i < lay.total(); ++i) {
    const double v = theta[i];
    switch (role_of(lay, i)) {
      case ParamRole::gating: lp += log_normal_pdf(v, 0.0, prior.gating_var); break;
      case ParamRole::slope: lp += log_normal_pdf(v, 0.0, prior.slope_var); break;
      case ParamRole::intercept: lp += log_normal_pdf(v, 0.0, prior.intercept_var); break;
      case ParamRole::log_variance:
        // inverse-gamma density of exp(v) plus the log-scale Jacobian
        lp += prior.sigma2_shape * std::log(prior.sigma2_rate) - lg_a -
              prior.sigma2_shape * v - prior.sigma2_rate * std::exp(-v);
        break;
    }
  }
  return lp;
}

inline void add_log_prior_grad(std::span<const double> theta, const ParamLayout& lay,
                               const PriorConfig& prior, std::span<double> grad) {
  for (int i = 0; i < lay.total(); ++i) {
    const double v = theta[i];
    switch (role_of(lay, i)) {
      case ParamRole::gating: grad[i] += -v / prior.gating_var; break;
      case ParamRole::slope: grad[i] += -v / prior.slope_var; break;
      case ParamRole::intercept: grad[i] += -v / prior.intercept_var; break;
      case ParamRole::log_variance:
        grad[i] += -prior.sigma2_shape + prior.sigma2_rate * std::exp(-v);
        break;
    }
  }
}

// Per-point likelihood workspace shared across evaluations.
struct LikelihoodScratch {
  std::vector<double> z, cz, means, inv_var, resid, mean_grad;
  void resize(int k, int p) {
    z.resize(k);
    cz.resize(k);
    means.resize(k);
    inv_var.resize(k);
    resid.resize(k);
    mean_grad.resize(p);
  }
};

}  // namespace detail

// log p(data, theta): log-likelihood of the conditional model plus the log
// priors. The covariate density is a constant in theta and is omitted.
inline double log_joint(std::span<const double> theta, const ParamLayout& lay,
                        const Dataset& data, const PriorConfig& prior) {
  require(static_cast<int>(theta.size()) == lay.total(), "log_joint: theta size mismatch");
  require(data.size() == 0 || data.input_dim == lay.d, "log_joint: data dimension mismatch");
  for (double v : theta)
    if (!std::isfinite(v)) throw NumericalError("log_joint: non-finite parameter");

  const MixingMeasure g = measure_from_theta(theta, lay);
  double ll = 0.0;
  for (int i = 0; i < data.size(); ++i)
    ll += log_conditional_density(g, data.y[i], data.row(i));
  return ll + detail::log_prior(theta, lay, prior);
}

// Value and analytic gradient of log_joint in one pass. For one point,
// with logits z_k, responsibilities rho_k and gate weights w_k:
//   d/dz_k       = rho_k - w_k
//   d/dmean_k    = rho_k * resid_k / sigma2_k
//   d/dlogsig2_k = rho_k * (resid_k^2 / sigma2_k - 1) / 2
// and the expert-mean chain rule routes d/dmean into the beta block.
inline double log_joint_grad(std::span<const double> theta, const ParamLayout& lay,
                             const Dataset& data, const PriorConfig& prior,
                             std::span<double> grad) {
  require(static_cast<int>(theta.size()) == lay.total(), "log_joint_grad: theta size mismatch");
  require(static_cast<int>(grad.size()) == lay.total(), "log_joint_grad: grad size mismatch");
  for (double v : theta)
    if (!std::isfinite(v)) throw NumericalError("log_joint_grad: non-finite parameter");

  std::fill(grad.begin(), grad.end(), 0.0);
  const int k = lay.k, d = lay.d, p = lay.p;
  static thread_local detail::LikelihoodScratch ws;
  ws.resize(k, p);

  std::vector<double> beta_j(p);
  double ll = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    const auto x = data.row(i);
    const double y = data.y[i];
    for (int j = 0; j < k; ++j) {
      double z = theta[lay.alpha0(j)];
      for (int u = 0; u < d; ++u) z += theta[lay.alpha1(j, u)] * x[u];
      ws.z[j] = z;
      for (int u = 0; u < p; ++u) beta_j[u] = theta[lay.beta(j, u)];
      const double lam = theta[lay.log_sigma2(j)];
      ws.inv_var[j] = std::exp(-lam);
      ws.means[j] = expert_mean(lay.family, beta_j, x);
      ws.resid[j] = y - ws.means[j];
      ws.cz[j] = z - 0.5 * (kLog2Pi + lam + ws.resid[j] * ws.resid[j] * ws.inv_var[j]);
    }
    const double lse_z = log_sum_exp(ws.z);
    const double lse_cz = log_sum_exp(ws.cz);
    ll += lse_cz - lse_z;
    for (int j = 0; j < k; ++j) {
      const double w = std::exp(ws.z[j] - lse_z);
      const double rho = std::exp(ws.cz[j] - lse_cz);
      const double dz = rho - w;
      grad[lay.alpha0(j)] += dz;
      for (int u = 0; u < d; ++u) grad[lay.alpha1(j, u)] += dz * x[u];
      const double dmean = rho * ws.resid[j] * ws.inv_var[j];
      for (int u = 0; u < p; ++u) beta_j[u] = theta[lay.beta(j, u)];
      expert_mean_grad(lay.family, beta_j, x, ws.mean_grad);
      for (int u = 0; u < p; ++u) grad[lay.beta(j, u)] += dmean * ws.mean_grad[u];
      grad[lay.log_sigma2(j)] +=
          0.5 * rho * (ws.resid[j] * ws.resid[j] * ws.inv_var[j] - 1.0);
    }
  }
  detail::add_log_prior_grad(theta, lay, prior, grad);
  return ll + detail::log_prior(theta, lay, prior);
}

// Mean-field Gaussian variational family over the flat parameter vector.
struct VariationalState {
  ParamLayout layout;
  std::vector<double> mean;
  std::vector<double> log_std;

  static VariationalState zeros(const ParamLayout& lay) {
    VariationalState q;
    q.layout = lay;
    q.mean.assign(lay.total(), 0.0);
    q.log_std.assign(lay.total(), 0.0);
    return q;
  }
};

inline double gaussian_entropy(const VariationalState& q) {
  double h = 0.0;
  for (double ls : q.log_std) h += ls + 0.5 * (kLog2Pi + 1.0);
  return h;
}

struct ElboEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Monte Carlo ELBO with location-scale samples theta = mean + exp(log_std)*eps
// and the Gaussian entropy taken in closed form, so the point-mass limit has
// vanishing estimator noise. Deterministic given (S, seed).
inline ElboEstimate elbo_estimate(const VariationalState& q, const Dataset& data,
                                  const PriorConfig& prior, int S, std::uint64_t seed) {
  require(S >= 1, "elbo_estimate: S must be >= 1");
  prior.validate();
  const int n = q.layout.total();
  Rng rng(seed);
  std::vector<double> theta(n), vals(S);
  for (int s = 0; s < S; ++s) {
    for (int i = 0; i < n; ++i) theta[i] = q.mean[i] + std::exp(q.log_std[i]) * rng.normal();
    vals[s] = log_joint(theta, q.layout, data, prior);
  }
  ElboEstimate est;
  est.value = mean_of(vals) + gaussian_entropy(q);
  est.std_error = S >= 2 ? sample_sd(vals) / std::sqrt(static_cast<double>(S)) : 0.0;
  return est;
}

// Pathwise gradient with respect to (mean, log_std), the same eps stream as
// elbo_estimate, and the exact entropy gradient (1 per log_std coordinate).
// Layout of the result: [d/dmean (P)] [d/dlog_std (P)].
struct ElboGradient {
  double value = 0.0;
  std::vector<double> d_mean;
  std::vector<double> d_log_std;
};

inline ElboGradient elbo_gradient(const VariationalState& q, const Dataset& data,
                                  const PriorConfig& prior, int S, std::uint64_t seed) {
  require(S >= 1, "elbo_gradient: S must be >= 1");
  prior.validate();
  const int n = q.layout.total();
  Rng rng(seed);
  ElboGradient out;
  out.d_mean.assign(n, 0.0);
  out.d_log_std.assign(n, 0.0);
  std::vector<double> theta(n), eps(n), grad(n);
  double value_sum = 0.0;
  for (int s = 0; s < S; ++s) {
    for (int i = 0; i < n; ++i) {
      eps[i] = rng.normal();
      theta[i] = q.mean[i] + std::exp(q.log_std[i]) * eps[i];
    }
    value_sum += log_joint_grad(theta, q.layout, data, prior, grad);
    for (int i = 0; i < n; ++i) {
      out.d_mean[i] += grad[i];
      out.d_log_std[i] += grad[i] * std::exp(q.log_std[i]) * eps[i];
    }
  }
  const double inv_s = 1.0 / static_cast<double>(S);
  for (int i = 0; i < n; ++i) {
    out.d_mean[i] *= inv_s;
    out.d_log_std[i] = out.d_log_std[i] * inv_s + 1.0;
  }
  out.value = value_sum * inv_s + gaussian_entropy(q);
  return out;
}

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct FitConfig {
  int iterations = 1000;
  double learning_rate = 0.05;
  // Linear learning-rate decay down to learning_rate * lr_decay_to at the
  // final iteration; 1.0 keeps the rate constant.
  double lr_decay_to = 1.0;
  int mc_samples_per_step = 1;
  int final_elbo_samples = 200;
  std::uint64_t seed = 0;
  AdamConfig adam;
  double init_mean_sd = 0.1;
  double init_log_std = -2.302585092994046;  // log(0.1)

  void validate() const {
    require(iterations >= 1, "fit: iterations must be >= 1");
    require(learning_rate > 0.0, "fit: learning rate must be positive");
    require(lr_decay_to > 0.0 && lr_decay_to <= 1.0, "fit: lr_decay_to must be in (0,1]");
    require(mc_samples_per_step >= 1, "fit: mc_samples_per_step must be >= 1");
    require(final_elbo_samples >= 1, "fit: final_elbo_samples must be >= 1");
  }
};

struct FitResult {
  VariationalState state;
  std::vector<double> elbo_trace;  // one single-sample value per iteration
  double final_elbo = 0.0;
  double final_elbo_std_error = 0.0;
  MixingMeasure point_estimate;  // variational means; sigma2 clamped to bounds
};

// Full-batch Adam ascent on the Monte Carlo ELBO. Aborts with a diagnostic
// naming the iteration and offending block when the objective or gradient
// turns non-finite.
inline FitResult fit(const Dataset& data, int k, ExpertFamily family, const PriorConfig& prior,
                     const FitConfig& cfg, const ParamBounds& bounds = {}) {
  require(k >= 1, "fit: k must be >= 1");
  cfg.validate();
  prior.validate();
  require(data.size() == 0 || data.input_dim >= 1, "fit: empty input dimension");
  const int d = data.input_dim >= 1 ? data.input_dim : 1;
  const auto lay = ParamLayout::make(family, k, d);
  const int n = lay.total();

  VariationalState q = VariationalState::zeros(lay);
  {
    Rng init_rng(derive_seed(cfg.seed, seed_salt::kFitInit));
    for (int i = 0; i < n; ++i) q.mean[i] = init_rng.normal(0.0, cfg.init_mean_sd);
    std::fill(q.log_std.begin(), q.log_std.end(), cfg.init_log_std);
  }

  auto first_bad_block = [&](std::span<const double> a, std::span<const double> b) {
    for (int i = 0; i < n; ++i)
      if (!std::isfinite(a[i]) || !std::isfinite(b[i])) return lay.block_name(i);
    return std::string("objective");
  };

  std::vector<double> m(2 * n, 0.0), v(2 * n, 0.0);
  FitResult result;
  result.elbo_trace.reserve(cfg.iterations);
  Rng step_rng(derive_seed(cfg.seed, seed_salt::kFitStep));

  std::vector<double> theta(n), eps(n), grad(n), g2(2 * n);
  const double b1 = cfg.adam.beta1, b2 = cfg.adam.beta2;
  double b1t = 1.0, b2t = 1.0;
  for (int t = 1; t <= cfg.iterations; ++t) {
    std::fill(g2.begin(), g2.end(), 0.0);
    double value_sum = 0.0;
    for (int s = 0; s < cfg.mc_samples_per_step; ++s) {
      for (int i = 0; i < n; ++i) {
        eps[i] = step_rng.normal();
        theta[i] = q.mean[i] + std::exp(q.log_std[i]) * eps[i];
      }
      value_sum += log_joint_grad(theta, lay, data, prior, grad);
      for (int i = 0; i < n; ++i) {
        g2[i] += grad[i];
        g2[n + i] += grad[i] * std::exp(q.log_std[i]) * eps[i];
      }
    }
    const double inv_s = 1.0 / static_cast<double>(cfg.mc_samples_per_step);
    for (int i = 0; i < n; ++i) {
      g2[i] *= inv_s;
      g2[n + i] = g2[n + i] * inv_s + 1.0;
    }
    const double elbo_t = value_sum * inv_s + gaussian_entropy(q);
    if (!std::isfinite(elbo_t))
      throw NumericalError("fit aborted at iteration " + std::to_string(t) +
                           ": non-finite ELBO (block " + first_bad_block(theta, grad) + ")");
    for (int i = 0; i < 2 * n; ++i)
      if (!std::isfinite(g2[i]))
        throw NumericalError("fit aborted at iteration " + std::to_string(t) +
                             ": non-finite gradient (block " + lay.block_name(i % n) + ")");
    result.elbo_trace.push_back(elbo_t);

    const double frac = cfg.iterations > 1
                            ? static_cast<double>(t - 1) / static_cast<double>(cfg.iterations - 1)
                            : 0.0;
    const double lr = cfg.learning_rate * (1.0 + (cfg.lr_decay_to - 1.0) * frac);
    b1t *= b1;
    b2t *= b2;
    for (int i = 0; i < 2 * n; ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g2[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g2[i] * g2[i];
      const double m_hat = m[i] / (1.0 - b1t);
      const double v_hat = v[i] / (1.0 - b2t);
      const double step = lr * m_hat / (std::sqrt(v_hat) + cfg.adam.eps);
      if (i < n)
        q.mean[i] += step;
      else
        q.log_std[i - n] += step;
    }
  }

  const auto final_est =
      elbo_estimate(q, data, prior, cfg.final_elbo_samples,
                    derive_seed(cfg.seed, seed_salt::kFinalElbo));
  result.state = q;
  result.final_elbo = final_est.value;
  result.final_elbo_std_error = final_est.std_error;
  result.point_estimate = measure_from_theta(q.mean, lay, &bounds);
  return result;
}

// Structured-text record of a fit: configuration echo, variational
// parameters, the final score, and the trace downsampled 1:100.
inline void write_fit_result(const std::string& path, const FitResult& r,
                             const FitConfig& cfg) {
  std::ofstream out(path);
  require(out.good(), "cannot open '" + path + "' for writing");
  const auto& lay = r.state.layout;
  out << "family = \"" << family_name(lay.family) << "\"\n";
  out << "k = " << lay.k << "\n";
  out << "d = " << lay.d << "\n";
  out << "iterations = " << cfg.iterations << "\n";
  out << "learning_rate = " << fmt_double(cfg.learning_rate) << "\n";
  out << "mc_samples_per_step = " << cfg.mc_samples_per_step << "\n";
  out << "final_elbo_samples = " << cfg.final_elbo_samples << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "final_elbo = " << fmt_double(r.final_elbo) << "\n";
  out << "final_elbo_std_error = " << fmt_double(r.final_elbo_std_error) << "\n";
  out << "mean = " << fmt_array(r.state.mean) << "\n";
  out << "log_std = " << fmt_array(r.state.log_std) << "\n";
  std::vector<double> trace;
  for (std::size_t i = 0; i < r.elbo_trace.size(); i += 100) trace.push_back(r.elbo_trace[i]);
  if (!r.elbo_trace.empty() && (r.elbo_trace.size() - 1) % 100 != 0)
    trace.push_back(r.elbo_trace.back());
  out << "elbo_trace_downsampled = " << fmt_array(trace) << "\n";
}

}  // namespace smoge
