#pragma once

#include <limits>
#include <ostream>
#include <vector>

#include "smoge/dgp.hpp"
#include "smoge/divergence.hpp"
#include "smoge/identifiability.hpp"
#include "smoge/mh.hpp"
#include "smoge/parallel.hpp"
#include "smoge/vi.hpp"

namespace smoge {

enum class Estimator { vi_mean, mh_posterior_mean };

inline std::string estimator_name(Estimator e) {
  return e == Estimator::vi_mean ? "vi" : "mh";
}

inline Estimator estimator_from_name(const std::string& s) {
  if (s == "vi" || s == "vi_mean") return Estimator::vi_mean;
  if (s == "mh" || s == "mh_posterior_mean") return Estimator::mh_posterior_mean;
  throw ConfigError("unknown estimator '" + s + "'");
}

struct PointEstimateConfig {
  FitConfig fit;
  int mh_steps = 4000;
  double mh_proposal_scale = 0.1;
  bool mh_init_from_vi = true;
  ParamBounds bounds;
};

// Point estimate of the mixing measure: variational means, or the
// post-burn-in coordinate mean of a random-walk chain (the last
// ceil(steps/2) states). Gating is normalized either way.
inline MixingMeasure point_estimate(const Dataset& data, int k, ExpertFamily family,
                                    const PriorConfig& prior, Estimator method,
                                    const PointEstimateConfig& cfg) {
  if (method == Estimator::vi_mean) {
    const auto r = fit(data, k, family, prior, cfg.fit, cfg.bounds);
    return normalize_gating(r.point_estimate);
  }
  std::vector<double> init;
  if (cfg.mh_init_from_vi) {
    const auto r = fit(data, k, family, prior, cfg.fit, cfg.bounds);
    init = r.state.mean;
  }
  const auto chain = mh_sample(data, k, family, prior, cfg.bounds, cfg.mh_steps,
                               cfg.mh_proposal_scale, cfg.fit.seed,
                               init.empty() ? nullptr : &init);
  const auto mean = mh_posterior_mean(chain);
  return normalize_gating(measure_from_theta(mean, chain.layout, &cfg.bounds));
}

// Loss-versus-n slope experiment. Per (n, replication): simulate from the
// normalized truth, estimate, and record the Hellinger distance plus the
// Voronoi loss (first-power loss for exactly-specified fits, squared
// variant when over-specified). Slopes are least-squares fits of
// log(median loss at n) on log(n).
struct RateSchedule {
  std::vector<int> n_grid;
  int replications_per_n = 10;
  // Components fitted beyond K*; 0 targets the exactly-specified regime
  // (first-power loss), anything above switches to the squared loss.
  int fit_extra = 0;
  Estimator estimator = Estimator::vi_mean;
  PointEstimateConfig estimate_cfg;
  int hellinger_mc = kDefaultPairwiseMc;
  double tail_radius_multiplier = 10.0;  // mh only: M in M * sqrt(log n / n)
};

struct RatePoint {
  int n = 0;
  int replication = 0;
  double hellinger = 0.0;
  double voronoi_loss = 0.0;
  // mh estimator only: share of kept chain states with loss beyond
  // M sqrt(log n / n); NaN otherwise
  double tail_fraction = std::numeric_limits<double>::quiet_NaN();
};

struct RateResult {
  std::vector<RatePoint> points;
  std::vector<double> median_loss_per_n;
  std::vector<double> median_hellinger_per_n;
  SlopeFit loss_slope;
  SlopeFit hellinger_slope;
};

inline RateResult rate_experiment(const RateSchedule& schedule, const MixingMeasure& g_star,
                                  const PriorConfig& prior, std::uint64_t seed, int jobs = 1) {
  require(schedule.n_grid.size() >= 3, "rate experiment needs an n grid of length >= 3");
  for (std::size_t i = 1; i < schedule.n_grid.size(); ++i)
    require(schedule.n_grid[i] > schedule.n_grid[i - 1], "n grid must be increasing");
  require(schedule.replications_per_n >= 1, "need at least one replication per n");
  validate_measure(g_star);
  require(gating_normalized(g_star), "rate experiment: reference must be gating-normalized");

  require(schedule.fit_extra >= 0, "rate experiment: fit_extra must be >= 0");
  const LossKind kind = schedule.fit_extra > 0 ? LossKind::l2 : LossKind::l1;
  const int fit_k = g_star.size() + schedule.fit_extra;
  const int n_points = static_cast<int>(schedule.n_grid.size());
  const int reps = schedule.replications_per_n;

  RateResult result;
  result.points.assign(static_cast<std::size_t>(n_points) * reps, {});
  parallel_for(n_points * reps, jobs, [&](int task) {
    const int ni = task / reps;
    const int rep = task % reps;
    const int n = schedule.n_grid[ni];
    const std::uint64_t task_seed =
        derive_seed(seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep));
    const Dataset data = sample_smoge(g_star, n, derive_seed(task_seed, seed_salt::kData));

    PointEstimateConfig cfg = schedule.estimate_cfg;
    cfg.fit.seed = derive_seed(task_seed, seed_salt::kFit);

    RatePoint pt;
    pt.n = n;
    pt.replication = rep;
    if (schedule.estimator == Estimator::mh_posterior_mean) {
      std::vector<double> init;
      if (cfg.mh_init_from_vi) init = fit(data, fit_k, g_star.family, prior, cfg.fit).state.mean;
      const auto chain = mh_sample(data, fit_k, g_star.family, prior, cfg.bounds, cfg.mh_steps,
                                   cfg.mh_proposal_scale, cfg.fit.seed,
                                   init.empty() ? nullptr : &init);
      const auto mean = mh_posterior_mean(chain);
      const auto est = normalize_gating(measure_from_theta(mean, chain.layout, &cfg.bounds));
      pt.voronoi_loss = aligned_voronoi_loss(est, g_star, kind).total;
      pt.hellinger = std::sqrt(std::max(
          0.0, hellinger_sq_mc(est, g_star, schedule.hellinger_mc,
                               derive_seed(task_seed, seed_salt::kLoss))
                   .value));
      // posterior tail mass outside the shrinking ball, kept-half states
      const double radius = schedule.tail_radius_multiplier *
                            std::sqrt(std::log(static_cast<double>(n)) / n);
      const std::size_t keep = (chain.chain.size() + 1) / 2;
      std::size_t outside = 0;
      for (std::size_t t = chain.chain.size() - keep; t < chain.chain.size(); ++t) {
        const auto state =
            normalize_gating(measure_from_theta(chain.chain[t], chain.layout, &cfg.bounds));
        if (aligned_voronoi_loss(state, g_star, kind).total > radius) ++outside;
      }
      pt.tail_fraction = static_cast<double>(outside) / static_cast<double>(keep);
    } else {
      const auto est = point_estimate(data, fit_k, g_star.family, prior, schedule.estimator, cfg);
      pt.voronoi_loss = aligned_voronoi_loss(est, g_star, kind).total;
      pt.hellinger = std::sqrt(std::max(
          0.0, hellinger_sq_mc(est, g_star, schedule.hellinger_mc,
                               derive_seed(task_seed, seed_salt::kLoss))
                   .value));
    }
    result.points[static_cast<std::size_t>(ni) * reps + rep] = pt;
  });

  std::vector<double> log_n, log_loss, log_hell;
  for (int ni = 0; ni < n_points; ++ni) {
    std::vector<double> losses, hells;
    for (int rep = 0; rep < reps; ++rep) {
      const auto& pt = result.points[static_cast<std::size_t>(ni) * reps + rep];
      losses.push_back(pt.voronoi_loss);
      hells.push_back(pt.hellinger);
    }
    const double med_loss = median_of(losses);
    const double med_hell = median_of(hells);
    require(med_loss > 0.0 && med_hell > 0.0, "rate experiment: vanishing median loss");
    result.median_loss_per_n.push_back(med_loss);
    result.median_hellinger_per_n.push_back(med_hell);
    log_n.push_back(std::log(static_cast<double>(schedule.n_grid[ni])));
    log_loss.push_back(std::log(med_loss));
    log_hell.push_back(std::log(med_hell));
  }
  result.loss_slope = fit_slope(log_n, log_loss);
  result.hellinger_slope = fit_slope(log_n, log_hell);
  return result;
}

// Hellinger-to-Voronoi ratio scan: perturb the reference by a random
// direction scaled so the Voronoi loss lands near eps, then record
// d_H / loss per trial. For the squared loss one atom is split in two
// first, so the perturbed measure over-fits the reference.
struct RatioScanConfig {
  std::vector<double> eps_list;  // decreasing, all > 0
  int trials_per_eps = 50;
  LossKind loss = LossKind::l2;
  int n_mc = kDefaultPairwiseMc;
  ParamBounds bounds;
};

struct RatioScanTrial {
  double eps = 0.0;
  double achieved_loss = 0.0;
  double hellinger = 0.0;
  double ratio = 0.0;
  bool flagged = false;  // MC error still above 10% after the 4x retry
};

struct RatioScanRow {
  double eps = 0.0;
  double min_ratio = 0.0;
  double median_ratio = 0.0;
  int flagged = 0;
};

struct RatioScanResult {
  std::vector<RatioScanTrial> trials;
  std::vector<RatioScanRow> per_eps;
};

namespace detail {

struct PerturbationDirection {
  std::vector<double> d_alpha0, d_alpha1, d_beta, d_sigma2;  // per component
};

inline MixingMeasure apply_perturbation(const MixingMeasure& base,
                                        const PerturbationDirection& dir, double scale) {
  MixingMeasure g = base;
  const int d = g.input_dim;
  const int p = expert_param_count(g.family, d);
  for (int j = 0; j < g.size(); ++j) {
    auto& c = g.components[j];
    c.alpha0 += scale * dir.d_alpha0[j];
    for (int u = 0; u < d; ++u) c.alpha1[u] += scale * dir.d_alpha1[j * d + u];
    for (int u = 0; u < p; ++u) c.beta[u] += scale * dir.d_beta[j * p + u];
    c.sigma2 += scale * dir.d_sigma2[j];
  }
  return g;
}

}  // namespace detail

inline RatioScanResult hellinger_voronoi_ratio_scan(const MixingMeasure& g_star,
                                                    const RatioScanConfig& cfg,
                                                    std::uint64_t seed, int jobs = 1) {
  validate_measure(g_star);
  require(!cfg.eps_list.empty(), "ratio scan: eps list is empty");
  for (std::size_t i = 0; i < cfg.eps_list.size(); ++i) {
    require(cfg.eps_list[i] > 0.0, "ratio scan: eps must be positive");
    if (i > 0) require(cfg.eps_list[i] < cfg.eps_list[i - 1], "ratio scan: eps must decrease");
  }
  require(cfg.trials_per_eps >= 1, "ratio scan: need at least one trial");
  require(gating_normalized(g_star), "ratio scan: reference must be gating-normalized");
  require(check_assumption4(g_star).pass, "ratio scan: reference has coinciding components");
  if (cfg.loss == LossKind::l2)
    require(g_star.family == ExpertFamily::sigmoid,
            "squared-loss scan expects a sigmoid-expert reference");

  // The squared loss is probed in the over-fitted regime: duplicate the
  // first atom with halved weights before perturbing.
  MixingMeasure base = g_star;
  if (cfg.loss == LossKind::l2) {
    ExpertComponent split = base.components[0];
    base.components[0].alpha0 -= kLogTwo;
    split.alpha0 -= kLogTwo;
    base.components.insert(base.components.begin() + 1, split);
  }

  const int d = base.input_dim;
  const int p = expert_param_count(base.family, d);
  const int k = base.size();
  const int n_eps = static_cast<int>(cfg.eps_list.size());

  RatioScanResult result;
  result.trials.assign(static_cast<std::size_t>(n_eps) * cfg.trials_per_eps, {});
  parallel_for(n_eps * cfg.trials_per_eps, jobs, [&](int task) {
    const int ei = task / cfg.trials_per_eps;
    const int trial = task % cfg.trials_per_eps;
    const double eps = cfg.eps_list[ei];
    const std::uint64_t trial_seed = derive_seed(seed, seed_salt::kScan,
                                                 static_cast<std::uint64_t>(ei),
                                                 static_cast<std::uint64_t>(trial));
    Rng rng(trial_seed);

    // Unit direction over all blocks; weights move on the log scale.
    detail::PerturbationDirection dir;
    dir.d_alpha0.resize(k);
    dir.d_alpha1.resize(k * d);
    dir.d_beta.resize(k * p);
    dir.d_sigma2.resize(k);
    double norm_sq = 0.0;
    auto draw = [&](std::vector<double>& v) {
      for (auto& e : v) {
        e = rng.normal();
        norm_sq += e * e;
      }
    };
    draw(dir.d_alpha0);
    draw(dir.d_alpha1);
    draw(dir.d_beta);
    draw(dir.d_sigma2);
    const double inv_norm = 1.0 / std::sqrt(norm_sq);
    for (auto* v : {&dir.d_alpha0, &dir.d_alpha1, &dir.d_beta, &dir.d_sigma2})
      for (auto& e : *v) e *= inv_norm;

    auto loss_at = [&](double scale) {
      const auto g = detail::apply_perturbation(base, dir, scale);
      for (const auto& c : g.components)
        if (c.sigma2 <= cfg.bounds.sigma2_lo) return std::numeric_limits<double>::infinity();
      return voronoi_loss(g, g_star, cfg.loss).total;
    };

    // Calibrate the scale so the achieved loss lands at eps.
    double hi = eps;
    int expansions = 0;
    while (loss_at(hi) < eps && expansions++ < 60) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (loss_at(mid) < eps)
        lo = mid;
      else
        hi = mid;
    }
    const double scale = hi;
    const auto g = detail::apply_perturbation(base, dir, scale);

    RatioScanTrial t;
    t.eps = eps;
    t.achieved_loss = voronoi_loss(g, g_star, cfg.loss).total;
    int n_mc = cfg.n_mc;
    for (int attempt = 0;; ++attempt) {
      const auto est = hellinger_sq_mc(g, g_star, n_mc,
                                       derive_seed(trial_seed, seed_salt::kLoss,
                                                   static_cast<std::uint64_t>(attempt)));
      const double h = std::sqrt(std::max(est.value, 0.0));
      const double h_se = h > 0.0 ? est.std_error / (2.0 * h) : est.std_error;
      t.hellinger = h;
      if (h > 0.0 && h_se <= 0.1 * h) {
        t.flagged = false;
        break;
      }
      if (attempt >= 1) {
        t.flagged = true;
        break;
      }
      n_mc *= 4;
    }
    t.ratio = t.achieved_loss > 0.0 ? t.hellinger / t.achieved_loss : 0.0;
    result.trials[static_cast<std::size_t>(ei) * cfg.trials_per_eps + trial] = t;
  });

  for (int ei = 0; ei < n_eps; ++ei) {
    RatioScanRow row;
    row.eps = cfg.eps_list[ei];
    std::vector<double> ratios;
    double min_ratio = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < cfg.trials_per_eps; ++trial) {
      const auto& t = result.trials[static_cast<std::size_t>(ei) * cfg.trials_per_eps + trial];
      ratios.push_back(t.ratio);
      min_ratio = std::min(min_ratio, t.ratio);
      row.flagged += t.flagged ? 1 : 0;
    }
    row.min_ratio = min_ratio;
    row.median_ratio = median_of(ratios);
    result.per_eps.push_back(row);
  }
  return result;
}

inline void emit_rate_points_csv(const RateResult& r, std::ostream& out) {
  out << "n,replication,hellinger,voronoi_loss,tail_fraction\n";
  for (const auto& pt : r.points) {
    out << pt.n << "," << pt.replication << "," << fmt_double(pt.hellinger) << ","
        << fmt_double(pt.voronoi_loss) << ","
        << (std::isnan(pt.tail_fraction) ? "" : fmt_double(pt.tail_fraction)) << "\n";
  }
}

inline void emit_rate_summary(const RateResult& r, const RateSchedule& schedule,
                              std::ostream& out) {
  out << "n,median_loss,median_hellinger\n";
  for (std::size_t i = 0; i < schedule.n_grid.size(); ++i)
    out << schedule.n_grid[i] << "," << fmt_double(r.median_loss_per_n[i]) << ","
        << fmt_double(r.median_hellinger_per_n[i]) << "\n";
  out << "\nloss_slope," << fmt_double(r.loss_slope.slope) << ",stderr,"
      << fmt_double(r.loss_slope.slope_std_error) << "\n";
  out << "hellinger_slope," << fmt_double(r.hellinger_slope.slope) << ",stderr,"
      << fmt_double(r.hellinger_slope.slope_std_error) << "\n";
}

inline void emit_ratio_scan_csv(const RatioScanResult& r, std::ostream& out) {
  out << "eps,achieved_loss,hellinger,ratio,flagged\n";
  for (const auto& t : r.trials)
    out << fmt_double(t.eps) << "," << fmt_double(t.achieved_loss) << ","
        << fmt_double(t.hellinger) << "," << fmt_double(t.ratio) << "," << (t.flagged ? 1 : 0)
        << "\n";
}

}  // namespace smoge
