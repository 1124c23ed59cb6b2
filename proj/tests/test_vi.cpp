#include <gtest/gtest.h>

#include "smoge/dgp.hpp"
#include "smoge/selection.hpp"
#include "smoge/vi.hpp"

using namespace smoge;

namespace {

Dataset empty_data(int d = 1) {
  Dataset ds;
  ds.input_dim = d;
  return ds;
}

VariationalState random_state(const ParamLayout& lay, Rng& rng) {
  auto q = VariationalState::zeros(lay);
  for (auto& m : q.mean) m = rng.uniform(-1.0, 1.0);
  for (auto& ls : q.log_std) ls = rng.uniform(-2.0, 0.0);
  return q;
}

Dataset make_data(Rng& rng, int n, int d) {
  Dataset ds;
  ds.input_dim = d;
  for (int i = 0; i < n; ++i) {
    for (int u = 0; u < d; ++u) ds.x.push_back(rng.uniform(-1, 1));
    ds.y.push_back(rng.uniform(-3, 3));
    ds.z.push_back(-1);
  }
  return ds;
}

}  // namespace

// Prior-only value at theta = 0 for K=1, d=1 linear: four Gaussian
// coordinates at -log(2 pi tau)/2 each, plus the inverse-gamma term
// log(4) - 2 at sigma2 = 1 (zero Jacobian).
TEST(LogJoint, PriorOnlyGoldenValue) {
  const auto lay = ParamLayout::make(ExpertFamily::linear, 1, 1);
  std::vector<double> theta(lay.total(), 0.0);
  const double value = log_joint(theta, lay, empty_data(), PriorConfig{});
  const double gauss = -0.5 * std::log(2.0 * M_PI * 10.0);
  const double ig = std::log(4.0) - 2.0;
  EXPECT_NEAR(value, 4.0 * gauss + ig, 1e-12);
  EXPECT_NEAR(value, -8.8946299576868917, 1e-12);
}

TEST(LogJoint, LikelihoodAdditivity) {
  const auto lay = ParamLayout::make(ExpertFamily::linear, 2, 2);
  Rng rng(4);
  std::vector<double> theta(lay.total());
  for (auto& v : theta) v = rng.uniform(-1, 1);
  const auto d1 = make_data(rng, 7, 2);
  const auto d2 = make_data(rng, 5, 2);
  Dataset both = d1;
  both.x.insert(both.x.end(), d2.x.begin(), d2.x.end());
  both.y.insert(both.y.end(), d2.y.begin(), d2.y.end());
  both.z.insert(both.z.end(), d2.z.begin(), d2.z.end());
  const PriorConfig prior;
  const double prior_part = log_joint(theta, lay, empty_data(2), prior);
  const double lhs = log_joint(theta, lay, both, prior) - prior_part;
  const double rhs = (log_joint(theta, lay, d1, prior) - prior_part) +
                     (log_joint(theta, lay, d2, prior) - prior_part);
  EXPECT_NEAR(lhs, rhs, 1e-10);
}

TEST(LogJoint, GatingPriorNormalizer) {
  const auto lay = ParamLayout::make(ExpertFamily::linear, 2, 2);
  std::vector<double> theta(lay.total(), 0.0);
  PriorConfig narrow, wide;
  wide.gating_var = 2.0 * narrow.gating_var;
  const double v_narrow = log_joint(theta, lay, empty_data(2), narrow);
  const double v_wide = log_joint(theta, lay, empty_data(2), wide);
  const int gating_coords = lay.k + lay.k * lay.d;  // 6
  EXPECT_NEAR(v_narrow - v_wide, 0.5 * std::log(2.0) * gating_coords, 1e-12);
}

TEST(LogJoint, NonFiniteParameterThrows) {
  const auto lay = ParamLayout::make(ExpertFamily::linear, 1, 1);
  std::vector<double> theta(lay.total(), 0.0);
  theta[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(log_joint(theta, lay, empty_data(), PriorConfig{}), NumericalError);
}

TEST(Elbo, PointMassLimitMatchesLogJointPlusEntropy) {
  const auto lay = ParamLayout::make(ExpertFamily::linear, 1, 2);
  Rng rng(9);
  auto q = VariationalState::zeros(lay);
  for (auto& m : q.mean) m = rng.uniform(-0.5, 0.5);
  std::fill(q.log_std.begin(), q.log_std.end(), -20.0);
  const auto data = make_data(rng, 10, 2);
  const auto est = elbo_estimate(q, data, PriorConfig{}, 16, 5);
  const double expected =
      log_joint(q.mean, lay, data, PriorConfig{}) + gaussian_entropy(q);
  EXPECT_NEAR(est.value, expected, 1e-6);
  EXPECT_LT(est.std_error, 1e-6);
}

TEST(Elbo, DeterministicGivenSeed) {
  const auto lay = ParamLayout::make(ExpertFamily::linear, 2, 1);
  Rng rng(3);
  const auto q = random_state(lay, rng);
  const auto data = make_data(rng, 6, 1);
  const auto a = elbo_estimate(q, data, PriorConfig{}, 1, 77);
  const auto b = elbo_estimate(q, data, PriorConfig{}, 1, 77);
  EXPECT_EQ(a.value, b.value);
  const auto c = elbo_estimate(q, data, PriorConfig{}, 1, 78);
  EXPECT_NE(a.value, c.value);
}

// With no data and q equal to the prior on every Gaussian block, those
// blocks contribute -KL(q || prior) = 0; subtracting the closed-form
// log-variance block term must leave zero within Monte Carlo error.
TEST(Elbo, PriorMatchedGaussianBlocksScoreZero) {
  const auto lay = ParamLayout::make(ExpertFamily::linear, 1, 1);
  auto q = VariationalState::zeros(lay);
  const PriorConfig prior;
  for (int i = 0; i < lay.total(); ++i) {
    q.mean[i] = 0.0;
    q.log_std[i] = 0.5 * std::log(prior.gating_var);
  }
  const double lam_mean = 0.3, lam_sd = 0.5;
  q.mean[lay.log_sigma2(0)] = lam_mean;
  q.log_std[lay.log_sigma2(0)] = std::log(lam_sd);

  const auto est = elbo_estimate(q, empty_data(), prior, 4000, 11);
  // E[log p(lambda)] under N(0.3, 0.5^2) plus that block's entropy
  const double a = prior.sigma2_shape, b = prior.sigma2_rate;
  const double elogp = a * std::log(b) - std::lgamma(a) - a * lam_mean -
                       b * std::exp(-lam_mean + 0.5 * lam_sd * lam_sd);
  const double h_lam = 0.5 * (kLog2Pi + 1.0) + std::log(lam_sd);
  EXPECT_NEAR(elogp + h_lam, -0.89261968041852413 + 0.72579135264472738, 1e-12);
  EXPECT_NEAR(est.value - (elogp + h_lam), 0.0, 3.0 * est.std_error);
}

// The core numerical check: pathwise gradients against central finite
// differences of the estimator itself, same seed and step 1e-5.
TEST(ElboGradient, MatchesFiniteDifferences) {
  Rng rng(2024);
  double worst = 0.0;
  for (int instance = 0; instance < 20; ++instance) {
    const int k = 1 + instance % 3;
    const int d = 1 + (instance / 3) % 3;
    const auto lay = ParamLayout::make(ExpertFamily::linear, k, d);
    auto q = random_state(lay, rng);
    const auto data = make_data(rng, 3 + instance, d);
    const std::uint64_t seed = 500 + instance;
    const int S = 2;
    const PriorConfig prior;
    const auto grad = elbo_gradient(q, data, prior, S, seed);

    const double h = 1e-5;
    double max_abs = 1.0;
    for (double gi : grad.d_mean) max_abs = std::max(max_abs, std::abs(gi));
    for (double gi : grad.d_log_std) max_abs = std::max(max_abs, std::abs(gi));
    double max_err = 0.0;
    for (int i = 0; i < lay.total(); ++i) {
      auto qp = q, qm = q;
      qp.mean[i] += h;
      qm.mean[i] -= h;
      const double fd = (elbo_estimate(qp, data, prior, S, seed).value -
                         elbo_estimate(qm, data, prior, S, seed).value) /
                        (2.0 * h);
      max_err = std::max(max_err, std::abs(fd - grad.d_mean[i]));
      qp = q;
      qm = q;
      qp.log_std[i] += h;
      qm.log_std[i] -= h;
      const double fd_ls = (elbo_estimate(qp, data, prior, S, seed).value -
                            elbo_estimate(qm, data, prior, S, seed).value) /
                           (2.0 * h);
      max_err = std::max(max_err, std::abs(fd_ls - grad.d_log_std[i]));
    }
    worst = std::max(worst, max_err / max_abs);
  }
  EXPECT_LT(worst, 1e-4);
}

// Stationarity at the prior: with no data, Gaussian-block gradients vanish
// in expectation.
TEST(ElboGradient, PriorMatchedBlocksAreStationary) {
  const auto lay = ParamLayout::make(ExpertFamily::linear, 1, 2);
  const PriorConfig prior;
  auto q = VariationalState::zeros(lay);
  for (int i = 0; i < lay.total(); ++i) q.log_std[i] = 0.5 * std::log(prior.gating_var);
  // keep the log-variance block wherever it likes; examine Gaussian coords
  const int reps = 12;
  std::vector<std::vector<double>> means(reps);
  for (int r = 0; r < reps; ++r) {
    const auto g = elbo_gradient(q, empty_data(2), prior, 200, 900 + r);
    for (int i = 0; i < lay.total(); ++i)
      if (role_of(lay, i) != ParamRole::log_variance) {
        means[r].push_back(g.d_mean[i]);
        means[r].push_back(g.d_log_std[i]);
      }
  }
  for (std::size_t coord = 0; coord < means[0].size(); ++coord) {
    std::vector<double> vals;
    for (int r = 0; r < reps; ++r) vals.push_back(means[r][coord]);
    const double m = mean_of(vals);
    const double se = sample_sd(vals) / std::sqrt(static_cast<double>(reps));
    EXPECT_LE(std::abs(m), 3.0 * se + 1e-3) << "coordinate " << coord;
  }
}

// With y identically zero on an x-mirrored design and a centered state,
// the likelihood contribution to the slope-mean gradient averages out: it
// must match the no-data gradient within Monte Carlo error.
TEST(ElboGradient, CenteredSlopeGradientMatchesPriorOnly) {
  const auto lay = ParamLayout::make(ExpertFamily::linear, 1, 1);
  auto q = VariationalState::zeros(lay);
  std::fill(q.log_std.begin(), q.log_std.end(), std::log(0.1));
  Dataset data;
  data.input_dim = 1;
  data.x = {0.6, -0.6};
  data.y = {0.0, 0.0};
  data.z = {-1, -1};
  const int slope_idx = lay.beta(0, 1);
  const int S = 400;
  std::vector<double> diffs;
  for (int s = 0; s < S; ++s) {
    const auto with_data = elbo_gradient(q, data, PriorConfig{}, 1, 4000 + s);
    const auto without = elbo_gradient(q, empty_data(), PriorConfig{}, 1, 4000 + s);
    diffs.push_back(with_data.d_mean[slope_idx] - without.d_mean[slope_idx]);
  }
  const double m = mean_of(diffs);
  const double se = sample_sd(diffs) / std::sqrt(static_cast<double>(S));
  EXPECT_LE(std::abs(m), 3.0 * se + 1e-12);
}

TEST(Fit, SingleIterationTrace) {
  Rng rng(1);
  const auto data = make_data(rng, 5, 1);
  FitConfig cfg;
  cfg.iterations = 1;
  cfg.seed = 3;
  const auto r = fit(data, 1, ExpertFamily::linear, PriorConfig{}, cfg);
  EXPECT_EQ(r.elbo_trace.size(), 1u);
}

TEST(Fit, DeterministicGivenConfig) {
  const auto data = sample_dgp(DgpSpec::b2(), 40, 5);
  FitConfig cfg;
  cfg.iterations = 300;
  cfg.learning_rate = 0.05;
  cfg.seed = 11;
  const auto a = fit(data, 2, ExpertFamily::linear, PriorConfig{}, cfg);
  const auto b = fit(data, 2, ExpertFamily::linear, PriorConfig{}, cfg);
  EXPECT_EQ(a.final_elbo, b.final_elbo);
  EXPECT_EQ(a.state.mean, b.state.mean);
  EXPECT_EQ(a.state.log_std, b.state.log_std);
  EXPECT_EQ(a.elbo_trace, b.elbo_trace);
}

TEST(Fit, PointEstimateInvariants) {
  const auto data = sample_dgp(DgpSpec::b2(), 60, 6);
  FitConfig cfg;
  cfg.iterations = 400;
  cfg.seed = 2;
  const auto r = fit(data, 2, ExpertFamily::linear, PriorConfig{}, cfg);
  validate_measure(r.point_estimate);
  EXPECT_EQ(r.point_estimate.size(), 2);
  for (const auto& c : r.point_estimate.components) {
    EXPECT_GE(c.sigma2, ParamBounds{}.sigma2_lo);
    EXPECT_LE(c.sigma2, ParamBounds{}.sigma2_hi);
  }
  for (double v : r.elbo_trace) EXPECT_TRUE(std::isfinite(v));
}

TEST(Fit, DivergentLearningRateAborts) {
  const auto data = sample_dgp(DgpSpec::b2(), 50, 9);
  FitConfig cfg;
  cfg.iterations = 2000;
  cfg.learning_rate = 1e6;
  cfg.seed = 1;
  EXPECT_THROW(fit(data, 2, ExpertFamily::linear, PriorConfig{}, cfg), NumericalError);
}

// Smoothed trace near the end should not sit below its level around
// iteration 100 on benchmark-regime fits.
TEST(Fit, SmoothedTraceTrendsUpward) {
  const auto data = sample_dgp(DgpSpec::b2(), 100, 21);
  FitConfig cfg;
  cfg.iterations = 5000;
  cfg.learning_rate = 0.015;
  cfg.seed = 4;
  for (int k : {1, 2}) {
    const auto r = fit(data, k, ExpertFamily::linear, PriorConfig{}, cfg);
    auto window_mean = [&](int center) {
      const int lo = std::max(0, center - 100);
      const int hi = std::min<int>(r.elbo_trace.size(), center + 100);
      double s = 0.0;
      for (int i = lo; i < hi; ++i) s += r.elbo_trace[i];
      return s / (hi - lo);
    };
    EXPECT_GE(window_mean(cfg.iterations - 100), window_mean(100));
  }
}

// At n = 100 on the half-plane benchmark, the two-expert model should
// out-score the single expert in nearly every replication.
TEST(Fit, TwoRegimeDataPrefersTwoExperts) {
  int wins = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    const auto data = sample_dgp(DgpSpec::b2(), 100, 1000 + s);
    FitConfig cfg;
    cfg.iterations = 10000;  // desk-scale benchmark budget
    cfg.learning_rate = 0.015;
    cfg.seed = 77 + s;
    const auto k1 = fit(data, 1, ExpertFamily::linear, PriorConfig{}, cfg);
    const auto k2 = fit(data, 2, ExpertFamily::linear, PriorConfig{}, cfg);
    wins += k2.final_elbo > k1.final_elbo ? 1 : 0;
  }
  EXPECT_GE(wins, 16) << wins << "/" << seeds;
}

// Long single-expert fit recovers the regression parameters to within a
// few posterior standard deviations.
TEST(Fit, SingleExpertRecoversRegression) {
  MixingMeasure truth;
  truth.family = ExpertFamily::linear;
  truth.input_dim = 1;
  truth.components = {{0.0, {0.0}, {1.2, 0.7}, 0.25}};
  const int n = 2000;
  const auto data = sample_smoge(truth, n, 31);
  FitConfig cfg;
  cfg.iterations = 4000;
  cfg.learning_rate = 0.03;
  cfg.lr_decay_to = 0.05;
  cfg.seed = 8;
  const auto r = fit(data, 1, ExpertFamily::linear, PriorConfig{}, cfg);
  const auto& c = r.point_estimate.components[0];
  // posterior sd of the intercept is about sigma / sqrt(n)
  const double post_sd = std::sqrt(0.25 / n);
  EXPECT_NEAR(c.beta[0], 1.2, 3.0 * post_sd + 0.02);
  EXPECT_NEAR(c.beta[1], 0.7, 3.0 * std::sqrt(3.0) * post_sd + 0.03);
  EXPECT_NEAR(c.sigma2, 0.25, 0.05);
}

TEST(Fit, ConfigValidation) {
  FitConfig cfg;
  cfg.iterations = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = FitConfig{};
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = FitConfig{};
  cfg.final_elbo_samples = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}
