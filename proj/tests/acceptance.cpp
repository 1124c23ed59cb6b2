// Acceptance suite: one pass/fail line per criterion. Criterion 2 needs the
// full benchmark budget and only runs with --paper-scale; everything else is
// desk scale and CI-sized. Run a single criterion with --criterion N.

#include <chrono>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "smoge/contraction.hpp"
#include "smoge/reference_models.hpp"
#include "smoge/selection.hpp"

using namespace smoge;

namespace {

struct Outcome {
  bool pass = false;
  bool skipped = false;
  std::string detail;
};

int g_jobs = default_jobs();

double proportion_for(const SelectionResult& r, int k) {
  for (std::size_t ci = 0; ci < r.candidates.size(); ++ci)
    if (r.candidates[ci] == k) return r.win_proportions[ci];
  return 0.0;
}

int modal_winner(const SelectionResult& r) {
  int best = 0;
  for (std::size_t ci = 1; ci < r.candidates.size(); ++ci)
    if (r.win_proportions[ci] > r.win_proportions[best]) best = static_cast<int>(ci);
  return r.candidates[best];
}

// ---- criterion 1: two-regime table row at desk scale ----------------------

struct SelectionArtifact {
  SelectionResult result;
  std::string table_csv;
};

SelectionArtifact run_table_row_desk() {
  SelectionConfig cfg;
  cfg.dgp = DgpSpec::b4(10.0, 2, 2);
  cfg.n = 500;
  cfg.candidates = {1, 2, 3, 4, 5, 6, 7};
  cfg.replications = 20;
  cfg.scale = RunScale::desk;  // 4000 / 5 = 800 iterations
  cfg.master_seed = 20240501;
  cfg.jobs = g_jobs;
  const auto result = run_selection(cfg);
  std::ostringstream csv;
  emit_table_csv(std::vector<SelectionResult>{result}, csv);
  return {result, csv.str()};
}

Outcome criterion1() {
  const auto art = run_table_row_desk();
  const double prop = proportion_for(art.result, 2);
  Outcome o;
  o.pass = modal_winner(art.result) == 2 && prop >= 0.55 && art.result.failed_count == 0;
  std::ostringstream ss;
  ss << "K=2 proportion " << prop << " (modal winner K=" << modal_winner(art.result)
     << ", failed " << art.result.failed_count << ")";
  o.detail = ss.str();
  return o;
}

// ---- criterion 2: full-budget table row (flag-gated) -----------------------

Outcome criterion2(bool paper_scale) {
  Outcome o;
  if (!paper_scale) {
    o.skipped = true;
    o.detail = "needs --paper-scale (100 replications at the full budget)";
    return o;
  }
  SelectionConfig cfg;
  cfg.dgp = DgpSpec::b4(5.0, 2, 2);
  cfg.n = 500;
  cfg.candidates = {1, 2, 3, 4, 5, 6, 7};
  cfg.replications = 100;
  cfg.scale = RunScale::paper;
  cfg.master_seed = 20240502;
  cfg.jobs = g_jobs;
  const auto result = run_selection(cfg);
  const double prop = proportion_for(result, 2);
  o.pass = std::abs(prop - 0.76) <= 0.15;
  std::ostringstream ss;
  ss << "K=2 proportion " << prop << " vs 0.76 +- 0.15";
  o.detail = ss.str();
  return o;
}

// ---- criterion 3: half-plane sweep trend -----------------------------------

Outcome criterion3() {
  SelectionConfig cfg;
  cfg.dgp = DgpSpec::b2();
  cfg.candidates = {1, 2, 3, 4};
  cfg.replications = 20;
  cfg.scale = RunScale::desk;  // 50000 / 5 = 10000 iterations
  cfg.master_seed = 20240503;
  cfg.jobs = g_jobs;
  const auto sweep = run_figure_sweep(cfg, {10, 25, 50, 100});
  const double at_10 = proportion_for(sweep.front(), 2);
  const double at_100 = proportion_for(sweep.back(), 2);
  Outcome o;
  o.pass = at_100 >= at_10 && at_100 >= 0.60;
  std::ostringstream ss;
  ss << "correct-selection proportion " << at_10 << " at n=10, " << at_100
     << " at n=100 (need >= 0.60 and monotone endpoints)";
  o.detail = ss.str();
  return o;
}

// ---- criterion 4: single-regime sanity --------------------------------------

Outcome criterion4() {
  SelectionConfig cfg;
  cfg.dgp = DgpSpec::b4(5.0, 2, 1);
  cfg.n = 500;
  cfg.candidates = {1, 2, 3, 4, 5, 6, 7};
  cfg.replications = 20;
  cfg.scale = RunScale::desk;  // 10000 / 5 = 2000 iterations at rate 0.06
  cfg.master_seed = 20240504;
  cfg.jobs = g_jobs;
  const auto result = run_selection(cfg);
  const double prop = proportion_for(result, 1);
  Outcome o;
  o.pass = prop >= 0.9;
  std::ostringstream ss;
  ss << "K=1 proportion " << prop << " (need >= 0.9)";
  o.detail = ss.str();
  return o;
}

// ---- criterion 5: gradient against central finite differences ---------------

Outcome criterion5() {
  Rng rng(20240505);
  double worst = 0.0;
  for (int instance = 0; instance < 20; ++instance) {
    const int k = 1 + instance % 3;
    const int d = 1 + (instance / 3) % 3;
    const auto lay = ParamLayout::make(ExpertFamily::linear, k, d);
    VariationalState q = VariationalState::zeros(lay);
    for (auto& m : q.mean) m = rng.uniform(-1, 1);
    for (auto& ls : q.log_std) ls = rng.uniform(-2, 0);
    Dataset data;
    data.input_dim = d;
    const int n = 3 + instance;
    for (int i = 0; i < n; ++i) {
      for (int u = 0; u < d; ++u) data.x.push_back(rng.uniform(-1, 1));
      data.y.push_back(rng.uniform(-3, 3));
      data.z.push_back(-1);
    }
    const std::uint64_t seed = 600 + instance;
    const PriorConfig prior;
    const auto grad = elbo_gradient(q, data, prior, 2, seed);
    double max_abs = 1.0;
    for (double gi : grad.d_mean) max_abs = std::max(max_abs, std::abs(gi));
    for (double gi : grad.d_log_std) max_abs = std::max(max_abs, std::abs(gi));
    const double h = 1e-5;
    double max_err = 0.0;
    for (int i = 0; i < lay.total(); ++i) {
      auto qp = q, qm = q;
      qp.mean[i] += h;
      qm.mean[i] -= h;
      double fd = (elbo_estimate(qp, data, prior, 2, seed).value -
                   elbo_estimate(qm, data, prior, 2, seed).value) /
                  (2 * h);
      max_err = std::max(max_err, std::abs(fd - grad.d_mean[i]));
      qp = q;
      qm = q;
      qp.log_std[i] += h;
      qm.log_std[i] -= h;
      fd = (elbo_estimate(qp, data, prior, 2, seed).value -
            elbo_estimate(qm, data, prior, 2, seed).value) /
           (2 * h);
      max_err = std::max(max_err, std::abs(fd - grad.d_log_std[i]));
    }
    worst = std::max(worst, max_err / max_abs);
  }
  Outcome o;
  o.pass = worst < 1e-4;
  std::ostringstream ss;
  ss << "max relative error " << worst << " over 20 instances (need < 1e-4)";
  o.detail = ss.str();
  return o;
}

// ---- criterion 6: divergence golden values ----------------------------------

Outcome criterion6() {
  MixingMeasure g1, g2;
  g1.family = g2.family = ExpertFamily::constant;
  g1.input_dim = g2.input_dim = 1;
  g1.components = {{0.0, {0.0}, {0.0}, 1.0}};
  g2.components = {{0.0, {0.0}, {1.0}, 1.0}};

  const auto h = hellinger_sq_mc(g1, g2, kGoldenValueMc, 20240506);
  const auto kl = kl_mc(g1, g2, kGoldenValueMc, 20240507);
  const auto l1 = l1_norm_mc(g1, g2, kGoldenValueMc, 20240508);
  const bool h_ok = std::abs(h.value - 0.23501) <= 3.0 * h.std_error;
  const bool kl_ok = std::abs(kl.value - 0.5) <= 3.0 * kl.std_error;
  const bool l1_ok = std::abs(l1.value - 0.76678) <= 3.0 * l1.std_error;
  Outcome o;
  o.pass = h_ok && kl_ok && l1_ok;
  std::ostringstream ss;
  ss << "hellinger_sq " << h.value << " (3se " << 3 * h.std_error << "), kl " << kl.value
     << " (3se " << 3 * kl.std_error << "), l1 " << l1.value << " (3se " << 3 * l1.std_error
     << ")";
  o.detail = ss.str();
  return o;
}

// ---- criterion 7: Voronoi loss unit suite ------------------------------------

Outcome criterion7() {
  Rng rng(20240509);
  auto random_measure = [&](int k) {
    MixingMeasure g;
    g.family = ExpertFamily::linear;
    g.input_dim = 2;
    for (int j = 0; j < k; ++j) {
      ExpertComponent c;
      c.alpha0 = rng.uniform(-1, 1);
      c.alpha1 = {rng.uniform(-3, 3), rng.uniform(-3, 3)};
      c.beta = {rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
      c.sigma2 = rng.uniform(0.2, 3.0);
      g.components.push_back(c);
    }
    return g;
  };

  bool identity_ok = true;
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 1 + trial % 4;
    const auto ref = random_measure(k);
    auto copy = ref;
    if (k > 1)
      std::rotate(copy.components.begin(), copy.components.begin() + 1, copy.components.end());
    if (loss_l1(copy, ref).total > 1e-12) identity_ok = false;
    auto bumped = ref;
    bumped.components[trial % k].beta[1] += 0.05;
    if (loss_l1(bumped, ref).total <= 1e-10) identity_ok = false;
  }

  MixingMeasure ref;
  ref.family = ExpertFamily::linear;
  ref.input_dim = 2;
  ref.components = {{0.0, {1.0, -0.5}, {0.8, 0.3, -0.2}, 1.0}};
  auto cand = ref;
  cand.components[0].alpha0 = std::log(1.1);
  cand.components[0].alpha1[0] += 0.2;
  cand.components[0].beta[1] += 0.3;
  cand.components[0].sigma2 += 0.05;
  const double hand = loss_l1(cand, ref).total;
  const bool hand_ok = std::abs(hand - 0.705) <= 1e-12;

  bool singleton_ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 1 + trial % 4;
    const auto a = random_measure(k);
    const auto b = random_measure(k);
    const auto l1 = loss_l1(a, b);
    if (l1.singleton_cells.size() == static_cast<std::size_t>(k)) {
      if (loss_l2(a, b).total != l1.total) singleton_ok = false;
    }
  }

  Outcome o;
  o.pass = identity_ok && hand_ok && singleton_ok;
  std::ostringstream ss;
  ss << "identity " << (identity_ok ? "ok" : "FAIL") << ", hand value " << hand
     << " (target 0.705), singleton L2==L1 " << (singleton_ok ? "ok" : "FAIL");
  o.detail = ss.str();
  return o;
}

// ---- criterion 8: Hellinger / squared-loss ratio scan ------------------------

struct ScanArtifact {
  RatioScanResult result;
  std::string csv;
};

ScanArtifact run_ratio_scan() {
  RatioScanConfig cfg;
  cfg.eps_list = {1e-1, 1e-2};
  cfg.trials_per_eps = 50;
  cfg.loss = LossKind::l2;
  const auto result = hellinger_voronoi_ratio_scan(reference_sigmoid_truth(), cfg,
                                                   20240510, g_jobs);
  std::ostringstream csv;
  emit_ratio_scan_csv(result, csv);
  return {result, csv.str()};
}

Outcome criterion8() {
  const auto art = run_ratio_scan();
  const auto& rows = art.result.per_eps;
  const bool positive = rows[0].min_ratio > 0.0 && rows[1].min_ratio > 0.0;
  const double ratio_of_medians = rows[0].median_ratio / rows[1].median_ratio;
  const bool bounded = ratio_of_medians < 10.0 && ratio_of_medians > 0.1;
  Outcome o;
  o.pass = positive && bounded;
  std::ostringstream ss;
  ss << "min ratios " << rows[0].min_ratio << " / " << rows[1].min_ratio << ", medians "
     << rows[0].median_ratio << " / " << rows[1].median_ratio << " (factor "
     << ratio_of_medians << ")";
  o.detail = ss.str();
  return o;
}

// ---- criterion 9: exactly-specified loss slope -------------------------------

struct RateArtifact {
  RateResult result;
  std::string csv;
};

RateArtifact run_rate_slope() {
  RateSchedule schedule;
  schedule.n_grid = {200, 800, 3200};
  schedule.replications_per_n = 10;
  schedule.estimator = Estimator::vi_mean;
  schedule.estimate_cfg.fit.iterations = 4000;
  schedule.estimate_cfg.fit.learning_rate = 0.08;
  schedule.estimate_cfg.fit.lr_decay_to = 0.02;
  const auto result =
      rate_experiment(schedule, reference_linear_truth(), PriorConfig{}, 20240511, g_jobs);
  std::ostringstream csv;
  emit_rate_points_csv(result, csv);
  return {result, csv.str()};
}

Outcome criterion9() {
  const auto art = run_rate_slope();
  const double slope = art.result.loss_slope.slope;
  Outcome o;
  o.pass = slope >= -0.75 && slope <= -0.30;
  std::ostringstream ss;
  ss << "log-log slope of median first-power loss " << slope << " (need in [-0.75, -0.30])";
  o.detail = ss.str();
  return o;
}

// ---- criterion 10: identifiability verdict table -----------------------------

Outcome criterion10() {
  bool all_ok = true;
  Rng rng(20240512);
  const std::vector<double> lin = {0.5, 1.0, -1.0};
  const std::vector<double> cst = {2.0};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::vector<double> sig = {rng.uniform(-2, 2), rng.uniform(-2, 2)};
    if (!strong_identifiability_test(ExpertFamily::linear, lin, 1, 2, 128, seed).identifiable)
      all_ok = false;
    if (strong_identifiability_test(ExpertFamily::linear, lin, 2, 2, 256, seed).identifiable)
      all_ok = false;
    if (!strong_identifiability_test(ExpertFamily::sigmoid, sig, 2, 2, 256, seed).identifiable)
      all_ok = false;
    if (strong_identifiability_test(ExpertFamily::constant, cst, 1, 2, 128, seed).identifiable)
      all_ok = false;
  }
  Outcome o;
  o.pass = all_ok;
  o.detail = all_ok ? "linear/1 id, linear/2 deg, sigmoid/2 id, constant/1 deg, 10 seeds each"
                    : "verdict table mismatch";
  return o;
}

// ---- criterion 11: byte-identical reruns -------------------------------------

Outcome criterion11() {
  const auto sel_a = run_table_row_desk();
  const auto sel_b = run_table_row_desk();
  const auto scan_a = run_ratio_scan();
  const auto scan_b = run_ratio_scan();
  const auto rate_a = run_rate_slope();
  const auto rate_b = run_rate_slope();
  const bool sel_ok = sel_a.table_csv == sel_b.table_csv;
  const bool scan_ok = scan_a.csv == scan_b.csv;
  const bool rate_ok = rate_a.csv == rate_b.csv;
  Outcome o;
  o.pass = sel_ok && scan_ok && rate_ok;
  std::ostringstream ss;
  ss << "selection csv " << (sel_ok ? "identical" : "DIFFERS") << ", ratio-scan csv "
     << (scan_ok ? "identical" : "DIFFERS") << ", rate csv "
     << (rate_ok ? "identical" : "DIFFERS");
  o.detail = ss.str();
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  bool paper_scale = false;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--paper-scale") == 0) paper_scale = true;
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);
    if (std::strcmp(argv[i], "--jobs") == 0 && i + 1 < argc) g_jobs = std::atoi(argv[i + 1]);
  }

  const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria = {
      {1, {"table row, sep 10, desk scale", criterion1}},
      {2, {"table row, sep 5, full budget", [&] { return criterion2(paper_scale); }}},
      {3, {"half-plane sweep trend", criterion3}},
      {4, {"single-regime sanity", criterion4}},
      {5, {"gradient vs finite differences", criterion5}},
      {6, {"divergence golden values", criterion6}},
      {7, {"Voronoi loss unit suite", criterion7}},
      {8, {"Hellinger/loss ratio scan", criterion8}},
      {9, {"loss-vs-n slope", criterion9}},
      {10, {"identifiability verdicts", criterion10}},
      {11, {"byte-identical reruns", criterion11}},
  };

  int failures = 0;
  for (const auto& [id, entry] : criteria) {
    if (only != 0 && id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = entry.second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* tag = o.skipped ? "SKIP" : o.pass ? "PASS" : "FAIL";
    std::printf("[%s] criterion %2d: %s: %s (%.1fs)\n", tag, id, entry.first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass && !o.skipped) ++failures;
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
