#pragma once

#include <chrono>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <vector>

#include "smoge/dgp.hpp"
#include "smoge/parallel.hpp"
#include "smoge/vi.hpp"

namespace smoge {

// desk: CI-sized runs (20 replications, iteration budgets divided by 5,
// learning rates unchanged). paper: the full benchmark settings.
enum class RunScale { desk, paper };

inline std::string scale_name(RunScale s) { return s == RunScale::desk ? "desk" : "paper"; }

inline RunScale scale_from_name(const std::string& s) {
  if (s == "desk") return RunScale::desk;
  if (s == "paper") return RunScale::paper;
  throw ConfigError("unknown scale '" + s + "' (expected desk or paper)");
}

inline constexpr int kDeskIterationDivisor = 5;
inline constexpr int kDeskReplications = 20;

// Benchmark training budgets. The b4 generator uses a longer budget when
// probing the single-regime baseline.
inline int benchmark_iterations(const DgpSpec& spec) {
  switch (spec.kind) {
    case DgpKind::b2: return 50'000;
    case DgpKind::b3: return 10'000;
    case DgpKind::b4: return spec.k_star == 1 ? 10'000 : 4'000;
    case DgpKind::smoge: return 4'000;
  }
  return 4'000;
}

inline int benchmark_replications(const DgpSpec& spec) {
  return spec.kind == DgpKind::b4 ? 100 : 50;
}

// Benchmark Adam learning rates.
//   b2: grows linearly with n over [0.0036, 0.015] (the published range);
//       the same rate is used for every candidate K.
//   b3: linear in n with base 0.01 at n = 100.
//   b4: 0.1 + 0.000015 n + 0.001 K, except the single-regime baseline
//       configurations, which are fixed at 0.06.
inline double benchmark_learning_rate(const DgpSpec& spec, int n, int k) {
  switch (spec.kind) {
    case DgpKind::b2: {
      const double t = std::clamp((static_cast<double>(n) - 10.0) / 90.0, 0.0, 1.0);
      return 0.0036 + (0.015 - 0.0036) * t;
    }
    case DgpKind::b3: return 1e-4 * static_cast<double>(n);
    case DgpKind::b4:
      if (spec.k_star == 1) return 0.06;
      return 0.1 + 0.000015 * static_cast<double>(n) + 0.001 * static_cast<double>(k);
    case DgpKind::smoge: return 0.05;
  }
  return 0.05;
}

inline std::vector<int> default_candidates(const DgpSpec& spec) {
  switch (spec.kind) {
    case DgpKind::b2: return {1, 2, 3, 4};
    case DgpKind::b3: return {1, 2, 3, 4, 5, 6};
    case DgpKind::b4: return {1, 2, 3, 4, 5, 6, 7};
    case DgpKind::smoge: return {1, 2, 3, 4, 5};
  }
  return {1, 2, 3};
}

inline std::vector<int> default_sweep_grid(DgpKind kind) {
  if (kind == DgpKind::b2) return {10, 25, 50, 100};
  if (kind == DgpKind::b3) return {100, 500, 1000, 2000};
  throw ConfigError("sweep grids are defined for the b2 and b3 generators");
}

struct SelectionConfig {
  DgpSpec dgp;
  int n = 500;
  std::vector<int> candidates;  // empty -> benchmark default
  int replications = kDeskReplications;
  RunScale scale = RunScale::desk;
  std::uint64_t master_seed = 0;
  ExpertFamily fit_family = ExpertFamily::linear;
  PriorConfig prior;
  int iterations_override = 0;        // <= 0: resolve from the benchmark
  double learning_rate_override = 0;  // <= 0: resolve from the benchmark
  int final_elbo_samples = 200;
  int jobs = 0;

  std::vector<int> resolved_candidates() const {
    return candidates.empty() ? default_candidates(dgp) : candidates;
  }
  int resolved_iterations() const {
    const int base = iterations_override > 0 ? iterations_override : benchmark_iterations(dgp);
    return scale == RunScale::desk ? std::max(1, base / kDeskIterationDivisor) : base;
  }
  double resolved_learning_rate(int k) const {
    return learning_rate_override > 0 ? learning_rate_override
                                      : benchmark_learning_rate(dgp, n, k);
  }

  void validate() const {
    validate_dgp(dgp);
    require(n >= 1, "selection: n must be >= 1");
    require(replications >= 1, "selection: replications must be >= 1");
    const auto cand = resolved_candidates();
    require(!cand.empty(), "selection: candidate list is empty");
    for (std::size_t i = 0; i < cand.size(); ++i) {
      require(cand[i] >= 1, "selection: candidates must be >= 1");
      if (i > 0) require(cand[i] > cand[i - 1], "selection: candidates must increase");
    }
  }
};

struct ReplicationRecord {
  int replication = 0;
  bool failed = false;
  std::string failure;
  int winner_k = -1;
  std::vector<double> final_elbos;  // per candidate; NaN where not run
};

struct SelectionResult {
  SelectionConfig config;
  std::vector<int> candidates;
  std::vector<int> win_counts;            // per candidate, successful replications
  std::vector<double> win_proportions;    // over successful replications
  std::vector<ReplicationRecord> replications;
  int failed_count = 0;
  double wall_seconds = 0.0;
};

// Fit every candidate on every replication's dataset and record the
// highest-ELBO winner; ties go to the smaller candidate. A replication with
// any aborted fit is reported as failed, never silently dropped.
inline SelectionResult run_selection(const SelectionConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto candidates = cfg.resolved_candidates();
  const int n_cand = static_cast<int>(candidates.size());
  const int reps = cfg.replications;

  std::vector<Dataset> datasets;
  datasets.reserve(reps);
  for (int r = 0; r < reps; ++r)
    datasets.push_back(sample_dgp(
        cfg.dgp, cfg.n, derive_seed(cfg.master_seed, seed_salt::kData, static_cast<std::uint64_t>(r))));

  struct FitOutcome {
    bool ok = false;
    double final_elbo = 0.0;
    std::string error;
  };
  std::vector<FitOutcome> outcomes(static_cast<std::size_t>(reps) * n_cand);
  parallel_for(reps * n_cand, cfg.jobs, [&](int task) {
    const int r = task / n_cand;
    const int ci = task % n_cand;
    const int k = candidates[ci];
    FitConfig fit_cfg;
    fit_cfg.iterations = cfg.resolved_iterations();
    fit_cfg.learning_rate = cfg.resolved_learning_rate(k);
    fit_cfg.final_elbo_samples = cfg.final_elbo_samples;
    fit_cfg.seed = derive_seed(cfg.master_seed, seed_salt::kFit,
                               static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(k));
    auto& out = outcomes[static_cast<std::size_t>(r) * n_cand + ci];
    try {
      const auto result = fit(datasets[r], k, cfg.fit_family, cfg.prior, fit_cfg);
      out.ok = true;
      out.final_elbo = result.final_elbo;
    } catch (const std::exception& e) {
      out.ok = false;
      out.error = std::string("K=") + std::to_string(k) + ": " + e.what();
    }
  });

  SelectionResult result;
  result.config = cfg;
  result.candidates = candidates;
  result.win_counts.assign(n_cand, 0);
  for (int r = 0; r < reps; ++r) {
    ReplicationRecord rec;
    rec.replication = r;
    rec.final_elbos.assign(n_cand, std::numeric_limits<double>::quiet_NaN());
    for (int ci = 0; ci < n_cand; ++ci) {
      const auto& out = outcomes[static_cast<std::size_t>(r) * n_cand + ci];
      if (!out.ok) {
        rec.failed = true;
        if (rec.failure.empty()) rec.failure = out.error;
      } else {
        rec.final_elbos[ci] = out.final_elbo;
      }
    }
    if (!rec.failed) {
      int best = 0;
      for (int ci = 1; ci < n_cand; ++ci)
        if (rec.final_elbos[ci] > rec.final_elbos[best]) best = ci;
      rec.winner_k = candidates[best];
      ++result.win_counts[best];
    } else {
      ++result.failed_count;
    }
    result.replications.push_back(std::move(rec));
  }
  const int successful = reps - result.failed_count;
  result.win_proportions.assign(n_cand, 0.0);
  if (successful > 0)
    for (int ci = 0; ci < n_cand; ++ci)
      result.win_proportions[ci] =
          static_cast<double>(result.win_counts[ci]) / static_cast<double>(successful);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

// One selection run per sample size; the win-proportion-versus-n curves.
inline std::vector<SelectionResult> run_figure_sweep(const SelectionConfig& base,
                                                     const std::vector<int>& n_grid) {
  require(!n_grid.empty(), "sweep: empty n grid");
  std::vector<SelectionResult> out;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    SelectionConfig cfg = base;
    cfg.n = n_grid[i];
    cfg.master_seed = derive_seed(base.master_seed, static_cast<std::uint64_t>(0xF1),
                                  static_cast<std::uint64_t>(i));
    out.push_back(run_selection(cfg));
  }
  return out;
}

namespace detail {

inline std::string two_decimals(double v) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << v;
  return ss.str();
}

}  // namespace detail

// Win-proportion table, one row per configuration, one column per
// candidate, two decimals, plus the modal winner column.
inline void emit_table_csv(std::span<const SelectionResult> results, std::ostream& out) {
  if (results.empty()) {
    out << "dgp,d,k_star,separation,n,winner_k\n";
    return;
  }
  out << "dgp,d,k_star,separation,n";
  for (int k : results.front().candidates) out << ",K=" << k;
  out << ",winner_k\n";
  for (const auto& r : results) {
    const auto& spec = r.config.dgp;
    out << dgp_name(spec.kind) << "," << dgp_input_dim(spec) << ","
        << dgp_true_expert_count(spec) << ","
        << (spec.kind == DgpKind::b4 ? fmt_double(spec.separation) : "") << "," << r.config.n;
    int best = 0;
    for (std::size_t ci = 0; ci < r.candidates.size(); ++ci) {
      out << "," << detail::two_decimals(r.win_proportions[ci]);
      if (r.win_proportions[ci] > r.win_proportions[best]) best = static_cast<int>(ci);
    }
    out << "," << r.candidates[best] << "\n";
  }
}

inline void emit_table_text(std::span<const SelectionResult> results, std::ostream& out) {
  if (results.empty()) {
    out << "(no results)\n";
    return;
  }
  out << std::left << std::setw(6) << "dgp" << std::setw(4) << "d" << std::setw(6) << "K*"
      << std::setw(8) << "n";
  for (int k : results.front().candidates) out << std::setw(8) << ("K=" + std::to_string(k));
  out << "\n";
  for (const auto& r : results) {
    const auto& spec = r.config.dgp;
    out << std::left << std::setw(6) << dgp_name(spec.kind) << std::setw(4)
        << dgp_input_dim(spec) << std::setw(6) << dgp_true_expert_count(spec) << std::setw(8)
        << r.config.n;
    int best = 0;
    for (std::size_t ci = 0; ci < r.candidates.size(); ++ci)
      if (r.win_proportions[ci] > r.win_proportions[best]) best = static_cast<int>(ci);
    for (std::size_t ci = 0; ci < r.candidates.size(); ++ci) {
      std::string cell = detail::two_decimals(r.win_proportions[ci]);
      if (static_cast<int>(ci) == best) cell = "*" + cell;
      out << std::setw(8) << cell;
    }
    out << "\n";
  }
}

// Per-replication winners and scores; failures carry their diagnostic.
inline void emit_replication_csv(const SelectionResult& r, std::ostream& out) {
  out << "replication,failed,winner_k";
  for (int k : r.candidates) out << ",elbo_K" << k;
  out << ",failure\n";
  for (const auto& rec : r.replications) {
    out << rec.replication << "," << (rec.failed ? 1 : 0) << "," << rec.winner_k;
    for (double e : rec.final_elbos) out << "," << (std::isnan(e) ? "" : fmt_double(e));
    std::string msg = rec.failure;
    for (auto& ch : msg)
      if (ch == ',' || ch == '\n') ch = ';';
    out << "," << msg << "\n";
  }
}

}  // namespace smoge
