// Command-line front end: simulate / fit / select / rates / losses /
// identifiability. Every run that produces files also writes a manifest
// with the resolved configuration and output checksums.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "smoge/contraction.hpp"
#include "smoge/manifest.hpp"
#include "smoge/measure_io.hpp"
#include "smoge/reference_models.hpp"
#include "smoge/selection.hpp"
#include "smoge/svg.hpp"

namespace fs = std::filesystem;
using namespace smoge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

struct GlobalOptions {
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int jobs = 0;
  int round_digits = 17;
};

std::vector<int> parse_int_list(const std::string& s, const char* what) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    try {
      out.push_back(std::stoi(cell));
    } catch (const std::exception&) {
      throw ConfigError(std::string(what) + ": bad integer '" + cell + "'");
    }
  }
  require(!out.empty(), std::string(what) + ": empty list");
  return out;
}

std::vector<double> parse_double_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ConfigError(std::string(what) + ": bad number '" + cell + "'");
    }
  }
  require(!out.empty(), std::string(what) + ": empty list");
  return out;
}

void apply_env_seed(GlobalOptions& g) {
  if (const char* env = std::getenv("SMOGE_SEED")) {
    g.seed = std::strtoull(env, nullptr, 10);
    g.seed_given = true;
  }
}

std::string out_path(const GlobalOptions& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return (fs::path(g.out_dir) / name).string();
}

void finish_manifest(const GlobalOptions& g, RunManifest& manifest) {
  manifest.finished_at = iso_timestamp_utc();
  write_manifest(out_path(g, "manifest.txt"), manifest);
}

struct DgpCliOptions {
  std::string dgp = "b4";
  std::string measure_file;
  double separation = 5.0;
  int d = 2;
  int k_star = 2;
};

DgpSpec resolve_dgp(const DgpCliOptions& o) {
  const DgpKind kind = dgp_from_name(o.dgp);
  switch (kind) {
    case DgpKind::smoge: {
      require(!o.measure_file.empty(), "--dgp smoge needs --g <measure file>");
      return DgpSpec::smoge_spec(load_measure_file(o.measure_file));
    }
    case DgpKind::b2: return DgpSpec::b2();
    case DgpKind::b3: return DgpSpec::b3();
    case DgpKind::b4: return DgpSpec::b4(o.separation, o.d, o.k_star);
  }
  throw ConfigError("unreachable dgp kind");
}

void add_dgp_options(CLI::App* cmd, DgpCliOptions& o) {
  cmd->add_option("--dgp", o.dgp, "data-generating process: smoge|b2|b3|b4");
  cmd->add_option("--g", o.measure_file, "mixing-measure file (dgp smoge)");
  cmd->add_option("--sep", o.separation, "b4 gating separation");
  cmd->add_option("--d", o.d, "b4 input dimension");
  cmd->add_option("--kstar", o.k_star, "b4 regime count");
}

void echo_dgp(RunManifest& m, const DgpSpec& spec) {
  m.config.emplace_back("dgp", "\"" + dgp_name(spec.kind) + "\"");
  if (spec.kind == DgpKind::b4) {
    m.config.emplace_back("separation", fmt_double(spec.separation));
    m.config.emplace_back("d", std::to_string(spec.d));
    m.config.emplace_back("kstar", std::to_string(spec.k_star));
  }
}

int cmd_simulate(const GlobalOptions& g, const DgpCliOptions& dgp_opts, int n) {
  const DgpSpec spec = resolve_dgp(dgp_opts);
  RunManifest manifest;
  manifest.subcommand = "simulate";
  manifest.master_seed = g.seed;
  manifest.started_at = iso_timestamp_utc();
  echo_dgp(manifest, spec);
  manifest.config.emplace_back("n", std::to_string(n));
  manifest.config.emplace_back("seed", std::to_string(g.seed));

  const Dataset ds = sample_dgp(spec, n, g.seed);
  const std::string data_path = out_path(g, "data.csv");
  write_dataset(data_path, ds, g.round_digits);
  manifest_add_output(manifest, data_path);
  manifest_add_output(manifest, data_path + ".prov");
  finish_manifest(const_cast<GlobalOptions&>(g), manifest);
  std::cout << "wrote " << data_path << " (" << ds.size() << " rows)\n";
  return kExitOk;
}

struct FitCliOptions {
  std::string data_file;
  int k = 2;
  std::string family = "linear";
  int iterations = 2000;
  double learning_rate = 0.05;
  int mc_samples = 1;
  int final_elbo_samples = 200;
};

int cmd_fit(const GlobalOptions& g, const FitCliOptions& o) {
  require(!o.data_file.empty(), "fit needs --data <csv>");
  const Dataset data = read_dataset_csv(o.data_file);
  FitConfig cfg;
  cfg.iterations = o.iterations;
  cfg.learning_rate = o.learning_rate;
  cfg.mc_samples_per_step = o.mc_samples;
  cfg.final_elbo_samples = o.final_elbo_samples;
  cfg.seed = g.seed;

  RunManifest manifest;
  manifest.subcommand = "fit";
  manifest.master_seed = g.seed;
  manifest.started_at = iso_timestamp_utc();
  manifest.config = {{"data", "\"" + o.data_file + "\""},
                     {"k", std::to_string(o.k)},
                     {"family", "\"" + o.family + "\""},
                     {"iterations", std::to_string(cfg.iterations)},
                     {"learning_rate", fmt_double(cfg.learning_rate)},
                     {"mc_samples", std::to_string(cfg.mc_samples_per_step)},
                     {"final_elbo_samples", std::to_string(cfg.final_elbo_samples)},
                     {"seed", std::to_string(cfg.seed)}};

  try {
    const auto result = fit(data, o.k, family_from_name(o.family), PriorConfig{}, cfg);
    const std::string fit_path = out_path(g, "fit.txt");
    write_fit_result(fit_path, result, cfg);
    const std::string est_path = out_path(g, "point_estimate.txt");
    write_measure_file(est_path, result.point_estimate);
    manifest_add_output(manifest, fit_path);
    manifest_add_output(manifest, est_path);
    finish_manifest(const_cast<GlobalOptions&>(g), manifest);
    std::cout << "final_elbo = " << fmt_double(result.final_elbo) << " (se "
              << fmt_double(result.final_elbo_std_error) << ")\n";
    return kExitOk;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    finish_manifest(const_cast<GlobalOptions&>(g), manifest);
    return kExitNumerical;
  }
}

struct SelectCliOptions {
  DgpCliOptions dgp;
  int n = 500;
  std::string candidates;
  std::string n_grid;  // non-empty switches to the sweep
  int replications = 0;
  std::string scale = "desk";
  std::string family = "linear";
  int iterations = 0;
  double learning_rate = 0.0;
};

int cmd_select(const GlobalOptions& g, const SelectCliOptions& o) {
  SelectionConfig cfg;
  cfg.dgp = resolve_dgp(o.dgp);
  cfg.n = o.n;
  cfg.scale = scale_from_name(o.scale);
  cfg.master_seed = g.seed;
  cfg.fit_family = family_from_name(o.family);
  cfg.jobs = g.jobs;
  cfg.iterations_override = o.iterations;
  cfg.learning_rate_override = o.learning_rate;
  if (!o.candidates.empty()) cfg.candidates = parse_int_list(o.candidates, "--candidates");
  cfg.replications = o.replications > 0 ? o.replications
                     : cfg.scale == RunScale::paper ? benchmark_replications(cfg.dgp)
                                                    : kDeskReplications;
  require(o.replications >= 0, "--reps must be nonnegative");
  cfg.validate();

  RunManifest manifest;
  manifest.subcommand = "select";
  manifest.master_seed = g.seed;
  manifest.started_at = iso_timestamp_utc();
  echo_dgp(manifest, cfg.dgp);
  {
    std::string cand = "[";
    const auto list = cfg.resolved_candidates();
    for (std::size_t i = 0; i < list.size(); ++i)
      cand += (i ? ", " : "") + std::to_string(list[i]);
    cand += "]";
    manifest.config.emplace_back("candidates", cand);
  }
  manifest.config.emplace_back("replications", std::to_string(cfg.replications));
  manifest.config.emplace_back("scale", "\"" + scale_name(cfg.scale) + "\"");
  manifest.config.emplace_back("iterations", std::to_string(cfg.resolved_iterations()));
  manifest.config.emplace_back("seed", std::to_string(cfg.master_seed));

  std::vector<SelectionResult> results;
  if (!o.n_grid.empty()) {
    const auto grid = parse_int_list(o.n_grid, "--n-grid");
    manifest.config.emplace_back("n_grid", o.n_grid.empty() ? "[]" : "\"" + o.n_grid + "\"");
    results = run_figure_sweep(cfg, grid);
  } else {
    manifest.config.emplace_back("n", std::to_string(cfg.n));
    results.push_back(run_selection(cfg));
  }

  const std::string table_csv = out_path(g, "table.csv");
  {
    std::ofstream out(table_csv);
    emit_table_csv(results, out);
  }
  manifest_add_output(manifest, table_csv);
  const std::string table_txt = out_path(g, "table.txt");
  {
    std::ofstream out(table_txt);
    emit_table_text(results, out);
  }
  manifest_add_output(manifest, table_txt);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const std::string rep_csv =
        out_path(g, "replications_n" + std::to_string(results[i].config.n) + ".csv");
    std::ofstream out(rep_csv);
    emit_replication_csv(results[i], out);
    out.close();
    manifest_add_output(manifest, rep_csv);
  }
  if (results.size() > 1) {
    const std::string svg = out_path(g, "sweep.svg");
    write_sweep_svg(svg, results);
    manifest_add_output(manifest, svg);
  }

  emit_table_text(results, std::cout);
  int failed = 0, total = 0;
  for (const auto& r : results) {
    failed += r.failed_count;
    total += r.config.replications;
  }
  finish_manifest(const_cast<GlobalOptions&>(g), manifest);
  if (failed * 5 > total) {
    std::cerr << "error: " << failed << "/" << total << " replications aborted\n";
    return kExitNumerical;
  }
  return kExitOk;
}

struct RatesCliOptions {
  std::string dgp_file;
  int fit_k = 0;
  std::string n_grid = "200,800,3200";
  int replications = 10;
  std::string estimator = "vi";
  int iterations = 4000;
  double learning_rate = 0.1;
  int mh_steps = 4000;
  double mh_proposal_scale = 0.1;
  int hellinger_mc = kDefaultPairwiseMc;
  bool ratio_scan = false;
  std::string scan_eps = "0.1,0.01";
  int trials = 50;
  std::string loss = "l2";
};

int cmd_rates(const GlobalOptions& g, const RatesCliOptions& o) {
  require(!o.dgp_file.empty(), "rates needs --dgp-file <measure file>");
  const MixingMeasure g_star = load_measure_file(o.dgp_file);

  RunManifest manifest;
  manifest.subcommand = "rates";
  manifest.master_seed = g.seed;
  manifest.started_at = iso_timestamp_utc();
  manifest.config = {{"dgp_file", "\"" + o.dgp_file + "\""},
                     {"seed", std::to_string(g.seed)}};

  try {
    if (o.ratio_scan) {
      RatioScanConfig cfg;
      cfg.eps_list = parse_double_list(o.scan_eps, "--scan-eps");
      cfg.trials_per_eps = o.trials;
      cfg.loss = o.loss == "l1" ? LossKind::l1 : LossKind::l2;
      cfg.n_mc = o.hellinger_mc;
      manifest.config.emplace_back("scan_eps", "\"" + o.scan_eps + "\"");
      manifest.config.emplace_back("trials", std::to_string(o.trials));
      manifest.config.emplace_back("loss", "\"" + o.loss + "\"");
      const auto result = hellinger_voronoi_ratio_scan(g_star, cfg, g.seed, g.jobs);
      const std::string scan_csv = out_path(g, "ratio_scan.csv");
      {
        std::ofstream out(scan_csv);
        emit_ratio_scan_csv(result, out);
      }
      manifest_add_output(manifest, scan_csv);
      for (const auto& row : result.per_eps)
        std::cout << "eps " << fmt_double(row.eps) << ": min_ratio "
                  << fmt_double(row.min_ratio) << ", median_ratio "
                  << fmt_double(row.median_ratio) << ", flagged " << row.flagged << "\n";
      finish_manifest(const_cast<GlobalOptions&>(g), manifest);
      return kExitOk;
    }

    RateSchedule schedule;
    schedule.n_grid = parse_int_list(o.n_grid, "--n-grid");
    schedule.replications_per_n = o.replications;
    schedule.estimator = estimator_from_name(o.estimator);
    const int k_star = g_star.size();
    if (o.fit_k > 0) {
      require(o.fit_k >= k_star, "--fit-k must be at least the reference component count");
      schedule.fit_extra = o.fit_k - k_star;
    }
    schedule.estimate_cfg.fit.iterations = o.iterations;
    schedule.estimate_cfg.fit.learning_rate = o.learning_rate;
    schedule.estimate_cfg.fit.lr_decay_to = 0.05;
    schedule.estimate_cfg.mh_steps = o.mh_steps;
    schedule.estimate_cfg.mh_proposal_scale = o.mh_proposal_scale;
    schedule.hellinger_mc = o.hellinger_mc;
    manifest.config.emplace_back("n_grid", "\"" + o.n_grid + "\"");
    manifest.config.emplace_back("replications", std::to_string(o.replications));
    manifest.config.emplace_back("estimator", "\"" + o.estimator + "\"");
    manifest.config.emplace_back("fit_k", std::to_string(k_star + schedule.fit_extra));
    manifest.config.emplace_back("iterations", std::to_string(o.iterations));

    const auto result = rate_experiment(schedule, g_star, PriorConfig{}, g.seed, g.jobs);
    const std::string points_csv = out_path(g, "rate_points.csv");
    {
      std::ofstream out(points_csv);
      emit_rate_points_csv(result, out);
    }
    manifest_add_output(manifest, points_csv);
    const std::string summary_csv = out_path(g, "rate_summary.csv");
    {
      std::ofstream out(summary_csv);
      emit_rate_summary(result, schedule, out);
    }
    manifest_add_output(manifest, summary_csv);
    std::cout << "loss slope " << fmt_double(result.loss_slope.slope) << " (se "
              << fmt_double(result.loss_slope.slope_std_error) << "), hellinger slope "
              << fmt_double(result.hellinger_slope.slope) << "\n";
    finish_manifest(const_cast<GlobalOptions&>(g), manifest);
    return kExitOk;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    finish_manifest(const_cast<GlobalOptions&>(g), manifest);
    return kExitNumerical;
  }
}

struct LossesCliOptions {
  std::string g_file, g_star_file;
  bool divergences = false;
  int mc = kDefaultPairwiseMc;
  std::string csv;
};

int cmd_losses(const GlobalOptions& g, const LossesCliOptions& o) {
  require(!o.g_file.empty() && !o.g_star_file.empty(), "losses needs --g and --gstar");
  const MixingMeasure cand = load_measure_file(o.g_file);
  const MixingMeasure ref = load_measure_file(o.g_star_file);

  const auto l1 = loss_l1(cand, ref);
  const auto l2 = loss_l2(cand, ref);
  auto print_report = [](const char* name, const VoronoiLossReport& r) {
    std::cout << name << "_total = " << fmt_double(r.total) << "\n";
    std::cout << name << "_weight_term = " << fmt_double(r.weight_term) << "\n";
    for (std::size_t j = 0; j < r.per_cell_terms.size(); ++j)
      std::cout << name << "_cell_" << (j + 1) << " = " << fmt_double(r.per_cell_terms[j])
                << "\n";
  };
  std::cout << "total = " << fmt_double(l1.total) << "\n";
  print_report("l1", l1);
  print_report("l2", l2);
  std::cout << "empty_cells = " << l1.empty_cells.size() << "\n";
  std::cout << "singleton_cells = " << l1.singleton_cells.size() << "\n";

  if (o.divergences) {
    const auto h = hellinger_sq_mc(cand, ref, o.mc, g.seed);
    const auto kl = kl_mc(cand, ref, o.mc, derive_seed(g.seed, 1));
    const auto l1n = l1_norm_mc(cand, ref, o.mc, derive_seed(g.seed, 2));
    std::cout << "hellinger_sq = " << fmt_double(h.value) << " (se "
              << fmt_double(h.std_error) << ")\n";
    std::cout << "kl = " << fmt_double(kl.value) << " (se " << fmt_double(kl.std_error)
              << ")\n";
    std::cout << "l1_norm = " << fmt_double(l1n.value) << " (se " << fmt_double(l1n.std_error)
              << ")\n";
  }

  if (!o.csv.empty()) {
    std::ofstream out(o.csv);
    require(out.good(), "cannot open '" + o.csv + "' for writing");
    out << "loss,total,weight_term\n";
    out << "l1," << fmt_double(l1.total) << "," << fmt_double(l1.weight_term) << "\n";
    out << "l2," << fmt_double(l2.total) << "," << fmt_double(l2.weight_term) << "\n";
  }
  return kExitOk;
}

struct IdentifiabilityCliOptions {
  std::string family = "linear";
  int order = 1;
  int d = 2;
  std::string beta;
  int n_x = 0;
  double threshold = 1e-8;
};

int cmd_identifiability(const GlobalOptions& g, const IdentifiabilityCliOptions& o) {
  const ExpertFamily family = family_from_name(o.family);
  const int p = expert_param_count(family, o.d);
  std::vector<double> beta(p, 0.0);
  if (!o.beta.empty()) {
    beta = parse_double_list(o.beta, "--beta");
    require(static_cast<int>(beta.size()) == p, "--beta: expected " + std::to_string(p) +
                                                    " values for this family and dimension");
  } else if (family == ExpertFamily::sigmoid) {
    Rng rng(g.seed);
    for (auto& b : beta) b = rng.uniform(-2.0, 2.0);
  }
  int n_x = o.n_x;
  if (n_x <= 0) {
    int cols = p;
    if (o.order == 2) cols += p * (p + 1) / 2 + o.d * p;
    n_x = std::max(64, 4 * cols);
  }
  const auto rep = strong_identifiability_test(family, beta, o.order, o.d, n_x, g.seed,
                                               o.threshold);
  std::cout << "family = \"" << o.family << "\"\n";
  std::cout << "order = " << rep.order << "\n";
  std::cout << "feature_count = " << rep.feature_count << "\n";
  std::cout << "min_singular_value = " << fmt_double(rep.min_singular_value) << "\n";
  std::cout << "max_singular_value = " << fmt_double(rep.max_singular_value) << "\n";
  std::cout << "threshold = " << fmt_double(rep.threshold) << "\n";
  std::cout << "verdict = \"" << (rep.identifiable ? "identifiable" : "degenerate") << "\"\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"softmax-gated mixture-of-Gaussian-experts toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a file");
  app.allow_config_extras(false);

  GlobalOptions g;
  app.add_option("--out", g.out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", g.seed, "master seed")->capture_default_str();
  app.add_option("--jobs", g.jobs, "worker threads (0 = hardware)")->capture_default_str();
  app.add_option("--round", g.round_digits, "significant digits in CSV output")
      ->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "draw a dataset from a generator");
  simulate->fallthrough();
  DgpCliOptions sim_dgp;
  int sim_n = 500;
  add_dgp_options(simulate, sim_dgp);
  simulate->add_option("--n", sim_n, "sample size")->check(CLI::NonNegativeNumber);

  auto* fit_cmd = app.add_subcommand("fit", "variational fit of a fixed-K model");
  fit_cmd->fallthrough();
  FitCliOptions fit_opts;
  fit_cmd->add_option("--data", fit_opts.data_file, "dataset csv");
  fit_cmd->add_option("--k", fit_opts.k, "number of experts")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--family", fit_opts.family, "expert family");
  fit_cmd->add_option("--iters", fit_opts.iterations, "optimizer iterations")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--lr", fit_opts.learning_rate, "learning rate");
  fit_cmd->add_option("--mc-samples", fit_opts.mc_samples, "samples per step");
  fit_cmd->add_option("--final-elbo-samples", fit_opts.final_elbo_samples,
                      "samples for the final score");

  auto* select = app.add_subcommand("select", "highest-score model selection study");
  select->fallthrough();
  SelectCliOptions sel;
  add_dgp_options(select, sel.dgp);
  select->add_option("--n", sel.n, "sample size")->check(CLI::PositiveNumber);
  select->add_option("--n-grid", sel.n_grid, "comma list of sample sizes (sweep mode)");
  select->add_option("--candidates", sel.candidates, "comma list of candidate K");
  select->add_option("--reps", sel.replications, "replications")
      ->check(CLI::NonNegativeNumber);
  select->add_option("--scale", sel.scale, "desk|paper");
  select->add_option("--family", sel.family, "expert family for the fits");
  select->add_option("--iters", sel.iterations, "override iterations");
  select->add_option("--lr", sel.learning_rate, "override learning rate");

  auto* rates = app.add_subcommand("rates", "loss-versus-n slopes and ratio scans");
  rates->fallthrough();
  RatesCliOptions rat;
  rates->add_option("--dgp-file", rat.dgp_file, "ground-truth measure file");
  rates->add_option("--fit-k", rat.fit_k, "components to fit (default: match the file)");
  rates->add_option("--n-grid", rat.n_grid, "comma list of sample sizes")
      ->capture_default_str();
  rates->add_option("--reps", rat.replications, "replications per n")
      ->check(CLI::PositiveNumber);
  rates->add_option("--estimator", rat.estimator, "vi|mh")->capture_default_str();
  rates->add_option("--iters", rat.iterations, "fit iterations")->capture_default_str();
  rates->add_option("--lr", rat.learning_rate, "fit learning rate")->capture_default_str();
  rates->add_option("--mh-steps", rat.mh_steps, "chain length")->capture_default_str();
  rates->add_option("--mh-scale", rat.mh_proposal_scale, "proposal scale")
      ->capture_default_str();
  rates->add_option("--mc", rat.hellinger_mc, "Hellinger MC samples")->capture_default_str();
  rates->add_flag("--ratio-scan", rat.ratio_scan, "run the Hellinger/loss ratio scan");
  rates->add_option("--scan-eps", rat.scan_eps, "loss scales for the scan")
      ->capture_default_str();
  rates->add_option("--trials", rat.trials, "trials per eps")->capture_default_str();
  rates->add_option("--loss", rat.loss, "l1|l2 for the scan")->capture_default_str();

  auto* losses = app.add_subcommand("losses", "Voronoi losses between two measures");
  losses->fallthrough();
  LossesCliOptions los;
  losses->add_option("--g", los.g_file, "candidate measure file");
  losses->add_option("--gstar", los.g_star_file, "reference measure file");
  losses->add_flag("--divergences", los.divergences, "also estimate density divergences");
  losses->add_option("--mc", los.mc, "MC samples for divergences")->capture_default_str();
  losses->add_option("--csv", los.csv, "optional CSV output path");

  auto* ident = app.add_subcommand("identifiability", "expert-family rank diagnostics");
  ident->fallthrough();
  IdentifiabilityCliOptions ide;
  ident->add_option("--family", ide.family, "linear|sigmoid|constant");
  ident->add_option("--order", ide.order, "1 or 2")->check(CLI::Range(1, 2));
  ident->add_option("--d", ide.d, "input dimension")->check(CLI::PositiveNumber);
  ident->add_option("--beta", ide.beta, "expert parameters (comma list)");
  ident->add_option("--nx", ide.n_x, "covariate draws for the feature matrix");
  ident->add_option("--threshold", ide.threshold, "relative singular-value threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
      return app.exit(e);
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  apply_env_seed(g);

  try {
    if (simulate->parsed()) return cmd_simulate(g, sim_dgp, sim_n);
    if (fit_cmd->parsed()) return cmd_fit(g, fit_opts);
    if (select->parsed()) return cmd_select(g, sel);
    if (rates->parsed()) return cmd_rates(g, rat);
    if (losses->parsed()) return cmd_losses(g, los);
    if (ident->parsed()) return cmd_identifiability(g, ide);
    std::cerr << "usage error: no subcommand\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
