// subpop: worst-case subpopulation performance of a fixed prediction model.
//
// Subcommands wrap the library one-to-one: `cvar` and `hocvar` evaluate tail
// averages of raw values, `estimate`/`curve` run the cross-fitted debiased
// estimator, `certify` searches for the smallest acceptable subpopulation
// size, `ucb` assembles per-fold upper confidence bounds, and
// `simulate`/`oracle` provide the synthetic benchmark and its ground truth.
//
// Conventions: JSON on stdout with a run manifest embedded, diagnostics on
// stderr, exit 0 on success, 1 on runtime failure, 2 on validation failure.
// All floats are printed with 17 significant digits; identical command lines
// (including --seed) reproduce byte-identical output except the wall-clock
// manifest field.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "subpop/certificate.hpp"
#include "subpop/csv.hpp"
#include "subpop/cvar.hpp"
#include "subpop/errors.hpp"
#include "subpop/estimator.hpp"
#include "subpop/json.hpp"
#include "subpop/serialize.hpp"
#include "subpop/simulation.hpp"
#include "subpop/bounds.hpp"
#include "subpop/version.hpp"

namespace {

using Clock = std::chrono::steady_clock;

struct ManifestInfo {
  std::string command;
  std::vector<std::string> args;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> input_digest;
  Clock::time_point started = Clock::now();
};

void write_manifest(subpop::JsonWriter& w, const ManifestInfo& info) {
  const double elapsed_ms =
      std::chrono::duration<double, std::milli>(Clock::now() - info.started).count();
  w.key("manifest").begin_object();
  w.field("command", info.command);
  w.key("args").begin_array();
  for (const auto& a : info.args) w.value(a);
  w.end_array();
  if (info.seed) {
    w.field("seed", *info.seed);
  } else {
    w.key("seed").null();
  }
  if (info.input_digest) {
    w.field("input_digest", *info.input_digest);
  } else {
    w.key("input_digest").null();
  }
  w.field("version", subpop::kVersion);
  w.field("wall_clock_ms", elapsed_ms);
  w.end_object();
}

void emit(const std::string& json) {
  std::fputs(json.c_str(), stdout);
  std::fputc('\n', stdout);
}

std::vector<double> parse_value_list(const std::string& text) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(start, comma - start);
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      values.push_back(v);
    } catch (const std::exception&) {
      throw subpop::ValidationError("cannot parse '" + item + "' in --values");
    }
    start = comma + 1;
  }
  return values;
}

// Loads values for the value-based commands, recording the input digest.
std::vector<double> resolve_values(const std::string& input, const std::string& values,
                                   ManifestInfo& manifest) {
  if (input.empty() == values.empty()) {
    throw subpop::ValidationError("provide exactly one of --input or --values");
  }
  if (!input.empty()) {
    const std::string bytes = subpop::read_file(input);
    manifest.input_digest = subpop::fnv1a64_hex(bytes);
    return subpop::parse_loss_column(bytes);
  }
  manifest.input_digest = subpop::fnv1a64_hex(values);
  return parse_value_list(values);
}

subpop::Dataset load_dataset(const std::string& path, ManifestInfo& manifest) {
  const std::string bytes = subpop::read_file(path);
  manifest.input_digest = subpop::fnv1a64_hex(bytes);
  return subpop::parse_csv(bytes);
}

struct EstimateFlags {
  std::string input;
  double alpha = 0.3;
  int folds = 5;
  std::string learner = "boosted_stumps";
  double delta = 0.05;
  std::uint64_t seed = 0;
  int knn_k = 0;
  int rounds = 200;
  double learning_rate = 0.1;
  int max_depth = 2;
  int bins = 64;

  subpop::EvalConfig to_config() const {
    subpop::EvalConfig cfg;
    cfg.alpha = alpha;
    cfg.k_folds = folds;
    cfg.delta = delta;
    cfg.learner = subpop::learner_from_string(learner);
    cfg.seed = seed;
    cfg.params.knn.k_neighbors = knn_k;
    cfg.params.boost.rounds = rounds;
    cfg.params.boost.learning_rate = learning_rate;
    cfg.params.boost.max_depth = max_depth;
    cfg.params.boost.n_bins = bins;
    return cfg;
  }
};

void add_estimate_flags(CLI::App* cmd, EstimateFlags& flags, bool with_alpha = true) {
  cmd->add_option("--input", flags.input, "dataset CSV (loss,z0..z{d-1}[,mu_hat])")
      ->required();
  if (with_alpha) {
    cmd->add_option("--alpha", flags.alpha, "subpopulation size in (0,1]")->required();
  }
  cmd->add_option("--folds", flags.folds, "cross-fitting fold count (default 5)");
  cmd->add_option("--learner", flags.learner, "knn | boosted_stumps | external");
  cmd->add_option("--delta", flags.delta, "CI significance level (default 0.05)");
  cmd->add_option("--seed", flags.seed, "fold-assignment seed (default 0)");
  cmd->add_option("--knn-k", flags.knn_k, "neighbor count; 0 = ceil(sqrt(|aux|))");
  cmd->add_option("--rounds", flags.rounds, "boosting rounds (default 200)");
  cmd->add_option("--learning-rate", flags.learning_rate, "boosting shrinkage (default 0.1)");
  cmd->add_option("--max-depth", flags.max_depth, "boosted tree depth 1..3 (default 2)");
  cmd->add_option("--bins", flags.bins, "histogram bins for splits (default 64)");
}

int run(int argc, char** argv) {
  CLI::App app{"worst-case subpopulation performance toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("subpop ") + subpop::kVersion);

  ManifestInfo manifest;
  for (int i = 1; i < argc; ++i) manifest.args.emplace_back(argv[i]);

  // cvar ------------------------------------------------------------------
  auto* cvar_cmd = app.add_subcommand("cvar", "empirical tail average of losses");
  std::string cvar_input, cvar_values;
  double cvar_alpha = 0.0;
  cvar_cmd->add_option("--input", cvar_input, "CSV with a loss column");
  cvar_cmd->add_option("--values", cvar_values, "comma-separated values");
  cvar_cmd->add_option("--alpha", cvar_alpha, "tail level in (0,1]")->required();

  // hocvar ----------------------------------------------------------------
  auto* hocvar_cmd = app.add_subcommand("hocvar", "higher-order tail risk");
  std::string ho_input, ho_values;
  double ho_alpha = 0.0;
  double ho_k = 1.0;
  hocvar_cmd->add_option("--input", ho_input, "CSV with a loss column");
  hocvar_cmd->add_option("--values", ho_values, "comma-separated values");
  hocvar_cmd->add_option("--alpha", ho_alpha, "tail level in (0,1]")->required();
  hocvar_cmd->add_option("--k", ho_k, "tail order, k >= 1")->required();

  // estimate ----------------------------------------------------------------
  auto* est_cmd = app.add_subcommand("estimate", "cross-fitted debiased estimate with CI");
  EstimateFlags est_flags;
  bool plugin_only = false;
  add_estimate_flags(est_cmd, est_flags);
  est_cmd->add_flag("--plugin-only", plugin_only, "skip the debiasing correction");

  // curve -------------------------------------------------------------------
  auto* curve_cmd = app.add_subcommand("curve", "estimate over a list of alphas (CSV out)");
  EstimateFlags curve_flags;
  std::string curve_alphas;
  add_estimate_flags(curve_cmd, curve_flags, /*with_alpha=*/false);
  curve_cmd->add_option("--alphas", curve_alphas, "comma-separated alphas in (0,1]")
      ->required();

  // certify -----------------------------------------------------------------
  auto* cert_cmd = app.add_subcommand("certify", "smallest acceptable subpopulation size");
  EstimateFlags cert_flags;
  double cert_threshold = 0.0;
  double cert_alpha_lo = 0.0;  // 0 = default max(10/n, 0.01)
  double cert_tol = 1e-3;
  std::string cert_mode = "plugin_per_fold";
  add_estimate_flags(cert_cmd, cert_flags, /*with_alpha=*/false);
  cert_cmd->add_option("--threshold", cert_threshold, "maximum acceptable loss")->required();
  cert_cmd->add_option("--alpha-lo", cert_alpha_lo,
                       "search bracket lower end (default max(10/n, 0.01))");
  cert_cmd->add_option("--tol", cert_tol, "bisection tolerance in alpha (default 1e-3)");
  cert_cmd->add_option("--mode", cert_mode, "plugin_per_fold | debiased_curve");

  // ucb ---------------------------------------------------------------------
  auto* ucb_cmd = app.add_subcommand("ucb", "per-fold dimension-free upper confidence bound");
  EstimateFlags ucb_flags;
  double ucb_c = 1.0;
  double ucb_m = std::nan("");
  double ucb_budget = 0.0;
  add_estimate_flags(ucb_cmd, ucb_flags);
  ucb_cmd->add_option("--C", ucb_c, "heuristic scale constant (default 1)");
  ucb_cmd->add_option("--M", ucb_m, "a-priori loss bound (default: max observed loss)");
  ucb_cmd->add_option("--budget", ucb_budget, "misspecification budget (default 0)");

  // simulate ------------------------------------------------------------
  auto* sim_cmd = app.add_subcommand("simulate", "write a synthetic benchmark dataset");
  subpop::SimConfig sim_cfg;
  std::string sim_out;
  sim_cmd->add_option("--n", sim_cfg.n, "number of rows")->required();
  sim_cmd->add_option("--d", sim_cfg.d, "latent dimension (default 5)");
  sim_cmd->add_option("--seed", sim_cfg.seed, "seed (default 0)");
  sim_cmd->add_option("--out", sim_out, "output CSV path")->required();

  // oracle --------------------------------------------------------------
  auto* oracle_cmd = app.add_subcommand("oracle", "nested Monte-Carlo ground truth");
  subpop::SimConfig oracle_cfg;
  oracle_cmd->add_option("--outer", oracle_cfg.oracle_outer, "outer draws (default 20000)");
  oracle_cmd->add_option("--inner", oracle_cfg.oracle_inner, "inner draws (default 5000)");
  oracle_cmd->add_option("--alpha", oracle_cfg.alpha, "tail level (default 0.3)");
  oracle_cmd->add_option("--d", oracle_cfg.d, "latent dimension (default 5)");
  oracle_cmd->add_option("--seed", oracle_cfg.seed, "seed (default 0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage/validation problems share one exit code
  }

  subpop::JsonWriter w;

  if (cvar_cmd->parsed()) {
    manifest.command = "cvar";
    const auto values = resolve_values(cvar_input, cvar_values, manifest);
    const auto result = subpop::empirical_cvar(values, cvar_alpha);
    w.begin_object();
    subpop::write_cvar_fields(w, result, cvar_alpha, values.size());
    write_manifest(w, manifest);
    w.end_object();
    emit(w.take());
    return 0;
  }

  if (hocvar_cmd->parsed()) {
    manifest.command = "hocvar";
    const auto values = resolve_values(ho_input, ho_values, manifest);
    const double value = subpop::higher_order_cvar(values, ho_alpha, ho_k);
    w.begin_object();
    w.field("value", value);
    w.field("k", ho_k);
    w.field("alpha", ho_alpha);
    w.field("n", values.size());
    write_manifest(w, manifest);
    w.end_object();
    emit(w.take());
    return 0;
  }

  if (est_cmd->parsed()) {
    manifest.command = "estimate";
    manifest.seed = est_flags.seed;
    const auto ds = load_dataset(est_flags.input, manifest);
    const auto cfg = est_flags.to_config();
    const auto est =
        plugin_only ? subpop::estimate_plugin_only(ds, cfg) : subpop::estimate(ds, cfg);
    w.begin_object();
    subpop::write_fields(w, est);
    w.field("plugin_only", plugin_only);
    write_manifest(w, manifest);
    w.end_object();
    emit(w.take());
    return 0;
  }

  if (curve_cmd->parsed()) {
    manifest.command = "curve";
    manifest.seed = curve_flags.seed;
    const auto ds = load_dataset(curve_flags.input, manifest);
    const auto alphas = parse_value_list(curve_alphas);
    if (alphas.empty()) throw subpop::ValidationError("--alphas is empty");
    for (double a : alphas) {
      if (!(a > 0.0 && a <= 1.0)) {
        throw subpop::ValidationError("alpha must lie in (0, 1], got " +
                                      subpop::format_double(a));
      }
    }
    const subpop::CrossFitModel fitted(ds, curve_flags.to_config());
    std::string out = "alpha,omega,sigma,ci_low,ci_high\n";
    for (double a : alphas) {
      const auto est = fitted.evaluate(a);
      out += subpop::format_double(a) + ',' + subpop::format_double(est.omega) + ',' +
             subpop::format_double(est.sigma) + ',' + subpop::format_double(est.ci_low) +
             ',' + subpop::format_double(est.ci_high) + '\n';
    }
    std::fputs(out.c_str(), stdout);
    return 0;
  }

  if (cert_cmd->parsed()) {
    manifest.command = "certify";
    manifest.seed = cert_flags.seed;
    const auto ds = load_dataset(cert_flags.input, manifest);
    const double alpha_lo =
        cert_alpha_lo > 0.0 ? cert_alpha_lo : subpop::default_alpha_lo(ds.size());
    const auto cert =
        subpop::certify(ds, cert_flags.to_config(), cert_threshold, alpha_lo, cert_tol,
                        subpop::certificate_mode_from_string(cert_mode));
    w.begin_object();
    subpop::write_fields(w, cert);
    write_manifest(w, manifest);
    w.end_object();
    emit(w.take());
    return 0;
  }

  if (ucb_cmd->parsed()) {
    manifest.command = "ucb";
    manifest.seed = ucb_flags.seed;
    const auto ds = load_dataset(ucb_flags.input, manifest);
    const double m = std::isnan(ucb_m) ? ds.max_loss() : ucb_m;
    if (ucb_c == 1.0) {
      std::fputs("note: C=1 is a heuristic scale; the bound width is linear in C\n", stderr);
    }
    const auto cfg = ucb_flags.to_config();
    const auto bounds = subpop::dim_free_ucb(ds, cfg, ucb_c, m, ucb_budget);
    w.begin_object();
    subpop::write_ucb_fields(w, bounds, cfg.alpha, ds.size(), cfg.k_folds);
    write_manifest(w, manifest);
    w.end_object();
    emit(w.take());
    return 0;
  }

  if (sim_cmd->parsed()) {
    manifest.command = "simulate";
    manifest.seed = sim_cfg.seed;
    const auto ds = subpop::simulate_dataset(sim_cfg);
    subpop::write_csv(ds, sim_out);
    std::size_t flipped = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.z_row(i)[0] > sim_cfg.clip) ++flipped;
    }
    w.begin_object();
    w.field("path", sim_out);
    w.field("n", ds.size());
    w.field("d", ds.dim());
    w.field("flip_fraction", static_cast<double>(flipped) / static_cast<double>(ds.size()));
    write_manifest(w, manifest);
    w.end_object();
    emit(w.take());
    return 0;
  }

  if (oracle_cmd->parsed()) {
    manifest.command = "oracle";
    manifest.seed = oracle_cfg.seed;
    const auto oracle = subpop::oracle_true_w(oracle_cfg);
    w.begin_object();
    subpop::write_fields(w, oracle);
    write_manifest(w, manifest);
    w.end_object();
    emit(w.take());
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const subpop::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
