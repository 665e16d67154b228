#include "subpop/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "subpop/cvar.hpp"
#include "subpop/errors.hpp"
#include "subpop/parallel.hpp"
#include "subpop/rng.hpp"
#include "subpop/stats.hpp"

namespace subpop {

namespace {

constexpr std::uint64_t kVectorStream = 0x76656908;  // planted vectors
constexpr std::uint64_t kDataStream = 0x64617472;    // dataset rows
constexpr std::uint64_t kOuterStream = 0x6f757465;   // oracle outer draws
constexpr std::uint64_t kInnerBase = 1ULL << 32;     // + outer index

double hinge(double x) { return x > 0.0 ? x : 0.0; }

double sgn(double x) { return x < 0.0 ? -1.0 : 1.0; }

}  // namespace

void validate(const SimConfig& cfg) {
  if (cfg.d < 2) throw ValidationError("simulation dimension must be at least 2");
  if (cfg.n < 1) throw ValidationError("simulation size must be at least 1");
  if (cfg.oracle_outer < 1 || cfg.oracle_inner < 1) {
    throw ValidationError("oracle sizes must be at least 1");
  }
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) {
    throw ValidationError("alpha must lie in (0, 1]");
  }
}

std::pair<std::vector<double>, std::vector<double>> planted_vectors(int d,
                                                                    std::uint64_t seed) {
  Rng rng = Rng::substream(seed, kVectorStream);
  auto unit = [&](std::vector<double>& v) {
    double norm2 = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      norm2 += x * x;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : v) x *= inv;
  };
  std::vector<double> scorer(d), label_rule(d);
  unit(scorer);
  unit(label_rule);
  return {scorer, label_rule};
}

Dataset simulate_dataset(const SimConfig& cfg) {
  validate(cfg);
  const auto [scorer, label_rule] = planted_vectors(cfg.d, cfg.seed);

  Rng rng = Rng::substream(cfg.seed, kDataStream);
  std::vector<double> losses(cfg.n);
  std::vector<double> z(cfg.n);
  std::vector<double> x(cfg.d);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    for (auto& xj : x) xj = rng.normal();
    double score = 0.0;
    double label_score = 0.0;
    for (int j = 0; j < cfg.d; ++j) {
      score += scorer[j] * x[j];
      label_score += label_rule[j] * x[j];
    }
    double y = sgn(label_score);
    if (x[0] > cfg.clip) y = -y;
    losses[i] = hinge(1.0 - y * score);
    z[i] = x[0];
  }
  return Dataset(std::move(losses), std::move(z), 1);
}

OracleEstimate oracle_true_w(const SimConfig& cfg) {
  validate(cfg);
  const auto [scorer, label_rule] = planted_vectors(cfg.d, cfg.seed);

  // Outer draws of the attribute coordinate.
  Rng outer_rng = Rng::substream(cfg.seed, kOuterStream);
  std::vector<double> x1(cfg.oracle_outer);
  for (auto& v : x1) v = outer_rng.normal();

  std::vector<double> cond_risk(cfg.oracle_outer);
  std::vector<double> cond_var_of_mean(cfg.oracle_outer);
  const int d = cfg.d;

  parallel_for(cfg.oracle_outer, [&](std::size_t i) {
    Rng rng = Rng::substream(cfg.seed, kInnerBase + i);
    const double x1_score = scorer[0] * x1[i];
    const double x1_label = label_rule[0] * x1[i];
    const bool flipped = x1[i] > cfg.clip;

    double sum = 0.0;
    double sum_sq = 0.0;
    const double n_inner = static_cast<double>(cfg.oracle_inner);
    for (std::size_t r = 0; r < cfg.oracle_inner; ++r) {
      double score = x1_score;
      double label_score = x1_label;
      for (int j = 1; j < d; ++j) {
        const double xj = rng.normal();
        score += scorer[j] * xj;
        label_score += label_rule[j] * xj;
      }
      double y = sgn(label_score);
      if (flipped) y = -y;
      const double loss = hinge(1.0 - y * score);
      sum += loss;
      sum_sq += loss * loss;
    }
    const double m = sum / n_inner;
    cond_risk[i] = m;
    const double var = std::max(sum_sq / n_inner - m * m, 0.0);
    cond_var_of_mean[i] = var / n_inner;
  });

  const EmpiricalCvarResult tail = empirical_cvar(cond_risk, cfg.alpha);

  OracleEstimate out;
  out.value = tail.value;
  out.mean_mu = mean(cond_risk);
  out.outer = cfg.oracle_outer;
  out.inner = cfg.oracle_inner;
  out.alpha = cfg.alpha;

  // First-order error: outer sampling error of a tail average plus the inner
  // noise averaged over the selected tail.
  std::vector<double> tail_gap(cond_risk.size());
  for (std::size_t i = 0; i < cond_risk.size(); ++i) {
    tail_gap[i] = std::max(cond_risk[i] - tail.eta_star, 0.0);
  }
  const double n_outer = static_cast<double>(cfg.oracle_outer);
  const double outer_var =
      population_variance(tail_gap) / (cfg.alpha * cfg.alpha) / n_outer;
  double inner_var_sum = 0.0;
  for (std::size_t i = 0; i < cond_risk.size(); ++i) {
    if (cond_risk[i] >= tail.eta_star) inner_var_sum += cond_var_of_mean[i];
  }
  const double tail_count = cfg.alpha * n_outer;
  const double inner_var = inner_var_sum / (tail_count * tail_count);
  out.std_error = std::sqrt(outer_var + inner_var);
  return out;
}

}  // namespace subpop
