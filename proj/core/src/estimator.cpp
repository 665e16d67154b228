#include "subpop/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "subpop/cvar.hpp"
#include "subpop/errors.hpp"
#include "subpop/parallel.hpp"
#include "subpop/stats.hpp"

namespace subpop {

void validate_config(const Dataset& ds, const EvalConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) {
    throw ValidationError("alpha must lie in (0, 1], got " + std::to_string(cfg.alpha));
  }
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) {
    throw ValidationError("delta must lie in (0, 1), got " + std::to_string(cfg.delta));
  }
  if (cfg.k_folds < 2) throw ValidationError("fold count must be at least 2");
  if (ds.size() < 2 * static_cast<std::size_t>(cfg.k_folds)) {
    throw ValidationError("need at least 2K = " + std::to_string(2 * cfg.k_folds) +
                          " samples for " + std::to_string(cfg.k_folds) + " folds, got " +
                          std::to_string(ds.size()));
  }
  if (cfg.learner == LearnerKind::external && !ds.has_external_mu()) {
    throw ValidationError("learner 'external' requires a mu_hat column in the dataset");
  }
  validate(cfg.params);
}

double tau_value(double mu, double q_hat, double alpha) {
  if (alpha >= 1.0) return 1.0;
  return mu >= q_hat ? 1.0 / alpha : 0.0;
}

double tau_hat(const RiskModel& model, std::span<const double> z, double alpha) {
  return tau_value(model.predict(z), model.q_hat(), alpha);
}

namespace {

// Shared reductions over cached (mu, loss) fold arrays. The public per-model
// operations and CrossFitModel::evaluate both funnel through these, so the
// two paths agree bit-for-bit.
double plug_in_from_mu(std::span<const double> mu, double alpha) {
  return empirical_cvar(mu, alpha).value;
}

double correction_from_mu(std::span<const double> mu, std::span<const double> loss,
                          double q_hat, double alpha) {
  std::vector<double> terms(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    terms[i] = tau_value(mu[i], q_hat, alpha) * (loss[i] - mu[i]);
  }
  return mean(terms);
}

double variance_from_mu(std::span<const double> mu, std::span<const double> loss,
                        double q_hat, double alpha) {
  if (mu.size() < 2) {
    throw ValidationError("fold variance needs at least 2 samples");
  }
  std::vector<double> tail_gap(mu.size());
  std::vector<double> weighted_residual(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    tail_gap[i] = std::max(mu[i] - q_hat, 0.0);
    weighted_residual[i] = tau_value(mu[i], q_hat, alpha) * (loss[i] - mu[i]);
  }
  return population_variance(tail_gap) / (alpha * alpha) +
         population_variance(weighted_residual);
}

std::vector<double> predictions_on(const RiskModel& model, const Dataset& ds,
                                   std::span<const std::size_t> rows) {
  std::vector<double> mu(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    mu[i] = model.predict_row(ds, rows[i]);
  }
  return mu;
}

}  // namespace

double plug_in_cvar(const RiskModel& model, const Dataset& ds,
                    std::span<const std::size_t> rows, double alpha) {
  if (rows.empty()) throw ValidationError("evaluation slice is empty");
  return plug_in_from_mu(predictions_on(model, ds, rows), alpha);
}

double debias_correction(const RiskModel& model, const Dataset& ds,
                         std::span<const std::size_t> rows, double alpha) {
  if (rows.empty()) throw ValidationError("evaluation slice is empty");
  const auto mu = predictions_on(model, ds, rows);
  std::vector<double> loss(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) loss[i] = ds.loss(rows[i]);
  return correction_from_mu(mu, loss, model.q_hat(), alpha);
}

double fold_variance(const RiskModel& model, const Dataset& ds,
                     std::span<const std::size_t> rows, double alpha) {
  const auto mu = predictions_on(model, ds, rows);
  std::vector<double> loss(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) loss[i] = ds.loss(rows[i]);
  return variance_from_mu(mu, loss, model.q_hat(), alpha);
}

CrossFitModel::CrossFitModel(const Dataset& ds, const EvalConfig& cfg)
    : n_(ds.size()), delta_(cfg.delta) {
  validate_config(ds, cfg);
  partition_ = make_folds(ds.size(), cfg.k_folds, cfg.seed);
  folds_data_.resize(cfg.k_folds);

  parallel_for(static_cast<std::size_t>(cfg.k_folds), [&](std::size_t k) {
    FoldData& fd = folds_data_[k];
    fd.rows = partition_.fold_indices(static_cast<int>(k));
    const auto aux = partition_.complement_indices(static_cast<int>(k));

    if (cfg.learner == LearnerKind::external) {
      fd.model = external_risk_model(ds);
    } else {
      fd.model = fit_conditional_risk(ds, aux, cfg.params, cfg.learner);
    }

    fd.mu_aux_sorted = predictions_on(fd.model, ds, aux);
    std::sort(fd.mu_aux_sorted.begin(), fd.mu_aux_sorted.end());

    fd.mu_main = predictions_on(fd.model, ds, fd.rows);
    fd.loss_main.resize(fd.rows.size());
    for (std::size_t i = 0; i < fd.rows.size(); ++i) {
      fd.loss_main[i] = ds.loss(fd.rows[i]);
    }
  });
}

WorstCaseEstimate CrossFitModel::evaluate_impl(double alpha, bool debias) const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ValidationError("alpha must lie in (0, 1], got " + std::to_string(alpha));
  }
  WorstCaseEstimate est;
  est.alpha = alpha;
  est.delta = delta_;
  est.n = n_;
  est.k_folds = fold_count();
  est.folds.resize(folds_data_.size());

  double omega_sum = 0.0;
  double var_sum = 0.0;
  for (std::size_t k = 0; k < folds_data_.size(); ++k) {
    const FoldData& fd = folds_data_[k];
    FoldEstimate& fe = est.folds[k];
    fe.k = static_cast<int>(k);
    fe.q_hat_k = empirical_quantile_sorted(fd.mu_aux_sorted, 1.0 - alpha, QuantileKind::lower);
    fe.plug_in_k = plug_in_from_mu(fd.mu_main, alpha);
    fe.correction_k =
        debias ? correction_from_mu(fd.mu_main, fd.loss_main, fe.q_hat_k, alpha) : 0.0;
    fe.omega_k = fe.plug_in_k + fe.correction_k;
    fe.sigma2_k = variance_from_mu(fd.mu_main, fd.loss_main, fe.q_hat_k, alpha);
    omega_sum += fe.omega_k;
    var_sum += fe.sigma2_k;
  }

  const double k_count = static_cast<double>(folds_data_.size());
  est.omega = omega_sum / k_count;
  est.sigma = std::sqrt(var_sum / k_count);
  const double z = inverse_normal_cdf(1.0 - delta_ / 2.0);
  const double half_width = z * est.sigma / std::sqrt(static_cast<double>(n_));
  est.ci_low = est.omega - half_width;
  est.ci_high = est.omega + half_width;
  return est;
}

WorstCaseEstimate CrossFitModel::evaluate(double alpha) const {
  return evaluate_impl(alpha, /*debias=*/true);
}

WorstCaseEstimate CrossFitModel::evaluate_plugin_only(double alpha) const {
  return evaluate_impl(alpha, /*debias=*/false);
}

WorstCaseEstimate estimate(const Dataset& ds, const EvalConfig& cfg) {
  return CrossFitModel(ds, cfg).evaluate(cfg.alpha);
}

WorstCaseEstimate estimate_plugin_only(const Dataset& ds, const EvalConfig& cfg) {
  return CrossFitModel(ds, cfg).evaluate_plugin_only(cfg.alpha);
}

}  // namespace subpop
