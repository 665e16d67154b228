#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "subpop/config.hpp"
#include "subpop/dataset.hpp"
#include "subpop/folds.hpp"
#include "subpop/learners.hpp"

namespace subpop {

/// Per-fold pieces of the cross-fitted estimator. omega_k is, by
/// construction, exactly plug_in_k + correction_k.
struct FoldEstimate {
  int k = 0;
  double omega_k = 0.0;
  double plug_in_k = 0.0;
  double correction_k = 0.0;
  double sigma2_k = 0.0;
  double q_hat_k = 0.0;
};

struct WorstCaseEstimate {
  double alpha = 0.0;
  double delta = 0.0;
  std::size_t n = 0;
  int k_folds = 0;
  double omega = 0.0;  // mean of the per-fold estimates
  double sigma = 0.0;  // sqrt(mean of per-fold variances)
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::vector<FoldEstimate> folds;
};

/// Worst-case subpopulation weight (1/alpha) * 1{mu >= q_hat}. At alpha = 1
/// the whole population is the worst case and the weight is identically 1.
double tau_value(double mu, double q_hat, double alpha);

/// Same, evaluated through a fitted model at an attribute vector. Requires
/// q_hat to be attached.
double tau_hat(const RiskModel& model, std::span<const double> z, double alpha);

/// Tail average of the model's predictions over the given rows.
double plug_in_cvar(const RiskModel& model, const Dataset& ds,
                    std::span<const std::size_t> rows, double alpha);

/// Mean of tau_hat(Z) * (loss - mu_hat(Z)) over the rows: the first-order
/// correction that cancels the plug-in's sensitivity to errors in mu_hat.
double debias_correction(const RiskModel& model, const Dataset& ds,
                         std::span<const std::size_t> rows, double alpha);

/// Per-fold variance: (1/alpha^2) * Var[(mu - q)_+] + Var[tau * (loss - mu)],
/// both population-style (divide by the fold size). Fold size must be >= 2.
double fold_variance(const RiskModel& model, const Dataset& ds,
                     std::span<const std::size_t> rows, double alpha);

/// Fits the first stage once per fold and caches the predictions, so the
/// worst-case estimate can then be evaluated at any alpha without refitting
/// (level sweeps, certificates). Folds are fitted concurrently when allowed;
/// results are aggregated in fold order and do not depend on scheduling.
class CrossFitModel {
 public:
  CrossFitModel(const Dataset& ds, const EvalConfig& cfg);

  WorstCaseEstimate evaluate(double alpha) const;
  WorstCaseEstimate evaluate_plugin_only(double alpha) const;

  int fold_count() const { return static_cast<int>(folds_data_.size()); }
  std::size_t n() const { return n_; }
  const FoldPartition& partition() const { return partition_; }
  const RiskModel& model(int k) const { return folds_data_[k].model; }
  const std::vector<std::size_t>& fold_rows(int k) const { return folds_data_[k].rows; }

  /// Cached model predictions on fold k (row order).
  std::span<const double> fold_mu(int k) const { return folds_data_[k].mu_main; }

 private:
  struct FoldData {
    RiskModel model;
    std::vector<std::size_t> rows;      // main-fold rows
    std::vector<double> mu_main;        // predictions on the main fold
    std::vector<double> loss_main;      // losses on the main fold
    std::vector<double> mu_aux_sorted;  // predictions on the auxiliary folds, ascending
  };

  WorstCaseEstimate evaluate_impl(double alpha, bool debias) const;

  std::size_t n_ = 0;
  double delta_ = 0.05;
  FoldPartition partition_;
  std::vector<FoldData> folds_data_;
};

/// Cross-fitted debiased estimate with a (1 - delta) normal CI.
WorstCaseEstimate estimate(const Dataset& ds, const EvalConfig& cfg);

/// Same pipeline with the correction forced to zero, for bias comparisons.
WorstCaseEstimate estimate_plugin_only(const Dataset& ds, const EvalConfig& cfg);

}  // namespace subpop
