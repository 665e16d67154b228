#include "subpop/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "subpop/errors.hpp"
#include "subpop/estimator.hpp"
#include "subpop/learners.hpp"

namespace subpop {

std::vector<DimFreeBound> dim_free_ucb(const Dataset& ds, const EvalConfig& cfg,
                                       double c_constant, double loss_bound,
                                       double misspec_budget) {
  if (!(c_constant > 0.0)) throw ValidationError("C must be positive");
  if (loss_bound < ds.max_loss()) {
    throw ValidationError("M (" + std::to_string(loss_bound) +
                          ") is below the maximum observed loss (" +
                          std::to_string(ds.max_loss()) + ")");
  }
  if (!(misspec_budget >= 0.0)) throw ValidationError("misspec_budget must be nonnegative");
  if (cfg.learner == LearnerKind::external) {
    throw ValidationError(
        "the dimension-free bound needs a fittable learner class to gauge the best "
        "in-class fold MSE; external predictions have none");
  }

  const CrossFitModel fitted(ds, cfg);
  const WorstCaseEstimate est = fitted.evaluate(cfg.alpha);

  const double n = static_cast<double>(ds.size());
  const double k_folds = static_cast<double>(cfg.k_folds);
  const double concentration =
      c_constant * loss_bound *
      std::pow(2.0 * k_folds * std::log(2.0 / cfg.delta) / n, 0.25);

  std::vector<DimFreeBound> bounds(est.folds.size());
  for (std::size_t k = 0; k < est.folds.size(); ++k) {
    const auto& rows = fitted.fold_rows(static_cast<int>(k));
    const double fold_mse = mse_on(fitted.model(static_cast<int>(k)), ds, rows);
    const double best_mse = min_class_mse(ds, rows, cfg.params, cfg.learner);

    DimFreeBound& b = bounds[k];
    b.k = static_cast<int>(k);
    b.omega_k = est.folds[k].omega_k;
    b.excess_mse_term = std::sqrt(std::max(fold_mse - best_mse, 0.0));
    b.misspec_budget = misspec_budget;
    b.concentration_term = concentration;
    b.c_constant = c_constant;
    b.loss_bound = loss_bound;
    b.delta = cfg.delta;
    b.ucb = b.omega_k +
            2.0 / cfg.alpha * (b.excess_mse_term + b.misspec_budget + b.concentration_term);
  }
  return bounds;
}

}  // namespace subpop
