#pragma once

#include <vector>

#include "subpop/config.hpp"
#include "subpop/dataset.hpp"

namespace subpop {

/// Per-fold finite-sample upper confidence bound whose width depends on the
/// first-stage class only through out-of-sample MSE differences:
///   ucb = omega_k + (2/alpha) * (excess_mse_term + misspec_budget
///                                + concentration_term)
/// with excess_mse_term = sqrt([fold MSE of the fitted model - best in-class
/// fold MSE]_+) and concentration_term = C * M * (2K log(2/delta) / n)^{1/4}.
struct DimFreeBound {
  int k = 0;
  double omega_k = 0.0;
  double excess_mse_term = 0.0;
  double misspec_budget = 0.0;
  double concentration_term = 0.0;
  double ucb = 0.0;
  double c_constant = 0.0;
  double loss_bound = 0.0;  // M, an a-priori upper bound on the loss
  double delta = 0.0;
};

/// Assembles the bound for every fold. C is a heuristic scale (the underlying
/// guarantee only fixes it up to an unspecified universal constant) and
/// misspec_budget stands in for the unidentifiable approximation error of the
/// learner class; with the default 0 the bound applies to the well-specified
/// case. Requires M >= max observed loss, C > 0 and a fittable learner.
std::vector<DimFreeBound> dim_free_ucb(const Dataset& ds, const EvalConfig& cfg,
                                       double c_constant, double loss_bound,
                                       double misspec_budget);

}  // namespace subpop
