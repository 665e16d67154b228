#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "subpop/config.hpp"
#include "subpop/dataset.hpp"

namespace subpop {

enum class CertificateMode { plugin_per_fold, debiased_curve };

std::string_view to_string(CertificateMode mode);
CertificateMode certificate_mode_from_string(std::string_view name);

/// One probe of the level curve during the search. fold >= 0 identifies a
/// per-fold plug-in curve; fold == -1 marks the cross-fitted aggregate.
struct CertificateProbe {
  int fold = -1;
  double alpha = 0.0;
  double w = 0.0;
};

/// Smallest subpopulation size whose worst-case loss stays below the
/// threshold. `feasible` is false when even the full population (alpha = 1)
/// exceeds the threshold; `boundary` marks the case where the whole searched
/// curve is already acceptable and alpha_hat sits at alpha_lo.
struct Certificate {
  double threshold = 0.0;
  bool feasible = false;
  bool boundary = false;
  double alpha_hat = 0.0;  // meaningful only when feasible
  CertificateMode mode = CertificateMode::plugin_per_fold;
  double alpha_lo = 0.0;
  double tol = 0.0;
  std::vector<double> per_fold_alpha;  // plugin_per_fold mode only
  std::vector<CertificateProbe> trace;
};

/// Suggested lower end of the search bracket: below roughly 10 effective
/// tail points the empirical tail average is dominated by single samples.
double default_alpha_lo(std::size_t n);

/// Bisection over the nonincreasing level curve on [alpha_lo, 1], to bracket
/// width tol. First-stage models are fitted once per fold and reused across
/// every probe. In plugin_per_fold mode each fold's plug-in curve is solved
/// separately and alpha_hat averages the per-fold roots; in debiased_curve
/// mode the monotone plug-in aggregate brackets the root and a local scan of
/// the debiased curve (which the correction can make non-monotone) refines
/// it. Every probe lands in the trace.
Certificate certify(const Dataset& ds, const EvalConfig& cfg, double threshold,
                    double alpha_lo, double tol, CertificateMode mode);

struct RelativeErrorBound {
  double value = 0.0;  // +inf when vacuous
  bool vacuous = false;
};

/// Relative-error radius |alpha_true / alpha_hat - 1| implied by a uniform
/// curve-estimation error bound u_delta: u_delta divided by the mean positive
/// gap between the fold's predictions and their (1 - min(alpha_floor,
/// alpha_hat))-quantile. Flagged vacuous when that gap is zero.
RelativeErrorBound certificate_error_bound(std::span<const double> fold_mu, double alpha_hat,
                                           double alpha_floor, double u_delta);

}  // namespace subpop
