#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace subpop {

enum class QuantileKind { lower, upper };

/// Exact empirical tail average at level alpha, together with the endpoints
/// of the interval of dual minimizers.
struct EmpiricalCvarResult {
  double value = 0.0;      // the tail average
  double eta_star = 0.0;   // lower empirical (1-alpha)-quantile; canonical minimizer
  double eta_upper = 0.0;  // upper quantile; right endpoint of the optimum set
};

/// Empirical quantile of the step CDF F(t) = #{v_i <= t} / n.
///   lower: inf{t : F(t) >= level}    upper: inf{t : F(t) > level}
/// Both return attained sample values (lower clamps to min at level 0; upper
/// returns max at level 1).
double empirical_quantile(std::span<const double> values, double level, QuantileKind kind);

/// Same, for values already sorted ascending (no copy, no re-sort).
double empirical_quantile_sorted(std::span<const double> sorted, double level,
                                 QuantileKind kind);

/// Mean of the alpha-tail: with t = alpha*n, the sum of the floor(t) largest
/// values plus the fractional (t - floor(t)) share of the next one, divided
/// by t. Equals the minimum of the dual objective
///   eta -> (1/alpha) * mean[(v - eta)_+] + eta
/// for every input, ties included; alpha = 1 gives the sample mean exactly.
EmpiricalCvarResult empirical_cvar(std::span<const double> values, double alpha);

/// The dual objective above, evaluated at a given eta (compensated sums).
/// Kept separate so tests can minimize it independently of the sorted form.
double cvar_dual_objective(std::span<const double> values, double alpha, double eta);

/// L^k generalization: inf_eta (1/alpha) * (mean[(v-eta)_+^k])^{1/k} + eta,
/// located by golden-section search on [min v, max v] to 1e-10 in eta.
/// k = 1 is delegated to empirical_cvar and is exact.
double higher_order_cvar(std::span<const double> values, double alpha, double k);

/// Discrete probability measure over tail levels alpha in (0, 1].
struct AlphaMixture {
  struct Atom {
    double alpha = 1.0;
    double weight = 1.0;
  };
  std::vector<Atom> atoms;
};

/// Throws unless weights are positive and sum to 1 within 1e-12 and every
/// alpha lies in (0, 1].
void validate_mixture(const AlphaMixture& mixture);

/// Mixture-weighted average of tail averages: sum_i w_i * W_{alpha_i}(v).
double generalized_worst_case(std::span<const double> values, const AlphaMixture& mixture);

}  // namespace subpop
