#pragma once

#include <cstddef>
#include <span>

namespace subpop {

/// Compensated (Neumaier) summation. Rounding error stays O(eps) instead of
/// O(n*eps), which several result invariants at n ~ 10^5 rely on.
double neumaier_sum(std::span<const double> values);

double mean(std::span<const double> values);

/// Population variance (divide by n), two-pass. Exactly zero for constants.
double population_variance(std::span<const double> values);

/// Inverse standard-normal CDF. Acklam rational approximation followed by one
/// Halley refinement; absolute error well below 1e-12 on (0, 1).
double inverse_normal_cdf(double p);

/// Standard-normal CDF via erfc.
double normal_cdf(double x);

}  // namespace subpop
