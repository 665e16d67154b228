#include "subpop/cvar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "subpop/errors.hpp"
#include "subpop/stats.hpp"

namespace subpop {

namespace {

void require_nonempty_finite(std::span<const double> values) {
  if (values.empty()) throw ValidationError("value vector is empty");
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("value vector contains a non-finite entry");
  }
}

// alpha * n and level * n land exactly on integers for every representable
// ratio we care about (0.25 * 4, 0.3 * 10, ...), but only up to rounding in
// the product. Snap to the nearest integer when within a few ulps so the
// integer/fractional split of the tail never flips on representation noise.
double snap_to_int(double x) {
  const double r = std::nearbyint(x);
  if (std::fabs(x - r) <=
      4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(x))) {
    return r;
  }
  return x;
}

}  // namespace

double empirical_quantile_sorted(std::span<const double> sorted, double level,
                                 QuantileKind kind) {
  if (sorted.empty()) throw ValidationError("value vector is empty");
  if (!(level >= 0.0 && level <= 1.0)) {
    throw ValidationError("quantile level must lie in [0, 1]");
  }
  const double n = static_cast<double>(sorted.size());
  const double t = snap_to_int(level * n);
  std::ptrdiff_t k;
  if (kind == QuantileKind::lower) {
    // smallest k with (k+1)/n >= level
    k = static_cast<std::ptrdiff_t>(std::ceil(t)) - 1;
  } else {
    // smallest k with (k+1)/n > level
    k = static_cast<std::ptrdiff_t>(std::floor(t));
  }
  k = std::max<std::ptrdiff_t>(0, std::min<std::ptrdiff_t>(k, sorted.size() - 1));
  return sorted[static_cast<std::size_t>(k)];
}

double empirical_quantile(std::span<const double> values, double level, QuantileKind kind) {
  require_nonempty_finite(values);
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return empirical_quantile_sorted(sorted, level, kind);
}

EmpiricalCvarResult empirical_cvar(std::span<const double> values, double alpha) {
  require_nonempty_finite(values);
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ValidationError("alpha must lie in (0, 1], got " + std::to_string(alpha));
  }

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());  // ascending

  const std::size_t n = sorted.size();
  const double t = snap_to_int(alpha * static_cast<double>(n));
  const std::size_t whole = std::min<std::size_t>(static_cast<std::size_t>(t), n);
  const double frac = t - static_cast<double>(whole);

  // Top `whole` entries are sorted[n-whole .. n), summed ascending.
  const double tail_sum = neumaier_sum({sorted.data() + (n - whole), whole});
  double numerator = tail_sum;
  if (frac > 0.0 && whole < n) {
    numerator += frac * sorted[n - whole - 1];
  }

  EmpiricalCvarResult result;
  result.value = numerator / t;
  result.eta_star = empirical_quantile_sorted(sorted, 1.0 - alpha, QuantileKind::lower);
  result.eta_upper = empirical_quantile_sorted(sorted, 1.0 - alpha, QuantileKind::upper);
  return result;
}

double cvar_dual_objective(std::span<const double> values, double alpha, double eta) {
  require_nonempty_finite(values);
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ValidationError("alpha must lie in (0, 1], got " + std::to_string(alpha));
  }
  std::vector<double> excess(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    excess[i] = std::max(values[i] - eta, 0.0);
  }
  return mean(excess) / alpha + eta;
}

namespace {

// (1/alpha) * (mean[(v - eta)_+^k])^{1/k} + eta, rescaled by the largest
// positive part so that pow never overflows for big k.
double lk_objective(std::span<const double> values, double alpha, double k, double eta) {
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, v - eta);
  if (scale <= 0.0) return eta;
  std::vector<double> powed(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double gap = std::max(values[i] - eta, 0.0);
    powed[i] = std::pow(gap / scale, k);
  }
  return scale * std::pow(mean(powed), 1.0 / k) / alpha + eta;
}

}  // namespace

double higher_order_cvar(std::span<const double> values, double alpha, double k) {
  require_nonempty_finite(values);
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ValidationError("alpha must lie in (0, 1], got " + std::to_string(alpha));
  }
  if (!(k >= 1.0)) {
    throw ValidationError("tail order k must be at least 1, got " + std::to_string(k));
  }
  if (k == 1.0) return empirical_cvar(values, alpha).value;

  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  double lo = *min_it;
  double hi = *max_it;
  if (lo == hi) return lo;

  // Golden-section search; the objective is convex in eta and its minimizer
  // lies inside the sample range for nonnegative inputs.
  constexpr double kTol = 1e-10;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = lk_objective(values, alpha, k, x1);
  double f2 = lk_objective(values, alpha, k, x2);
  while (hi - lo > kTol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = lk_objective(values, alpha, k, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = lk_objective(values, alpha, k, x2);
    }
  }
  const double f_mid = lk_objective(values, alpha, k, (lo + hi) / 2.0);
  const double f_max = lk_objective(values, alpha, k, *max_it);
  return std::min({f1, f2, f_mid, f_max});
}

void validate_mixture(const AlphaMixture& mixture) {
  if (mixture.atoms.empty()) throw ValidationError("mixture has no atoms");
  double total = 0.0;
  for (const auto& atom : mixture.atoms) {
    if (!(atom.alpha > 0.0 && atom.alpha <= 1.0)) {
      throw ValidationError("mixture atom alpha must lie in (0, 1]");
    }
    if (!(atom.weight > 0.0) || !std::isfinite(atom.weight)) {
      throw ValidationError("mixture weights must be positive");
    }
    total += atom.weight;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw ValidationError("mixture weights sum to " + std::to_string(total) +
                          ", expected 1");
  }
}

double generalized_worst_case(std::span<const double> values, const AlphaMixture& mixture) {
  validate_mixture(mixture);
  double total = 0.0;
  for (const auto& atom : mixture.atoms) {
    total += atom.weight * empirical_cvar(values, atom.alpha).value;
  }
  return total;
}

}  // namespace subpop
