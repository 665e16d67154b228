#include "subpop/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "subpop/cvar.hpp"
#include "subpop/errors.hpp"
#include "subpop/estimator.hpp"
#include "subpop/stats.hpp"

namespace subpop {

std::string_view to_string(CertificateMode mode) {
  return mode == CertificateMode::plugin_per_fold ? "plugin_per_fold" : "debiased_curve";
}

CertificateMode certificate_mode_from_string(std::string_view name) {
  if (name == "plugin_per_fold") return CertificateMode::plugin_per_fold;
  if (name == "debiased_curve") return CertificateMode::debiased_curve;
  throw ValidationError("unknown certificate mode '" + std::string(name) +
                        "' (expected plugin_per_fold or debiased_curve)");
}

double default_alpha_lo(std::size_t n) {
  return std::max(10.0 / static_cast<double>(n), 0.01);
}

namespace {

// Bisection for the smallest alpha with curve(alpha) <= threshold, given
// curve(lo) > threshold >= curve(hi) and a nonincreasing curve.
template <typename Curve>
double bisect_root(const Curve& curve, double lo, double hi, double threshold, double tol) {
  while (hi - lo > tol) {
    const double mid = lo + (hi - lo) / 2.0;
    if (curve(mid) <= threshold) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace

Certificate certify(const Dataset& ds, const EvalConfig& cfg, double threshold,
                    double alpha_lo, double tol, CertificateMode mode) {
  if (!std::isfinite(threshold)) throw ValidationError("threshold must be finite");
  if (!(alpha_lo > 0.0 && alpha_lo < 1.0)) {
    throw ValidationError("alpha_lo must lie in (0, 1), got " + std::to_string(alpha_lo));
  }
  if (!(tol > 0.0)) throw ValidationError("tol must be positive");

  Certificate cert;
  cert.threshold = threshold;
  cert.mode = mode;
  cert.alpha_lo = alpha_lo;
  cert.tol = tol;

  // The search never depends on cfg.alpha; evaluate() is probed per level.
  const CrossFitModel fitted(ds, cfg);

  if (mode == CertificateMode::plugin_per_fold) {
    bool all_feasible = true;
    bool all_boundary = true;
    std::vector<double> roots;
    for (int k = 0; k < fitted.fold_count(); ++k) {
      const auto curve = [&](double a) {
        const double w = empirical_cvar(fitted.fold_mu(k), a).value;
        cert.trace.push_back({k, a, w});
        return w;
      };
      const double w_full = curve(1.0);
      if (w_full > threshold) {
        all_feasible = false;
        continue;  // no root on this fold; keep probing the others for the trace
      }
      const double w_lo = curve(alpha_lo);
      if (w_lo <= threshold) {
        roots.push_back(alpha_lo);
        continue;
      }
      all_boundary = false;
      roots.push_back(bisect_root(curve, alpha_lo, 1.0, threshold, tol));
    }
    cert.feasible = all_feasible;
    if (all_feasible) {
      cert.per_fold_alpha = roots;
      cert.alpha_hat = mean(roots);
      cert.boundary = all_boundary;
    }
    return cert;
  }

  // debiased_curve mode.
  const auto debiased = [&](double a) {
    const double w = fitted.evaluate(a).omega;
    cert.trace.push_back({-1, a, w});
    return w;
  };
  const auto plugin_aggregate = [&](double a) {
    const double w = fitted.evaluate_plugin_only(a).omega;
    cert.trace.push_back({-1, a, w});
    return w;
  };

  if (debiased(1.0) > threshold) {
    cert.feasible = false;
    return cert;
  }
  cert.feasible = true;
  if (debiased(alpha_lo) <= threshold) {
    cert.alpha_hat = alpha_lo;
    cert.boundary = true;
    return cert;
  }

  // Bracket on the monotone plug-in aggregate, when it brackets at all.
  double pivot = 1.0;
  if (plugin_aggregate(alpha_lo) > threshold && plugin_aggregate(1.0) <= threshold) {
    pivot = bisect_root(plugin_aggregate, alpha_lo, 1.0, threshold, tol);
  }

  // Local refinement on the debiased curve around the plug-in root. The scan
  // ends at alpha = 1 in the worst case, where feasibility is already known.
  const double start = std::max(alpha_lo, pivot - 10.0 * tol);
  double root = 1.0;
  for (double a = start;; a += tol) {
    if (a >= 1.0) break;
    if (debiased(a) <= threshold) {
      root = a;
      break;
    }
  }
  cert.alpha_hat = root;
  cert.boundary = false;
  return cert;
}

RelativeErrorBound certificate_error_bound(std::span<const double> fold_mu, double alpha_hat,
                                           double alpha_floor, double u_delta) {
  if (fold_mu.empty()) throw ValidationError("fold predictions are empty");
  if (!(alpha_floor > 0.0 && alpha_floor <= 1.0)) {
    throw ValidationError("alpha_floor must lie in (0, 1]");
  }
  if (!(alpha_hat > 0.0 && alpha_hat <= 1.0)) {
    throw ValidationError("alpha_hat must lie in (0, 1]");
  }
  if (!(u_delta >= 0.0)) throw ValidationError("u_delta must be nonnegative");

  const double level = std::min(alpha_floor, alpha_hat);
  const double q = empirical_quantile(fold_mu, 1.0 - level, QuantileKind::lower);
  std::vector<double> gaps(fold_mu.size());
  for (std::size_t i = 0; i < fold_mu.size(); ++i) {
    gaps[i] = std::max(fold_mu[i] - q, 0.0);
  }
  const double denom = mean(gaps);
  if (denom <= 0.0) {
    return {std::numeric_limits<double>::infinity(), true};
  }
  return {u_delta / denom, false};
}

}  // namespace subpop
