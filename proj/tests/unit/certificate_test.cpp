#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "subpop/certificate.hpp"
#include "subpop/cvar.hpp"
#include "subpop/errors.hpp"
#include "subpop/estimator.hpp"
#include "subpop/rng.hpp"
#include "subpop/stats.hpp"

using namespace subpop;

namespace {

Dataset external_dataset(std::vector<double> losses, std::vector<double> mu) {
  std::vector<double> z(losses.size());
  std::iota(z.begin(), z.end(), 0.0);
  return Dataset(std::move(losses), std::move(z), 1, std::move(mu));
}

EvalConfig external_config(int k_folds = 2, std::uint64_t seed = 0) {
  EvalConfig cfg;
  cfg.k_folds = k_folds;
  cfg.learner = LearnerKind::external;
  cfg.seed = seed;
  return cfg;
}

// Lays out `values` so every fold of the deterministic partition receives one
// full copy; each per-fold curve then equals the curve of `values` itself.
Dataset stratified_dataset(const std::vector<double>& values, int k_folds,
                           std::uint64_t seed) {
  const std::size_t n = values.size() * static_cast<std::size_t>(k_folds);
  const auto part = make_folds(n, k_folds, seed);
  std::vector<double> mu(n), z(n);
  std::vector<std::size_t> cursor(k_folds, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const int k = part.fold_of(i);
    mu[i] = values[cursor[k]++];
    z[i] = static_cast<double>(i);
  }
  return Dataset(mu, z, 1, mu);  // loss = mu: zero residuals
}

// Independent root finder: first alpha on a fine grid with W(alpha) <= thr.
double scan_root(std::span<const double> mu, double threshold, double alpha_lo,
                 double step) {
  for (double a = alpha_lo; a <= 1.0 + 1e-12; a += step) {
    const double capped = std::min(a, 1.0);
    if (empirical_cvar(mu, capped).value <= threshold) return capped;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

TEST_CASE("constant losses: threshold above is boundary, below is infeasible") {
  std::vector<double> c(40, 2.0);
  const Dataset ds = external_dataset(c, c);
  const auto cfg = external_config();

  const auto ok = certify(ds, cfg, 2.5, 0.05, 1e-3, CertificateMode::plugin_per_fold);
  CHECK(ok.feasible);
  CHECK(ok.boundary);
  CHECK(ok.alpha_hat == 0.05);

  const auto bad = certify(ds, cfg, 1.5, 0.05, 1e-3, CertificateMode::plugin_per_fold);
  CHECK_FALSE(bad.feasible);
}

TEST_CASE("staircase yields the top-quartile crossing") {
  std::vector<double> stairs(100);
  std::iota(stairs.begin(), stairs.end(), 1.0);  // 1..100
  double top25 = 0.0;
  for (int v = 76; v <= 100; ++v) top25 += v;
  top25 /= 25.0;  // = 88.5... the curve hits it exactly at alpha = 0.25

  const Dataset ds = stratified_dataset(stairs, 2, 3);
  const auto cert =
      certify(ds, external_config(2, 3), top25, 0.01, 1e-3, CertificateMode::plugin_per_fold);
  REQUIRE(cert.feasible);
  CHECK(std::fabs(cert.alpha_hat - 0.25) <= 1e-3);
  REQUIRE(cert.per_fold_alpha.size() == 2);
  for (double a : cert.per_fold_alpha) CHECK(std::fabs(a - 0.25) <= 1e-3);
}

TEST_CASE("bisection matches a linear scan on random curves") {
  Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 120 + rng.below(200);
    std::vector<double> mu(n);
    for (auto& m : mu) m = 10.0 * rng.uniform01();
    const Dataset ds = external_dataset(mu, mu);

    const double threshold =
        empirical_cvar(mu, 0.05 + 0.9 * rng.uniform01()).value + 0.05 * rng.uniform01();
    const double tol = 1e-3;
    const auto cfg = external_config(2, trial);
    const auto cert = certify(ds, cfg, threshold, 0.01, tol, CertificateMode::plugin_per_fold);
    REQUIRE(cert.feasible);

    // scan each fold's own curve with step tol/10 and average the roots
    const CrossFitModel fitted(ds, cfg);
    double scan_sum = 0.0;
    for (int k = 0; k < 2; ++k) {
      const double root = scan_root(fitted.fold_mu(k), threshold, 0.01, tol / 10.0);
      REQUIRE(std::isfinite(root));
      scan_sum += root;
    }
    CHECK(std::fabs(cert.alpha_hat - scan_sum / 2.0) <= tol);
  }
}

TEST_CASE("raising the threshold never raises alpha_hat") {
  Rng rng(32);
  std::vector<double> mu(150);
  for (auto& m : mu) m = 5.0 * rng.uniform01();
  const Dataset ds = external_dataset(mu, mu);
  const auto cfg = external_config(2, 1);
  double prev = 1.0;
  // start safely above every per-fold mean so the whole family is feasible
  const double w_mean = empirical_cvar(mu, 1.0).value;
  for (double bump : {0.15, 0.3, 0.6, 1.0, 1.5}) {
    const auto cert = certify(ds, cfg, w_mean + bump, 0.01, 1e-3,
                              CertificateMode::plugin_per_fold);
    REQUIRE(cert.feasible);
    CHECK(cert.alpha_hat <= prev + 1e-12);
    prev = cert.alpha_hat;
  }
}

TEST_CASE("trace probes are monotone along each fold's curve") {
  Rng rng(33);
  std::vector<double> mu(200);
  for (auto& m : mu) m = 3.0 * rng.uniform01();
  const Dataset ds = external_dataset(mu, mu);
  const auto cert = certify(ds, external_config(2, 4), empirical_cvar(mu, 0.4).value, 0.01,
                            1e-3, CertificateMode::plugin_per_fold);
  for (int k = 0; k < 2; ++k) {
    for (const auto& a : cert.trace) {
      if (a.fold != k) continue;
      for (const auto& b : cert.trace) {
        if (b.fold != k || a.alpha >= b.alpha) continue;
        CHECK(a.w >= b.w - 1e-12);
      }
    }
  }
  // invariant at the root: curve(alpha_hat) <= thr < curve(alpha_hat - tol)
  const CrossFitModel fitted(ds, external_config(2, 4));
  for (int k = 0; k < 2; ++k) {
    const double root = cert.per_fold_alpha[k];
    CHECK(empirical_cvar(fitted.fold_mu(k), root).value <= cert.threshold);
    if (root > cert.alpha_lo + cert.tol) {
      CHECK(empirical_cvar(fitted.fold_mu(k), root - cert.tol).value > cert.threshold);
    }
  }
}

TEST_CASE("debiased mode tracks the plug-in mode when corrections vanish") {
  Rng rng(34);
  std::vector<double> mu(400);
  for (auto& m : mu) m = 4.0 * rng.uniform01();
  const Dataset ds = external_dataset(mu, mu);  // loss = mu -> corrections 0
  const double threshold = empirical_cvar(mu, 0.35).value;
  const auto plugin =
      certify(ds, external_config(2, 6), threshold, 0.01, 1e-3,
              CertificateMode::plugin_per_fold);
  const auto debiased =
      certify(ds, external_config(2, 6), threshold, 0.01, 1e-3,
              CertificateMode::debiased_curve);
  REQUIRE(plugin.feasible);
  REQUIRE(debiased.feasible);
  // the two aggregations (mean of roots vs root of the mean curve) agree up
  // to fold-sampling wobble on a smooth enough curve
  CHECK(std::fabs(plugin.alpha_hat - debiased.alpha_hat) < 0.05);
  CHECK(debiased.per_fold_alpha.empty());
  for (const auto& probe : debiased.trace) CHECK(probe.fold == -1);
}

TEST_CASE("debiased mode flags boundary and infeasible thresholds") {
  std::vector<double> c(30, 1.0);
  const Dataset ds = external_dataset(c, c);
  const auto hi = certify(ds, external_config(), 2.0, 0.05, 1e-3,
                          CertificateMode::debiased_curve);
  CHECK(hi.feasible);
  CHECK(hi.boundary);
  CHECK(hi.alpha_hat == 0.05);
  const auto lo = certify(ds, external_config(), 0.5, 0.05, 1e-3,
                          CertificateMode::debiased_curve);
  CHECK_FALSE(lo.feasible);
}

TEST_CASE("certify validates bracket and tolerance") {
  std::vector<double> c(30, 1.0);
  const Dataset ds = external_dataset(c, c);
  const auto cfg = external_config();
  CHECK_THROWS_AS(certify(ds, cfg, 1.0, 0.0, 1e-3, CertificateMode::plugin_per_fold),
                  ValidationError);
  CHECK_THROWS_AS(certify(ds, cfg, 1.0, 1.0, 1e-3, CertificateMode::plugin_per_fold),
                  ValidationError);
  CHECK_THROWS_AS(certify(ds, cfg, 1.0, 0.05, 0.0, CertificateMode::plugin_per_fold),
                  ValidationError);
  CHECK_THROWS_AS(certify(ds, cfg, std::numeric_limits<double>::infinity(), 0.05, 1e-3,
                          CertificateMode::plugin_per_fold),
                  ValidationError);
}

TEST_CASE("default bracket floor keeps ten tail points") {
  CHECK(default_alpha_lo(100) == doctest::Approx(0.1));
  CHECK(default_alpha_lo(10000) == doctest::Approx(0.01));
  CHECK(default_alpha_lo(1000000) == doctest::Approx(0.01));
}

TEST_CASE("relative certificate error bound") {
  CHECK(certificate_error_bound(std::vector<double>{1, 2, 3, 4}, 0.5, 0.5, 0.0).value == 0.0);

  const auto vac = certificate_error_bound(std::vector<double>{2, 2, 2}, 0.5, 0.5, 1.0);
  CHECK(vac.vacuous);
  CHECK(std::isinf(vac.value));

  // mu = {0,0,2,2}, level 0.5 -> q = 0 (lower quantile), mean gap = 1
  const auto r = certificate_error_bound(std::vector<double>{0, 0, 2, 2}, 0.7, 0.5, 1.0);
  CHECK_FALSE(r.vacuous);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(certificate_error_bound({}, 0.5, 0.5, 1.0), ValidationError);
  CHECK_THROWS_AS(certificate_error_bound(std::vector<double>{1.0}, 0.5, 0.0, 1.0),
                  ValidationError);
  CHECK_THROWS_AS(certificate_error_bound(std::vector<double>{1.0}, 0.5, 0.5, -1.0),
                  ValidationError);
}
