#include "subpop/serialize.hpp"

namespace subpop {

void write_fields(JsonWriter& w, const WorstCaseEstimate& est) {
  w.field("alpha", est.alpha);
  w.field("omega", est.omega);
  w.field("sigma", est.sigma);
  w.key("ci").begin_array().value(est.ci_low).value(est.ci_high).end_array();
  w.field("n", est.n);
  w.field("K", est.k_folds);
  w.field("delta", est.delta);
  w.key("folds").begin_array();
  for (const auto& f : est.folds) {
    w.begin_object();
    w.field("k", f.k);
    w.field("omega_k", f.omega_k);
    w.field("sigma2_k", f.sigma2_k);
    w.field("plug_in_k", f.plug_in_k);
    w.field("correction_k", f.correction_k);
    w.field("q_hat_k", f.q_hat_k);
    w.end_object();
  }
  w.end_array();
}

void write_fields(JsonWriter& w, const Certificate& cert) {
  w.field("threshold", cert.threshold);
  if (cert.feasible) {
    w.field("alpha_hat", cert.alpha_hat);
  } else {
    w.field("alpha_hat", "infeasible");
  }
  w.field("boundary", cert.boundary);
  w.field("mode", to_string(cert.mode));
  w.field("alpha_lo", cert.alpha_lo);
  w.field("tol", cert.tol);
  w.key("trace").begin_array();
  for (const auto& probe : cert.trace) {
    w.begin_array().value(probe.alpha).value(probe.w).end_array();
  }
  w.end_array();
  w.key("per_fold_alpha").begin_array();
  for (double a : cert.per_fold_alpha) w.value(a);
  w.end_array();
}

void write_fields(JsonWriter& w, const OracleEstimate& oracle) {
  w.field("value", oracle.value);
  w.field("std_error", oracle.std_error);
  w.field("mean_mu", oracle.mean_mu);
  w.field("alpha", oracle.alpha);
  w.field("outer", oracle.outer);
  w.field("inner", oracle.inner);
}

void write_cvar_fields(JsonWriter& w, const EmpiricalCvarResult& r, double alpha,
                       std::size_t n) {
  w.field("value", r.value);
  w.field("eta_star", r.eta_star);
  w.field("eta_upper", r.eta_upper);
  w.field("alpha", alpha);
  w.field("n", n);
}

void write_ucb_fields(JsonWriter& w, std::span<const DimFreeBound> bounds, double alpha,
                      std::size_t n, int k_folds) {
  w.field("alpha", alpha);
  w.field("n", n);
  w.field("K", k_folds);
  w.key("folds").begin_array();
  for (const auto& b : bounds) {
    w.begin_object();
    w.field("k", b.k);
    w.field("omega_k", b.omega_k);
    w.field("excess_mse_term", b.excess_mse_term);
    w.field("misspec_budget", b.misspec_budget);
    w.field("concentration_term", b.concentration_term);
    w.field("ucb", b.ucb);
    w.field("C", b.c_constant);
    w.field("M", b.loss_bound);
    w.field("delta", b.delta);
    w.end_object();
  }
  w.end_array();
}

}  // namespace subpop
