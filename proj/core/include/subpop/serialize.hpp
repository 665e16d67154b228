#pragma once

#include <span>

#include "subpop/bounds.hpp"
#include "subpop/certificate.hpp"
#include "subpop/cvar.hpp"
#include "subpop/estimator.hpp"
#include "subpop/json.hpp"
#include "subpop/simulation.hpp"

namespace subpop {

/// Stable JSON field layouts for the result types. Each writes into an
/// already-open object so callers can append context (e.g. a run manifest).

void write_fields(JsonWriter& w, const WorstCaseEstimate& est);
void write_fields(JsonWriter& w, const Certificate& cert);
void write_fields(JsonWriter& w, const OracleEstimate& oracle);
void write_cvar_fields(JsonWriter& w, const EmpiricalCvarResult& r, double alpha,
                       std::size_t n);
void write_ucb_fields(JsonWriter& w, std::span<const DimFreeBound> bounds, double alpha,
                      std::size_t n, int k_folds);

}  // namespace subpop
