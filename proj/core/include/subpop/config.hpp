#pragma once

#include <cstdint>

#include "subpop/dataset.hpp"
#include "subpop/learners.hpp"

namespace subpop {

/// Everything the cross-fitted evaluation needs besides the data.
struct EvalConfig {
  double alpha = 0.3;   // smallest subpopulation fraction, in (0, 1]
  int k_folds = 5;
  double delta = 0.05;  // two-sided CI significance, in (0, 1)
  LearnerKind learner = LearnerKind::boosted_stumps;
  LearnerParams params{};
  std::uint64_t seed = 0;
};

/// Throws ValidationError on any violated precondition, including
/// learner/external-mu mismatches and n < 2K.
void validate_config(const Dataset& ds, const EvalConfig& cfg);

}  // namespace subpop
