#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "subpop/dataset.hpp"

namespace subpop {

/// Synthetic binary-classification benchmark with a planted hard minority:
/// X ~ N(0, I_d); labels follow a fixed linear rule except on the rare slice
/// X1 > clip, where they flip; the evaluated model is a fixed linear scorer
/// under hinge loss; the attribute is X1 alone. Both the scorer and the label
/// rule are seed-derived unit vectors so every quantity is reproducible.
struct SimConfig {
  int d = 5;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  double clip = 1.645;  // 95th percentile of N(0,1); ~5% of rows flip
  double alpha = 0.3;
  std::size_t oracle_outer = 20000;
  std::size_t oracle_inner = 5000;
};

void validate(const SimConfig& cfg);

/// The (scorer, label-rule) unit-vector pair for a seed; the dataset and the
/// oracle share it, so an estimate and its ground truth always refer to the
/// same planted model.
std::pair<std::vector<double>, std::vector<double>> planted_vectors(int d,
                                                                    std::uint64_t seed);

/// Draws cfg.n rows: columns loss and z0 = X1.
Dataset simulate_dataset(const SimConfig& cfg);

struct OracleEstimate {
  double value = 0.0;      // worst-case subpopulation performance at cfg.alpha
  double std_error = 0.0;  // first-order Monte-Carlo standard error
  double mean_mu = 0.0;    // population mean loss (the alpha = 1 value)
  std::size_t outer = 0;
  std::size_t inner = 0;
  double alpha = 0.0;
};

/// Nested Monte-Carlo ground truth: outer draws of X1, each conditional risk
/// averaged over inner draws of the remaining coordinates, then the tail
/// average of those conditional risks. Inner loops run on per-task substreams
/// and may execute concurrently without changing the result.
OracleEstimate oracle_true_w(const SimConfig& cfg);

}  // namespace subpop
