#include "subpop/folds.hpp"

#include <string>

#include "subpop/errors.hpp"
#include "subpop/rng.hpp"

namespace subpop {

FoldPartition FoldPartition::make(std::size_t n, int k_folds, std::uint64_t seed) {
  if (k_folds < 2) {
    throw ValidationError("fold count must be at least 2, got " + std::to_string(k_folds));
  }
  if (static_cast<std::size_t>(k_folds) > n) {
    throw ValidationError("fold count " + std::to_string(k_folds) + " exceeds sample count " +
                          std::to_string(n));
  }

  FoldPartition p;
  p.k_folds_ = k_folds;
  p.seed_ = seed;
  p.assignment_.reserve(n);

  // Balanced label multiset: the first n % K folds carry the extra sample.
  const std::size_t base = n / static_cast<std::size_t>(k_folds);
  const std::size_t extra = n % static_cast<std::size_t>(k_folds);
  for (int k = 0; k < k_folds; ++k) {
    const std::size_t count = base + (static_cast<std::size_t>(k) < extra ? 1 : 0);
    p.assignment_.insert(p.assignment_.end(), count, k);
  }

  // Fisher-Yates keyed by (n, K, seed).
  Rng rng = Rng::substream(seed, mix64(n) ^ mix64(static_cast<std::uint64_t>(k_folds)));
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = rng.below(i + 1);
    std::swap(p.assignment_[i], p.assignment_[j]);
  }

  p.by_fold_.assign(k_folds, {});
  for (int k = 0; k < k_folds; ++k) {
    p.by_fold_[k].reserve(base + 1);
  }
  for (std::size_t i = 0; i < n; ++i) {
    p.by_fold_[p.assignment_[i]].push_back(i);
  }
  return p;
}

std::vector<std::size_t> FoldPartition::complement_indices(int k) const {
  std::vector<std::size_t> out;
  out.reserve(assignment_.size() - by_fold_[k].size());
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    if (assignment_[i] != k) out.push_back(i);
  }
  return out;
}

}  // namespace subpop
