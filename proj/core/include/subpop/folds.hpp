#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace subpop {

/// Uniformly shuffled K-fold partition of [0, n). Fold sizes differ by at
/// most one and the assignment is a pure function of (n, K, seed).
class FoldPartition {
 public:
  FoldPartition() = default;  // empty; assign from make()

  static FoldPartition make(std::size_t n, int k_folds, std::uint64_t seed);

  int fold_count() const { return k_folds_; }
  std::size_t size() const { return assignment_.size(); }
  std::uint64_t seed() const { return seed_; }

  int fold_of(std::size_t i) const { return assignment_[i]; }
  const std::vector<int>& assignment() const { return assignment_; }

  /// Row indices of fold k, in increasing order.
  const std::vector<std::size_t>& fold_indices(int k) const { return by_fold_[k]; }

  /// Row indices outside fold k, in increasing order.
  std::vector<std::size_t> complement_indices(int k) const;

 private:
  int k_folds_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<int> assignment_;
  std::vector<std::vector<std::size_t>> by_fold_;
};

/// Convenience alias for the factory.
inline FoldPartition make_folds(std::size_t n, int k_folds, std::uint64_t seed) {
  return FoldPartition::make(n, k_folds, seed);
}

}  // namespace subpop
