#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace subpop {

/// One observation: the realized loss of the evaluated model and the
/// attribute vector the subpopulations are defined over.
struct LossSample {
  double loss = 0.0;
  std::vector<double> z;
};

/// Immutable column store of loss samples. All entries are validated at
/// construction: losses finite and nonnegative, attributes finite, a common
/// attribute dimension d >= 1, and at least one row. An optional `external_mu`
/// column carries row-aligned conditional-risk predictions produced outside
/// this library.
class Dataset {
 public:
  Dataset(std::vector<double> losses, std::vector<double> z_flat, std::size_t dim,
          std::optional<std::vector<double>> external_mu = std::nullopt);

  static Dataset from_samples(const std::vector<LossSample>& samples,
                              std::optional<std::vector<double>> external_mu = std::nullopt);

  std::size_t size() const { return losses_.size(); }
  std::size_t dim() const { return dim_; }

  double loss(std::size_t i) const { return losses_[i]; }
  std::span<const double> losses() const { return losses_; }

  std::span<const double> z_row(std::size_t i) const {
    return {z_flat_.data() + i * dim_, dim_};
  }
  std::span<const double> z_flat() const { return z_flat_; }

  bool has_external_mu() const { return external_mu_.has_value(); }
  const std::vector<double>& external_mu() const;

  LossSample sample(std::size_t i) const;

  double max_loss() const { return max_loss_; }
  double min_loss() const { return min_loss_; }

 private:
  std::vector<double> losses_;
  std::vector<double> z_flat_;  // row-major, size() * dim()
  std::size_t dim_ = 0;
  std::optional<std::vector<double>> external_mu_;
  double min_loss_ = 0.0;
  double max_loss_ = 0.0;
};

}  // namespace subpop
