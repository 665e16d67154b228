#include "subpop/dataset.hpp"

#include <cmath>
#include <string>

#include "subpop/errors.hpp"

namespace subpop {

Dataset::Dataset(std::vector<double> losses, std::vector<double> z_flat, std::size_t dim,
                 std::optional<std::vector<double>> external_mu)
    : losses_(std::move(losses)),
      z_flat_(std::move(z_flat)),
      dim_(dim),
      external_mu_(std::move(external_mu)) {
  if (losses_.empty()) throw ValidationError("dataset is empty");
  if (dim_ < 1) throw ValidationError("attribute dimension must be at least 1");
  if (z_flat_.size() != losses_.size() * dim_) {
    throw ValidationError("attribute storage size does not match n * d");
  }
  min_loss_ = losses_[0];
  max_loss_ = losses_[0];
  for (std::size_t i = 0; i < losses_.size(); ++i) {
    const double l = losses_[i];
    if (!std::isfinite(l)) {
      throw ValidationError("non-finite loss at row " + std::to_string(i + 1));
    }
    if (l < 0.0) {
      throw ValidationError("negative loss at row " + std::to_string(i + 1));
    }
    min_loss_ = l < min_loss_ ? l : min_loss_;
    max_loss_ = l > max_loss_ ? l : max_loss_;
  }
  for (std::size_t i = 0; i < z_flat_.size(); ++i) {
    if (!std::isfinite(z_flat_[i])) {
      throw ValidationError("non-finite attribute at row " + std::to_string(i / dim_ + 1) +
                            ", column z" + std::to_string(i % dim_));
    }
  }
  if (external_mu_) {
    if (external_mu_->size() != losses_.size()) {
      throw ValidationError("mu_hat column length does not match the number of rows");
    }
    for (std::size_t i = 0; i < external_mu_->size(); ++i) {
      if (!std::isfinite((*external_mu_)[i])) {
        throw ValidationError("non-finite mu_hat at row " + std::to_string(i + 1));
      }
    }
  }
}

Dataset Dataset::from_samples(const std::vector<LossSample>& samples,
                              std::optional<std::vector<double>> external_mu) {
  if (samples.empty()) throw ValidationError("dataset is empty");
  const std::size_t d = samples.front().z.size();
  std::vector<double> losses;
  std::vector<double> z_flat;
  losses.reserve(samples.size());
  z_flat.reserve(samples.size() * d);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].z.size() != d) {
      throw ValidationError("row " + std::to_string(i + 1) + " has attribute dimension " +
                            std::to_string(samples[i].z.size()) + ", expected " +
                            std::to_string(d));
    }
    losses.push_back(samples[i].loss);
    z_flat.insert(z_flat.end(), samples[i].z.begin(), samples[i].z.end());
  }
  return Dataset(std::move(losses), std::move(z_flat), d, std::move(external_mu));
}

const std::vector<double>& Dataset::external_mu() const {
  if (!external_mu_) throw ValidationError("dataset has no mu_hat column");
  return *external_mu_;
}

LossSample Dataset::sample(std::size_t i) const {
  auto z = z_row(i);
  return LossSample{losses_[i], std::vector<double>(z.begin(), z.end())};
}

}  // namespace subpop
