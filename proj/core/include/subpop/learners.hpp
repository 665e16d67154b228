#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "subpop/dataset.hpp"

namespace subpop {

enum class LearnerKind { knn, boosted_stumps, external };

std::string_view to_string(LearnerKind kind);
LearnerKind learner_from_string(std::string_view name);

struct KnnParams {
  int k_neighbors = 0;  // 0 = auto: ceil(sqrt(|train|))
};

struct BoostParams {
  int rounds = 200;
  double learning_rate = 0.1;
  int max_depth = 2;  // in {1, 2, 3}
  int n_bins = 64;
};

struct LearnerParams {
  KnnParams knn{};
  BoostParams boost{};
};

void validate(const LearnerParams& params);

namespace detail {

struct KnnState {
  std::size_t dim = 0;
  int k = 1;
  std::vector<double> center;     // per-coordinate training mean
  std::vector<double> inv_scale;  // 1/sd, or 0 for constant coordinates
  std::vector<double> z;          // standardized, row-major
  std::vector<double> losses;
};

struct BoostNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct BoostState {
  std::size_t dim = 0;
  double base = 0.0;
  std::vector<std::vector<BoostNode>> trees;  // node 0 is each tree's root
};

struct ExternalState {
  std::shared_ptr<const std::vector<double>> mu;  // aligned with dataset rows
};

}  // namespace detail

/// A fitted conditional-risk predictor plus, once attached, the auxiliary
/// quantile threshold q_hat that defines the worst-case indicator. Fitted
/// learners clamp predictions to the training loss range; external models
/// look up precomputed predictions by row index.
class RiskModel {
 public:
  RiskModel() = default;  // empty; obtain real models from the factories below

  LearnerKind kind() const { return kind_; }
  std::size_t dim() const;

  /// Prediction at an attribute vector (knn / boosted only).
  double predict(std::span<const double> z) const;

  /// Prediction for a dataset row; works for every kind, including external.
  double predict_row(const Dataset& ds, std::size_t row) const;

  bool has_q_hat() const { return q_hat_.has_value(); }
  double q_hat() const;
  void set_q_hat(double q) { q_hat_ = q; }

  /// [min, max] training loss used for clamping (fitted kinds only).
  std::pair<double, double> clamp_range() const { return {clamp_lo_, clamp_hi_}; }

  friend RiskModel fit_conditional_risk(const Dataset&, std::span<const std::size_t>,
                                        const LearnerParams&, LearnerKind);
  friend RiskModel external_risk_model(const Dataset&);

 private:
  LearnerKind kind_ = LearnerKind::external;
  double clamp_lo_ = 0.0;
  double clamp_hi_ = 0.0;
  std::optional<double> q_hat_;
  std::variant<detail::KnnState, detail::BoostState, detail::ExternalState> state_;
};

/// Least-squares fit of the conditional risk on the given rows. Deterministic:
/// refitting on identical inputs reproduces every prediction bit-for-bit.
RiskModel fit_conditional_risk(const Dataset& ds, std::span<const std::size_t> rows,
                               const LearnerParams& params, LearnerKind kind);

/// Wraps Dataset.external_mu as a row-aligned model (no fitting).
RiskModel external_risk_model(const Dataset& ds);

/// Mean squared prediction error over the given rows.
double mse_on(const RiskModel& model, const Dataset& ds, std::span<const std::size_t> rows);

/// In-sample MSE of a fresh fit on the rows themselves: a computable proxy for
/// the best achievable MSE of the learner class on that slice.
double min_class_mse(const Dataset& ds, std::span<const std::size_t> rows,
                     const LearnerParams& params, LearnerKind kind);

}  // namespace subpop
