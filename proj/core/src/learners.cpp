#include "subpop/learners.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "subpop/errors.hpp"
#include "subpop/stats.hpp"

namespace subpop {

std::string_view to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::knn: return "knn";
    case LearnerKind::boosted_stumps: return "boosted_stumps";
    case LearnerKind::external: return "external";
  }
  return "?";
}

LearnerKind learner_from_string(std::string_view name) {
  if (name == "knn") return LearnerKind::knn;
  if (name == "boosted_stumps") return LearnerKind::boosted_stumps;
  if (name == "external") return LearnerKind::external;
  throw ValidationError("unknown learner '" + std::string(name) +
                        "' (expected knn, boosted_stumps or external)");
}

void validate(const LearnerParams& params) {
  if (params.knn.k_neighbors < 0) {
    throw ValidationError("k_neighbors must be >= 1 (or 0 for auto)");
  }
  const auto& b = params.boost;
  if (b.rounds < 1) throw ValidationError("boosting rounds must be >= 1");
  if (!(b.learning_rate > 0.0 && b.learning_rate <= 1.0)) {
    throw ValidationError("learning_rate must lie in (0, 1]");
  }
  if (b.max_depth < 1 || b.max_depth > 3) {
    throw ValidationError("max_depth must be 1, 2 or 3");
  }
  if (b.n_bins < 2) throw ValidationError("n_bins must be >= 2");
}

namespace {

using detail::BoostNode;
using detail::BoostState;
using detail::ExternalState;
using detail::KnnState;

KnnState fit_knn(const Dataset& ds, std::span<const std::size_t> rows, const KnnParams& p) {
  const std::size_t n = rows.size();
  const std::size_t d = ds.dim();
  KnnState state;
  state.dim = d;
  state.k = p.k_neighbors > 0
                ? p.k_neighbors
                : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  if (static_cast<std::size_t>(state.k) > n) {
    throw ValidationError("k_neighbors (" + std::to_string(state.k) +
                          ") exceeds the training slice size (" + std::to_string(n) + ")");
  }

  state.center.assign(d, 0.0);
  state.inv_scale.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    for (std::size_t r : rows) sum += ds.z_row(r)[j];
    const double m = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r : rows) {
      const double diff = ds.z_row(r)[j] - m;
      ss += diff * diff;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    state.center[j] = m;
    state.inv_scale[j] = sd > 0.0 ? 1.0 / sd : 0.0;
  }

  state.z.resize(n * d);
  state.losses.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto z = ds.z_row(rows[i]);
    for (std::size_t j = 0; j < d; ++j) {
      state.z[i * d + j] = (z[j] - state.center[j]) * state.inv_scale[j];
    }
    state.losses[i] = ds.loss(rows[i]);
  }
  return state;
}

double predict_knn(const KnnState& s, std::span<const double> z) {
  const std::size_t n = s.losses.size();
  const std::size_t d = s.dim;
  thread_local std::vector<double> query;
  thread_local std::vector<double> dist;
  thread_local std::vector<double> order;
  query.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    query[j] = (z[j] - s.center[j]) * s.inv_scale[j];
  }

  dist.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d2 = 0.0;
    const double* zi = s.z.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = zi[j] - query[j];
      d2 += diff * diff;
    }
    dist[i] = d2;
  }

  double kth;
  if (static_cast<std::size_t>(s.k) >= n) {
    kth = std::numeric_limits<double>::infinity();
  } else if (s.k == 1) {
    kth = *std::min_element(dist.begin(), dist.end());
  } else {
    order.assign(dist.begin(), dist.end());
    std::nth_element(order.begin(), order.begin() + (s.k - 1), order.end());
    kth = order[s.k - 1];
  }

  // All points tied with the k-th distance participate; with duplicated
  // attribute values this averages the whole tie group, which is what makes
  // the predictor consistent on discrete attribute grids.
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (dist[i] <= kth) {
      sum += s.losses[i];
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

// --- histogram-split boosted trees --------------------------------------

struct FeatureBins {
  std::vector<double> edges;  // sorted cut values; bin(x) = #{edges < x} via lower_bound
};

int bin_of(const FeatureBins& fb, double x) {
  return static_cast<int>(std::lower_bound(fb.edges.begin(), fb.edges.end(), x) -
                          fb.edges.begin());
}

FeatureBins build_bins(std::vector<double> values, int n_bins) {
  FeatureBins fb;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  const std::size_t distinct = values.size();
  if (distinct < 2) return fb;  // constant feature: nothing to split on
  if (distinct <= static_cast<std::size_t>(n_bins)) {
    fb.edges.reserve(distinct - 1);
    for (std::size_t i = 0; i + 1 < distinct; ++i) {
      fb.edges.push_back(values[i] + (values[i + 1] - values[i]) / 2.0);
    }
    return fb;
  }
  // Quantile cuts over the distinct values, midpointed with the next one.
  fb.edges.reserve(n_bins - 1);
  for (int j = 1; j < n_bins; ++j) {
    const std::size_t r = (static_cast<std::size_t>(j) * distinct) / n_bins;
    if (r + 1 >= distinct) break;
    const double edge = values[r] + (values[r + 1] - values[r]) / 2.0;
    if (fb.edges.empty() || edge > fb.edges.back()) fb.edges.push_back(edge);
  }
  return fb;
}

struct TreeBuilder {
  const std::vector<FeatureBins>& bins;
  const std::vector<std::uint16_t>& sample_bins;  // n * d
  std::size_t d;
  int max_depth;
  double shrinkage;
  std::vector<double>& residual;       // by local sample id
  std::vector<std::size_t>& worklist;  // local sample ids, partitioned per node

  std::vector<BoostNode> nodes;

  // Builds the subtree over worklist[begin, end); returns the node id.
  int build(std::size_t begin, std::size_t end, int depth) {
    const int id = static_cast<int>(nodes.size());
    nodes.push_back({});
    const std::size_t count = end - begin;

    double total = 0.0;
    for (std::size_t i = begin; i < end; ++i) total += residual[worklist[i]];

    bool split_found = false;
    int best_feature = 0;
    int best_bin = 0;
    double best_gain = 0.0;
    if (depth < max_depth && count >= 2) {
      const double parent_score = total * total / static_cast<double>(count);
      for (std::size_t f = 0; f < d; ++f) {
        const std::size_t n_edges = bins[f].edges.size();
        if (n_edges == 0) continue;
        thread_local std::vector<double> bin_sum;
        thread_local std::vector<std::size_t> bin_count;
        bin_sum.assign(n_edges + 1, 0.0);
        bin_count.assign(n_edges + 1, 0);
        for (std::size_t i = begin; i < end; ++i) {
          const std::size_t local = worklist[i];
          const std::uint16_t b = sample_bins[local * d + f];
          bin_sum[b] += residual[local];
          bin_count[b] += 1;
        }
        double left_sum = 0.0;
        std::size_t left_count = 0;
        for (std::size_t b = 0; b < n_edges; ++b) {
          left_sum += bin_sum[b];
          left_count += bin_count[b];
          if (left_count == 0 || left_count == count) continue;
          const std::size_t right_count = count - left_count;
          const double right_sum = total - left_sum;
          const double gain = left_sum * left_sum / static_cast<double>(left_count) +
                              right_sum * right_sum / static_cast<double>(right_count) -
                              parent_score;
          if (gain > best_gain + 1e-12) {  // strict improvement; first wins ties
            best_gain = gain;
            best_feature = static_cast<int>(f);
            best_bin = static_cast<int>(b);
            split_found = true;
          }
        }
      }
    }

    if (!split_found) {
      nodes[id].feature = -1;
      nodes[id].value = shrinkage * total / static_cast<double>(count);
      return id;
    }

    // Stable two-pass partition keeps sample order deterministic.
    thread_local std::vector<std::size_t> scratch;
    scratch.clear();
    scratch.reserve(count);
    std::size_t mid = begin;
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t local = worklist[i];
      if (sample_bins[local * d + best_feature] <= static_cast<std::uint16_t>(best_bin)) {
        worklist[mid++] = local;
      } else {
        scratch.push_back(local);
      }
    }
    std::copy(scratch.begin(), scratch.end(), worklist.begin() + mid);

    nodes[id].feature = best_feature;
    nodes[id].threshold = bins[best_feature].edges[best_bin];
    nodes[id].left = build(begin, mid, depth + 1);
    nodes[id].right = build(mid, end, depth + 1);
    return id;
  }
};

double tree_value(const std::vector<BoostNode>& nodes, std::span<const double> z) {
  int id = 0;
  while (nodes[id].feature >= 0) {
    id = z[nodes[id].feature] <= nodes[id].threshold ? nodes[id].left : nodes[id].right;
  }
  return nodes[id].value;
}

// Below this size the holdout would starve the fit; run all rounds instead.
constexpr std::size_t kMinSamplesForEarlyStop = 50;
constexpr std::size_t kHoldoutStride = 5;  // every 5th sample validates
constexpr int kEarlyStopPatience = 25;

BoostState fit_boosted(const Dataset& ds, std::span<const std::size_t> rows,
                       const BoostParams& p) {
  const std::size_t n = rows.size();
  const std::size_t d = ds.dim();
  BoostState state;
  state.dim = d;

  // Validated early stopping: squared-loss boosting run to many rounds
  // interpolates per-bin sample means, and that estimation noise leaks into
  // the downstream tail statistics. A deterministic positional holdout
  // (rows are already shuffled by the fold assignment) stops the fit once
  // held-out error stalls. p.rounds stays the upper limit.
  const bool early_stop = n >= kMinSamplesForEarlyStop;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> val_rows;
  if (early_stop) {
    train_rows.reserve(n - n / kHoldoutStride);
    val_rows.reserve(n / kHoldoutStride + 1);
    for (std::size_t i = 0; i < n; ++i) {
      (i % kHoldoutStride == 0 ? val_rows : train_rows).push_back(rows[i]);
    }
  } else {
    train_rows.assign(rows.begin(), rows.end());
  }
  const std::size_t n_train = train_rows.size();

  std::vector<double> losses(n_train);
  for (std::size_t i = 0; i < n_train; ++i) losses[i] = ds.loss(train_rows[i]);
  state.base = mean(losses);

  std::vector<FeatureBins> bins(d);
  std::vector<double> column(n_train);
  for (std::size_t f = 0; f < d; ++f) {
    for (std::size_t i = 0; i < n_train; ++i) column[i] = ds.z_row(train_rows[i])[f];
    bins[f] = build_bins(column, p.n_bins);
  }

  std::vector<std::uint16_t> sample_bins(n_train * d);
  for (std::size_t i = 0; i < n_train; ++i) {
    const auto z = ds.z_row(train_rows[i]);
    for (std::size_t f = 0; f < d; ++f) {
      sample_bins[i * d + f] = static_cast<std::uint16_t>(bin_of(bins[f], z[f]));
    }
  }

  std::vector<double> residual(n_train);
  for (std::size_t i = 0; i < n_train; ++i) residual[i] = losses[i] - state.base;

  std::vector<double> val_residual(val_rows.size());
  for (std::size_t i = 0; i < val_rows.size(); ++i) {
    val_residual[i] = ds.loss(val_rows[i]) - state.base;
  }

  std::vector<std::size_t> worklist(n_train);
  state.trees.reserve(p.rounds);
  double best_val_sse = std::numeric_limits<double>::infinity();
  int best_round = 0;
  int stale_rounds = 0;
  for (int round = 0; round < p.rounds; ++round) {
    for (std::size_t i = 0; i < n_train; ++i) worklist[i] = i;
    TreeBuilder builder{bins, sample_bins, d, p.max_depth, p.learning_rate, residual,
                        worklist, {}};
    builder.build(0, n_train, 0);
    for (std::size_t i = 0; i < n_train; ++i) {
      residual[i] -= tree_value(builder.nodes, ds.z_row(train_rows[i]));
    }
    state.trees.push_back(std::move(builder.nodes));

    if (early_stop) {
      double val_sse = 0.0;
      for (std::size_t i = 0; i < val_rows.size(); ++i) {
        val_residual[i] -= tree_value(state.trees.back(), ds.z_row(val_rows[i]));
        val_sse += val_residual[i] * val_residual[i];
      }
      if (val_sse < best_val_sse * (1.0 - 1e-12)) {
        best_val_sse = val_sse;
        best_round = round + 1;
        stale_rounds = 0;
      } else if (++stale_rounds >= kEarlyStopPatience) {
        break;
      }
    }
  }
  if (early_stop) {
    state.trees.resize(best_round);
  }
  return state;
}

double predict_boosted(const BoostState& s, std::span<const double> z) {
  double out = s.base;
  for (const auto& tree : s.trees) out += tree_value(tree, z);
  return out;
}

}  // namespace

std::size_t RiskModel::dim() const {
  if (const auto* knn = std::get_if<KnnState>(&state_)) return knn->dim;
  if (const auto* boost = std::get_if<BoostState>(&state_)) return boost->dim;
  return 0;
}

double RiskModel::predict(std::span<const double> z) const {
  if (kind_ == LearnerKind::external) {
    throw ValidationError("external risk models predict by row index, not by attributes");
  }
  if (z.size() != dim()) {
    throw ValidationError("attribute vector has dimension " + std::to_string(z.size()) +
                          ", model expects " + std::to_string(dim()));
  }
  const double raw = kind_ == LearnerKind::knn ? predict_knn(std::get<KnnState>(state_), z)
                                               : predict_boosted(std::get<BoostState>(state_), z);
  return std::clamp(raw, clamp_lo_, clamp_hi_);
}

double RiskModel::predict_row(const Dataset& ds, std::size_t row) const {
  if (kind_ == LearnerKind::external) {
    const auto& mu_ptr = std::get<ExternalState>(state_).mu;
    if (!mu_ptr) throw std::logic_error("risk model is empty");
    const auto& mu = *mu_ptr;
    if (row >= mu.size()) {
      throw ValidationError("row " + std::to_string(row) +
                            " is outside the external model's alignment (n = " +
                            std::to_string(mu.size()) + ")");
    }
    return mu[row];
  }
  return predict(ds.z_row(row));
}

double RiskModel::q_hat() const {
  if (!q_hat_) throw std::logic_error("q_hat has not been attached to this model");
  return *q_hat_;
}

RiskModel fit_conditional_risk(const Dataset& ds, std::span<const std::size_t> rows,
                               const LearnerParams& params, LearnerKind kind) {
  validate(params);
  if (kind == LearnerKind::external) {
    throw ValidationError("external models are wrapped, not fitted; use external_risk_model");
  }
  if (rows.empty()) throw ValidationError("training slice is empty");

  RiskModel model;
  model.kind_ = kind;
  model.clamp_lo_ = std::numeric_limits<double>::infinity();
  model.clamp_hi_ = -std::numeric_limits<double>::infinity();
  for (std::size_t r : rows) {
    model.clamp_lo_ = std::min(model.clamp_lo_, ds.loss(r));
    model.clamp_hi_ = std::max(model.clamp_hi_, ds.loss(r));
  }
  if (kind == LearnerKind::knn) {
    model.state_ = fit_knn(ds, rows, params.knn);
  } else {
    model.state_ = fit_boosted(ds, rows, params.boost);
  }
  return model;
}

RiskModel external_risk_model(const Dataset& ds) {
  if (!ds.has_external_mu()) {
    throw ValidationError("learner 'external' requires a mu_hat column in the dataset");
  }
  RiskModel model;
  model.kind_ = LearnerKind::external;
  model.state_ = ExternalState{
      std::make_shared<const std::vector<double>>(ds.external_mu())};
  return model;
}

double mse_on(const RiskModel& model, const Dataset& ds, std::span<const std::size_t> rows) {
  if (rows.empty()) throw ValidationError("evaluation slice is empty");
  std::vector<double> sq(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double r = ds.loss(rows[i]) - model.predict_row(ds, rows[i]);
    sq[i] = r * r;
  }
  return mean(sq);
}

double min_class_mse(const Dataset& ds, std::span<const std::size_t> rows,
                     const LearnerParams& params, LearnerKind kind) {
  const RiskModel refit = fit_conditional_risk(ds, rows, params, kind);
  return mse_on(refit, ds, rows);
}

}  // namespace subpop
