#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "subpop/dataset.hpp"
#include "subpop/errors.hpp"
#include "subpop/learners.hpp"
#include "subpop/rng.hpp"
#include "subpop/stats.hpp"

using namespace subpop;

namespace {

std::vector<std::size_t> all_rows(const Dataset& ds) {
  std::vector<std::size_t> rows(ds.size());
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

Dataset step_function_data(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> losses(n), z(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = 2.0 * rng.uniform01() - 1.0;
    losses[i] = z[i] > 0.0 ? 1.0 : 0.0;
  }
  return Dataset(std::move(losses), std::move(z), 1);
}

}  // namespace

TEST_CASE("knn with k=1 memorizes distinct training points") {
  std::vector<double> losses = {0.1, 0.7, 0.3, 0.9};
  std::vector<double> z = {-1.0, 0.0, 1.0, 2.0};
  const Dataset ds(losses, z, 1);
  LearnerParams params;
  params.knn.k_neighbors = 1;
  const auto model = fit_conditional_risk(ds, all_rows(ds), params, LearnerKind::knn);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(model.predict_row(ds, i) == ds.loss(i));
  }
  CHECK(mse_on(model, ds, all_rows(ds)) == 0.0);
}

TEST_CASE("constant-loss data yields the constant under every learner") {
  std::vector<double> losses(20, 3.25);
  std::vector<double> z(20);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = static_cast<double>(i);
  const Dataset ds(losses, z, 1);
  for (auto kind : {LearnerKind::knn, LearnerKind::boosted_stumps}) {
    const auto model = fit_conditional_risk(ds, all_rows(ds), {}, kind);
    CHECK(model.predict(std::vector<double>{4.5}) == 3.25);
    CHECK(model.predict(std::vector<double>{-100.0}) == 3.25);
  }
}

TEST_CASE("boosted stumps nail a step function") {
  const auto ds = step_function_data(400, 7);
  LearnerParams params;
  params.boost.rounds = 50;
  params.boost.learning_rate = 0.3;
  const auto model = fit_conditional_risk(ds, all_rows(ds), params, LearnerKind::boosted_stumps);
  CHECK(mse_on(model, ds, all_rows(ds)) <= 0.01);
  CHECK(model.predict(std::vector<double>{2.0}) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(min_class_mse(ds, all_rows(ds), params, LearnerKind::boosted_stumps) <= 0.01);
}

TEST_CASE("knn with k equal to the slice size predicts the mean everywhere") {
  Rng rng(9);
  std::vector<double> losses(30), z(30);
  for (std::size_t i = 0; i < 30; ++i) {
    losses[i] = rng.uniform01();
    z[i] = rng.normal();
  }
  const Dataset ds(losses, z, 1);
  LearnerParams params;
  params.knn.k_neighbors = 30;
  const auto model = fit_conditional_risk(ds, all_rows(ds), params, LearnerKind::knn);
  const double m = mean(ds.losses());
  for (double q : {-3.0, 0.0, 42.0}) {
    CHECK(model.predict(std::vector<double>{q}) == doctest::Approx(m).epsilon(1e-12));
  }
}

TEST_CASE("fits are deterministic bit for bit") {
  Rng rng(11);
  std::vector<double> losses(200), z(400);
  for (auto& l : losses) l = rng.uniform01() * 3.0;
  for (auto& x : z) x = rng.normal();
  const Dataset ds(losses, z, 2);
  const auto rows = all_rows(ds);
  for (auto kind : {LearnerKind::knn, LearnerKind::boosted_stumps}) {
    const auto a = fit_conditional_risk(ds, rows, {}, kind);
    const auto b = fit_conditional_risk(ds, rows, {}, kind);
    Rng probe(12);
    for (int i = 0; i < 50; ++i) {
      const std::vector<double> q = {probe.normal(), probe.normal()};
      CHECK(a.predict(q) == b.predict(q));
    }
  }
}

TEST_CASE("boosting training error is nonincreasing in rounds") {
  const std::size_t n = 150;
  Rng rng(13);
  std::vector<double> losses(n), z(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = rng.normal();
    losses[i] = std::fabs(z[i]) + 0.3 * rng.uniform01();
  }
  const Dataset ds(losses, z, 1);
  const auto rows = all_rows(ds);
  double prev = 1e300;
  for (int rounds : {1, 2, 4, 8, 16, 32, 64}) {
    LearnerParams params;
    params.boost.rounds = rounds;
    const auto model = fit_conditional_risk(ds, rows, params, LearnerKind::boosted_stumps);
    const double err = mse_on(model, ds, rows);
    CHECK(err <= prev + 1e-12);
    prev = err;
  }
}

TEST_CASE("predictions are clamped to the training loss range") {
  // A strong linear trend tempts extrapolation beyond the observed losses.
  std::vector<double> losses, z;
  for (int i = 0; i < 50; ++i) {
    losses.push_back(static_cast<double>(i));
    z.push_back(static_cast<double>(i));
  }
  const Dataset ds(losses, z, 1);
  for (auto kind : {LearnerKind::knn, LearnerKind::boosted_stumps}) {
    const auto model = fit_conditional_risk(ds, all_rows(ds), {}, kind);
    CHECK(model.predict(std::vector<double>{1e6}) <= 49.0);
    CHECK(model.predict(std::vector<double>{-1e6}) >= 0.0);
  }
}

TEST_CASE("identical attributes force the mean and bound min_class_mse") {
  // two-point slice: same z, losses {0, 2} -> any least-squares fit gives 1
  const Dataset ds({0.0, 2.0}, {0.0, 0.0}, 1);
  const auto rows = all_rows(ds);
  for (auto kind : {LearnerKind::knn, LearnerKind::boosted_stumps}) {
    CHECK(min_class_mse(ds, rows, {}, kind) == doctest::Approx(1.0).epsilon(1e-12));
  }
  LearnerParams k1;
  k1.knn.k_neighbors = 1;  // distance ties are averaged, so k=1 agrees
  CHECK(min_class_mse(ds, rows, k1, LearnerKind::knn) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("external models look up by row and refuse attribute queries") {
  const Dataset ds({1.0, 2.0}, {0.0, 1.0}, 1, std::vector<double>{0.5, 1.5});
  const auto model = external_risk_model(ds);
  CHECK(model.predict_row(ds, 0) == 0.5);
  CHECK(model.predict_row(ds, 1) == 1.5);
  CHECK_THROWS_AS(model.predict(std::vector<double>{0.0}), ValidationError);
  CHECK_THROWS_AS(model.predict_row(ds, 2), ValidationError);

  const Dataset no_mu({1.0, 2.0}, {0.0, 1.0}, 1);
  CHECK_THROWS_AS(external_risk_model(no_mu), ValidationError);
}

TEST_CASE("fit preconditions are enforced") {
  const Dataset ds({1.0, 2.0, 3.0}, {0.0, 1.0, 2.0}, 1);
  const auto rows = all_rows(ds);
  LearnerParams params;
  params.knn.k_neighbors = 4;
  CHECK_THROWS_AS(fit_conditional_risk(ds, rows, params, LearnerKind::knn), ValidationError);
  CHECK_THROWS_AS(fit_conditional_risk(ds, {}, {}, LearnerKind::knn), ValidationError);
  CHECK_THROWS_AS(fit_conditional_risk(ds, rows, {}, LearnerKind::external), ValidationError);

  const auto model = fit_conditional_risk(ds, rows, {}, LearnerKind::knn);
  CHECK_THROWS_AS(model.predict(std::vector<double>{0.0, 1.0}), ValidationError);

  LearnerParams bad;
  bad.boost.max_depth = 4;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = {};
  bad.boost.learning_rate = 0.0;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = {};
  bad.boost.n_bins = 1;
  CHECK_THROWS_AS(validate(bad), ValidationError);
}
