#include <doctest.h>

#include <cmath>
#include <vector>

#include "subpop/errors.hpp"
#include "subpop/rng.hpp"
#include "subpop/stats.hpp"

using namespace subpop;

TEST_CASE("neumaier sum is exact where naive summation drifts") {
  // 1 + 1e100 - 1e100 ... the classic cancellation pattern
  std::vector<double> v = {1.0, 1e100, 1.0, -1e100};
  CHECK(neumaier_sum(v) == 2.0);
}

TEST_CASE("population variance of constants is exactly zero") {
  std::vector<double> v(1000, 3.7);
  CHECK(population_variance(v) == 0.0);
}

TEST_CASE("population variance matches hand arithmetic") {
  std::vector<double> v = {0.0, 2.0};
  CHECK(population_variance(v) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("inverse normal cdf hits reference quantiles") {
  CHECK(std::fabs(inverse_normal_cdf(0.975) - 1.959963984540054) < 1e-9);
  CHECK(std::fabs(inverse_normal_cdf(0.95) - 1.6448536269514722) < 1e-9);
  CHECK(std::fabs(inverse_normal_cdf(0.5)) < 1e-12);
  CHECK(std::fabs(inverse_normal_cdf(0.025) + 1.959963984540054) < 1e-9);
}

TEST_CASE("inverse normal cdf inverts the cdf across the range") {
  for (double p : {1e-9, 1e-4, 0.01, 0.3, 0.5, 0.77, 0.99, 1 - 1e-6}) {
    CHECK(std::fabs(normal_cdf(inverse_normal_cdf(p)) - p) < 1e-12);
  }
  CHECK_THROWS_AS(inverse_normal_cdf(0.0), ValidationError);
  CHECK_THROWS_AS(inverse_normal_cdf(1.0), ValidationError);
}

TEST_CASE("rng substreams are deterministic and distinct") {
  Rng a = Rng::substream(7, 1);
  Rng b = Rng::substream(7, 1);
  Rng c = Rng::substream(7, 2);
  bool all_equal = true;
  bool any_equal_to_c = false;
  for (int i = 0; i < 64; ++i) {
    const auto x = a.next_u64();
    all_equal = all_equal && (x == b.next_u64());
    any_equal_to_c = any_equal_to_c || (x == c.next_u64());
  }
  CHECK(all_equal);
  CHECK_FALSE(any_equal_to_c);
}

TEST_CASE("rng normal moments are sane") {
  Rng rng(123);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum_sq += x * x;
  }
  CHECK(std::fabs(sum / n) < 0.01);
  CHECK(std::fabs(sum_sq / n - 1.0) < 0.02);
}
