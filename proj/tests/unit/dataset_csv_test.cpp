#include <doctest.h>

#include <cmath>
#include <string>

#include "subpop/csv.hpp"
#include "subpop/dataset.hpp"
#include "subpop/errors.hpp"
#include "subpop/rng.hpp"

using namespace subpop;

namespace {

bool throws_with(const std::string& csv, const std::string& needle) {
  try {
    parse_csv(csv);
  } catch (const ValidationError& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_CASE("two-row file parses in order") {
  const auto ds = parse_csv("loss,z0\n1.0,0.2\n2.0,-0.3\n");
  REQUIRE(ds.size() == 2);
  REQUIRE(ds.dim() == 1);
  CHECK(ds.loss(0) == 1.0);
  CHECK(ds.loss(1) == 2.0);
  CHECK(ds.z_row(0)[0] == 0.2);
  CHECK(ds.z_row(1)[0] == -0.3);
  CHECK_FALSE(ds.has_external_mu());
}

TEST_CASE("mu_hat column populates external predictions") {
  const auto ds = parse_csv("loss,z0,mu_hat\n1.0,0.2,0.9\n2.0,-0.3,2.1\n");
  REQUIRE(ds.has_external_mu());
  CHECK(ds.external_mu()[0] == 0.9);
  CHECK(ds.external_mu()[1] == 2.1);
}

TEST_CASE("column order in the file does not matter") {
  const auto ds = parse_csv("z1,loss,z0\n5,1.5,7\n");
  CHECK(ds.dim() == 2);
  CHECK(ds.z_row(0)[0] == 7.0);
  CHECK(ds.z_row(0)[1] == 5.0);
}

TEST_CASE("scientific notation and CRLF and BOM are accepted") {
  const auto ds = parse_csv("\xEF\xBB\xBFloss,z0\r\n1e-3,2.5E2\r\n");
  CHECK(ds.loss(0) == 1e-3);
  CHECK(ds.z_row(0)[0] == 250.0);
}

TEST_CASE("ingestion diagnostics name the offending row and column") {
  CHECK(throws_with("z0\n1.0\n", "missing required column 'loss'"));
  CHECK(throws_with("loss,z0\n-0.5,0\n", "negative loss at row 1"));
  CHECK(throws_with("loss,z0\n1.0,0\nx,1\n", "row 2"));
  CHECK(throws_with("loss,z0\n1.0,0\nx,1\n", "column 'loss'"));
  CHECK(throws_with("loss,z0\n1.0,abc\n", "column 'z0'"));
  CHECK(throws_with("loss,z0\n1.0,0,9\n", "row 1 has 3 fields, expected 2"));
  CHECK(throws_with("", "empty file"));
  CHECK(throws_with("loss,z0\n", "no data rows"));
  CHECK(throws_with("loss,z0,z2\n1,2,3\n", "z0..z{d-1}"));
  CHECK(throws_with("loss,z0,z0\n1,2,3\n", "duplicate column"));
  CHECK(throws_with("loss,z0,extra\n1,2,3\n", "unexpected column 'extra'"));
  CHECK(throws_with("loss\n1.0\n", "no attribute columns"));
  CHECK(throws_with("loss,z0\ninf,0\n", "non-finite value at row 1"));
}

TEST_CASE("loss-column reader tolerates unknown columns") {
  const auto losses = parse_loss_column("id,loss,note\n1,0.5,7\n2,1.5,8\n");
  REQUIRE(losses.size() == 2);
  CHECK(losses[0] == 0.5);
  CHECK(losses[1] == 1.5);
  CHECK_THROWS_AS(parse_loss_column("a,b\n1,2\n"), ValidationError);
}

TEST_CASE("csv round trip is bit exact") {
  Rng rng(42);
  std::vector<double> losses, z, mu;
  for (int i = 0; i < 257; ++i) {
    losses.push_back(std::exp(4.0 * rng.normal()));  // wide magnitude range
    z.push_back(rng.normal() * 1e-7);
    z.push_back(rng.normal() * 1e9);
    mu.push_back(rng.normal());
  }
  const Dataset ds(losses, z, 2, mu);
  const Dataset back = parse_csv(to_csv(ds));
  REQUIRE(back.size() == ds.size());
  REQUIRE(back.dim() == ds.dim());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.loss(i) == ds.loss(i));
    CHECK(back.z_row(i)[0] == ds.z_row(i)[0]);
    CHECK(back.z_row(i)[1] == ds.z_row(i)[1]);
    CHECK(back.external_mu()[i] == ds.external_mu()[i]);
  }
}

TEST_CASE("dataset constructor enforces the invariants") {
  CHECK_THROWS_AS(Dataset({}, {}, 1), ValidationError);
  CHECK_THROWS_AS(Dataset({1.0}, {0.0}, 0), ValidationError);
  CHECK_THROWS_AS(Dataset({-1.0}, {0.0}, 1), ValidationError);
  CHECK_THROWS_AS(Dataset({1.0}, {NAN}, 1), ValidationError);
  CHECK_THROWS_AS(Dataset({1.0}, {0.0}, 1, std::vector<double>{1.0, 2.0}), ValidationError);
  CHECK_THROWS_AS(Dataset({1.0}, {0.0}, 1, std::vector<double>{INFINITY}), ValidationError);
  // zero loss is allowed
  const Dataset ok({0.0}, {1.0}, 1);
  CHECK(ok.loss(0) == 0.0);
}

TEST_CASE("from_samples rejects ragged attribute dimensions") {
  std::vector<LossSample> rows = {{1.0, {0.0, 1.0}}, {2.0, {3.0}}};
  CHECK_THROWS_AS(Dataset::from_samples(rows), ValidationError);
}
