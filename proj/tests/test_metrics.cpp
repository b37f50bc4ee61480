#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "entcost/metrics.hpp"

using namespace entcost;
using namespace entcost::metrics;

namespace {

const DimSpec kQubit{{"A", 2}};

ChoiChannel depolarizing(double p) {
  const auto id = identity_channel(kQubit);
  const auto rep = replacer_channel(kQubit, DensityMatrix::maximally_mixed(kQubit));
  return mix({{1 - p, id}, {p, rep}});
}

ChoiChannel x_unitary() {
  CMat x = CMat::Zero(2, 2);
  x(0, 1) = x(1, 0) = 1;
  return unitary_channel(x, kQubit);
}

}  // namespace

TEST_CASE("identical channels are at distance zero") {
  const auto n = random_channel(DimSpec{{"A", 2}, {"B", 2}}, DimSpec{{"A", 2}, {"B", 2}}, 2, 8);
  const auto r = diamond_distance(n, n);
  CHECK(r.half_distance <= 1e-9);
  CHECK(r.status == conic::SolveStatus::optimal);
}

TEST_CASE("identity versus bit flip is perfectly distinguishable") {
  const auto r = diamond_distance(identity_channel(kQubit), x_unitary());
  REQUIRE(r.status == conic::SolveStatus::optimal);
  CHECK(r.half_distance == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.witness_value == doctest::Approx(r.half_distance).epsilon(1e-6));
  CHECK(r.duality_gap <= 1e-7);
}

TEST_CASE("identity versus depolarizing matches the independent oracle") {
  // frozen from tests/oracles/compute_oracles.py
  const std::vector<std::pair<double, double>> cases = {
      {0.1, 0.075}, {0.25, 0.1875}, {0.5, 0.375}, {0.75, 0.5625}, {1.0, 0.75}};
  for (const auto& [p, expect] : cases) {
    const auto r = diamond_distance(identity_channel(kQubit), depolarizing(p));
    REQUIRE(r.status == conic::SolveStatus::optimal);
    CHECK(r.half_distance == doctest::Approx(expect).epsilon(1e-5));
    CHECK(r.duality_gap <= 1e-7);
    CHECK(std::abs(r.witness_value - r.half_distance) <= 1e-6);
    CHECK(r.witness_state.trace().real() == doctest::Approx(1.0));
  }
}

TEST_CASE("symmetry and triangle inequality on random triples") {
  const DimSpec d{{"A", 2}, {"B", 2}};
  for (int t = 0; t < 4; ++t) {
    const auto a = random_channel(d, d, 2, 100 + 3 * t);
    const auto b = random_channel(d, d, 2, 101 + 3 * t);
    const auto c = random_channel(d, d, 2, 102 + 3 * t);
    const double ab = diamond_distance(a, b).half_distance;
    const double ba = diamond_distance(b, a).half_distance;
    const double bc = diamond_distance(b, c).half_distance;
    const double ac = diamond_distance(a, c).half_distance;
    CHECK(std::abs(ab - ba) <= 1e-7);
    CHECK(ac <= ab + bc + 1e-7);
  }
}

TEST_CASE("diamond ball round trips") {
  const auto center = identity_channel(kQubit);
  for (double eps : {0.0, 0.05, 1.0}) {
    // push as far as possible toward the bit flip inside the ball
    conic::SdpProblem p;
    const auto j = p.add_hermitian("J", 4);
    diamond_ball_constraints(p, j, center, eps);
    const CMat target = x_unitary().choi();
    conic::ScalarExpr overlap;
    for (const auto& [k, entries] : j.terms()) {
      double s = 0;
      for (const auto& e : entries) s += (target(e.col, e.row) * e.value).real();
      overlap.add_term(k, s);
    }
    p.maximize(overlap);
    const auto sol = conic::solve(p);
    REQUIRE(sol.optimal());
    const auto found = ChoiChannel::project(center.in_dims(), center.out_dims(), sol.variable_values.at("J"));
    const double back = diamond_distance(center, found).half_distance;
    CHECK(back <= eps + 1e-6);
    if (eps == 1.0) CHECK(back == doctest::Approx(1.0).epsilon(1e-5));
    if (eps == 0.05) CHECK(back == doctest::Approx(0.05).epsilon(1e-4));
  }
}

TEST_CASE("mismatched dimensions are rejected") {
  CHECK_THROWS_AS(diamond_distance(identity_channel(kQubit), identity_channel(DimSpec{{"A", 3}})), InputError);
}
