#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "entcost/monotones.hpp"

#include <cmath>

using namespace entcost;

namespace {

const DimSpec kAB{{"A", 2}, {"B", 2}};

DensityMatrix dephased_phi(int k) {
  const auto phi = DensityMatrix::max_entangled(k);
  CMat m = CMat::Zero(k * k, k * k);
  for (int i = 0; i < k; ++i) m(i * k + i, i * k + i) = 1.0 / k;
  return DensityMatrix(phi.dims(), m);
}

}  // namespace

TEST_CASE("D_max of Phi^K against its dephased version is log K") {
  for (int k = 2; k <= 4; ++k) {
    const auto v = dmax_channels(ChoiChannel::from_state(DensityMatrix::max_entangled(k)),
                                 ChoiChannel::from_state(dephased_phi(k)));
    CHECK(v.value == doctest::Approx(std::log2(k)).epsilon(1e-6));
    CHECK(v.direction == Direction::exact);
  }
}

TEST_CASE("D_max edge cases") {
  const auto n = random_channel(kAB, kAB, 2, 3);
  CHECK(std::abs(dmax_channels(n, n).value) < 1e-9);
  CVec e0 = CVec::Zero(2), e1 = CVec::Zero(2);
  e0(0) = 1;
  e1(1) = 1;
  const DimSpec q{{"A", 2}};
  const auto pure = ChoiChannel::from_state(DensityMatrix::pure(q, e0));
  const auto orth = ChoiChannel::from_state(DensityMatrix::pure(q, e1));
  CHECK(std::isinf(dmax_channels(pure, orth).value));
  CHECK_THROWS_AS(dmax_channels(n, identity_channel(q)), InputError);
}

TEST_CASE("generalized robustness of Phi^K equals K") {
  for (int k = 2; k <= 4; ++k) {
    const auto v = gen_robustness_state(DensityMatrix::max_entangled(k));
    REQUIRE(v.ok());
    CHECK(v.value == doctest::Approx(k).epsilon(1e-5));
    CHECK(v.duality_gap <= 1e-7);
  }
}

TEST_CASE("robustness of separable and mixed states") {
  Rng rng(2);
  const CVec v = kron(random_pure_state(2, rng), random_pure_state(2, rng));
  const auto prod = DensityMatrix::pure(kAB, v);
  CHECK(gen_robustness_state(prod).value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std_robustness_state(prod).value == doctest::Approx(1.0).epsilon(1e-6));

  // (Phi^2 + I/4)/2, frozen from tests/oracles/compute_oracles.py
  const CMat m = 0.5 * (DensityMatrix::max_entangled(2).matrix() + CMat::Identity(4, 4) / 4.0);
  const DensityMatrix rho(DensityMatrix::max_entangled(2).dims(), m);
  const auto g = gen_robustness_state(rho);
  const auto s = std_robustness_state(rho);
  CHECK(g.value == doctest::Approx(1.25).epsilon(1e-6));
  CHECK(s.value == doctest::Approx(1.25).epsilon(1e-6));
  CHECK(g.direction == Direction::exact);
}

TEST_CASE("standard robustness of Phi^2 equals the squared Schmidt sum") {
  const auto v = std_robustness_state(DensityMatrix::max_entangled(2));
  REQUIRE(v.ok());
  const double schmidt = 2 * std::sqrt(0.5);
  CHECK(v.value == doctest::Approx(schmidt * schmidt).epsilon(1e-6));
}

TEST_CASE("standard robustness dominates generalized robustness") {
  Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    // random mixed two-qubit state: partial trace of a random pure state
    const CVec psi = random_pure_state(4 * (1 + t % 3), rng);
    const DimSpec big{{"A", 2}, {"B", 2}, {"E", 1 + t % 3}};
    const CMat rho = partial_trace(CMat(psi * psi.adjoint()), big, {"A", "B"});
    const DensityMatrix r(kAB, rho);
    const auto g = gen_robustness_state(r);
    const auto s = std_robustness_state(r);
    REQUIRE(g.ok());
    REQUIRE(s.ok());
    CHECK(s.value >= g.value - 1e-7);
  }
}

TEST_CASE("channel log-robustness of identity and SWAP") {
  const auto id = identity_channel(kAB);
  const auto g = gen_log_robustness_channel(id, FreeSetRelaxation::ppt_choi(), 0);
  REQUIRE(g.ok());
  CHECK(std::abs(g.value) < 1e-6);

  const auto sw = swap_channel(2);
  const auto gs = gen_log_robustness_channel(sw, FreeSetRelaxation::ppt_choi(), 0);
  REQUIRE(gs.ok());
  CHECK(gs.value == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(gs.direction == Direction::lower);
  const auto ss = std_log_robustness_channel(sw, FreeSetRelaxation::ppt_choi(), 0);
  REQUIRE(ss.ok());
  CHECK(ss.value >= gs.value - 1e-6);

  CHECK_THROWS_AS(gen_log_robustness_channel(sw, FreeSetRelaxation::ppt_choi(), -0.1), InputError);
  CHECK_THROWS_AS(gen_log_robustness_channel(sw, FreeSetRelaxation::ppt_state(), 0), InputError);
}

TEST_CASE("sampled SEPP relaxation sees SWAP as free") {
  const auto sw = swap_channel(2);
  const auto relax = FreeSetRelaxation::sepp_sampled(sw.in_dims(), 64, 0);
  const auto g = gen_log_robustness_channel(sw, relax, 0);
  REQUIRE(g.ok());
  CHECK(std::abs(g.value) < 1e-6);
  const auto s = std_log_robustness_channel(sw, relax, 0);
  REQUIRE(s.ok());
  CHECK(std::abs(s.value) < 1e-6);
}

TEST_CASE("large smoothing reaches a free channel") {
  const auto g = gen_log_robustness_channel(cnot_channel(), FreeSetRelaxation::ppt_choi(), 1.0);
  REQUIRE(g.ok());
  CHECK(std::abs(g.value) < 1e-6);
}

TEST_CASE("smoothed values do not increase with epsilon") {
  const auto n = random_channel(kAB, kAB, 2, 77);
  double prev_g = 1e9, prev_s = 1e9;
  for (double eps : {0.0, 0.01, 0.1}) {
    const auto g = gen_log_robustness_channel(n, FreeSetRelaxation::ppt_choi(), eps);
    const auto s = std_log_robustness_channel(n, FreeSetRelaxation::ppt_choi(), eps);
    REQUIRE(g.ok());
    REQUIRE(s.ok());
    CHECK(g.value <= prev_g + 1e-6);
    CHECK(s.value <= prev_s + 1e-6);
    CHECK(s.value >= g.value - 1e-6);
    prev_g = g.value;
    prev_s = s.value;
  }
}

TEST_CASE("D_max to the optimal free channel dominates the log-robustness") {
  const auto n = random_channel(kAB, kAB, 2, 5);
  const auto g = gen_log_robustness_channel(n, FreeSetRelaxation::ppt_choi(), 0);
  REQUIRE(g.ok());
  const auto m = ChoiChannel::project(n.in_dims(), n.out_dims(), g.free_object);
  CHECK(dmax_channels(n, m).value >= g.value - 1e-5);
}

TEST_CASE("robustness-generating power") {
  const auto sw = rob_gen_power(swap_channel(2), 8, 0);
  REQUIRE(sw.bound.ok());
  CHECK(sw.bound.value == doctest::Approx(1.0).epsilon(1e-6));

  const auto cn = rob_gen_power(cnot_channel(), 8, 0);
  REQUIRE(cn.bound.ok());
  CHECK(cn.bound.value == doctest::Approx(2.0).epsilon(1e-5));

  Rng rng(1);
  const auto sep = DensityMatrix::pure(kAB, kron(random_pure_state(2, rng), random_pure_state(2, rng)));
  const auto rep = rob_gen_power(replacer_channel(kAB, sep), 4, 0);
  CHECK(rep.bound.value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(rob_gen_power(cnot_channel(), 0, 0), InputError);
}

TEST_CASE("maximal overlap of Phi^K with product states is 1/K") {
  for (int k = 2; k <= 3; ++k) CHECK(max_product_overlap(k, 32, 0) == doctest::Approx(1.0 / k).epsilon(1e-4));
}
