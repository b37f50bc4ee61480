#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "entcost/metrics.hpp"
#include "entcost/simulate.hpp"

#include <cmath>

using namespace entcost;

namespace {

const DimSpec kAB{{"A", 2}, {"B", 2}};

ChoiChannel noisy(const ChoiChannel& n, double q) {
  return mix({{1 - q, n}, {q, replacer_channel(n.in_dims(), DensityMatrix::maximally_mixed(n.out_dims()))}});
}

ChoiChannel mixed_replacer() {
  return replacer_channel(kAB, DensityMatrix::maximally_mixed(kAB));
}

double reproduction_error(const ChoiChannel& m, int k, const ChoiChannel& target) {
  return metrics::diamond_distance(simulated_channel(m, k, target.in_dims()), target).half_distance;
}

}  // namespace

TEST_CASE("simulation input layout") {
  const auto d = simulation_input(kAB, 3);
  CHECK(d.labels() == std::vector<std::string>{"A", "A'", "B", "B'"});
  CHECK(d.total_dim() == 36);
  CHECK_THROWS_AS(simulation_input(kAB, 0), InputError);
  CHECK_THROWS_AS(simulation_input(DimSpec{{"B", 2}, {"A", 2}}, 2), InputError);
}

TEST_CASE("measurement construction reproduces N' on Phi^K") {
  for (int t = 0; t < 4; ++t) {
    const auto n1 = random_channel(kAB, kAB, 3, 100 + t);
    const auto n2 = random_channel(kAB, kAB, 2, 200 + t);
    for (int k : {1, 2, 4}) CHECK(reproduction_error(theorem1_channel(n1, n2, k), k, n1) <= 1e-9);
  }
}

TEST_CASE("measurement construction applies N'' off the resource") {
  const int k = 2;
  const auto n1 = random_channel(kAB, kAB, 3, 7);
  const auto n2 = random_channel(kAB, kAB, 3, 8);
  const auto m = theorem1_channel(n1, n2, k);
  Rng rng(1);
  const CVec psi = random_pure_state(4, rng);
  const CMat rho = psi * psi.adjoint();
  // rho on (A, B) with the resource pair in (I - Phi^K)/(K^2 - 1)
  const CMat perp = (CMat::Identity(k * k, k * k) - DensityMatrix::max_entangled(k).matrix()) / double(k * k - 1);
  const DimSpec order{{"A", 2}, {"B", 2}, {"A'", k}, {"B'", k}};
  const CMat full = permute_subsystems(kron(rho, perp), order, {"A", "A'", "B", "B'"});
  const CMat out = apply_to_operator(m, full);
  CHECK((out - apply_to_operator(n2, rho)).norm() < 1e-10);
}

TEST_CASE("teleport plans are exact") {
  const auto id = teleport_channel(identity_channel(kAB));
  CHECK(id.k == 4);
  CHECK(id.ebits == doctest::Approx(2.0));
  CHECK(id.achieved_error <= 1e-9);

  const auto sw = teleport_channel(swap_channel(2));
  CHECK(sw.k == 4);
  CHECK(sw.achieved_error <= 1e-9);

  // asymmetric sides: qutrit A input, qubit A output
  const DimSpec in{{"A", 3}, {"B", 2}};
  const DimSpec out{{"A", 2}, {"B", 2}};
  const auto asym = teleport_channel(random_channel(in, out, 2, 5));
  CHECK(asym.k == 6);
  CHECK(asym.achieved_error <= 1e-9);

  CHECK_THROWS_AS(teleport_channel(identity_channel(DimSpec{{"B", 2}, {"A", 2}})), InputError);
}

TEST_CASE("FSEPP sampling") {
  const auto tel = teleport_channel(cnot_channel());
  const auto ok = fsepp_sample_check(tel.m, 300, 4);
  CHECK(ok.pass);
  CHECK(ok.verdict() == "PASS(sampled)");
  CHECK(ok.worst_min_eigenvalue >= -1e-9);

  const auto emitter = replacer_channel(simulation_input(kAB, 2), DensityMatrix::max_entangled(2));
  const auto bad = fsepp_sample_check(emitter, 50, 4);
  CHECK_FALSE(bad.pass);
  CHECK(bad.verdict() == "FAIL");
  CHECK(bad.worst_min_eigenvalue == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(bad.worst_input.rows() == 16);

  CHECK_THROWS_AS(fsepp_sample_check(tel.m, 0, 1), InputError);
}

TEST_CASE("bracket of SWAP is tight at two ebits") {
  const auto br = cost_bracket(swap_channel(2), 0.0, FreeSetRelaxation::ppt_choi(), 0, {200});
  CHECK(br.lower_bits == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(br.upper_bits == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(br.upper_certificate.method == PlanMethod::teleport);
  CHECK(br.upper_certificate.k == 4);
  CHECK(br.upper_certificate.fsepp.pass);
}

TEST_CASE("free channels have a zero bracket") {
  const CMat h = (CMat(2, 2) << 1, 1, 1, -1).finished() / std::sqrt(2.0);
  for (const auto& n : {identity_channel(kAB), unitary_channel(kron(h, h), kAB), mixed_replacer()}) {
    const auto br = cost_bracket(n, 0.0, FreeSetRelaxation::ppt_choi(), 0, {200});
    CHECK(br.lower_bits == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(br.upper_bits == 0.0);
    CHECK(br.upper_certificate.k == 1);
    CHECK(br.upper_certificate.method == PlanMethod::theorem1);
    CHECK(br.upper_certificate.achieved_error <= 1e-9);
  }
}

TEST_CASE("noisy CNOT is simulated below the teleport cost") {
  const auto n = noisy(cnot_channel(), 0.75);
  const auto br = cost_bracket(n, 0.0, FreeSetRelaxation::ppt_choi(), 3, {500});
  const auto& plan = br.upper_certificate;
  CHECK(plan.method == PlanMethod::theorem1);
  CHECK(plan.k == 3);
  CHECK(plan.lambda == doctest::Approx(2.25).epsilon(1e-5));
  CHECK(plan.achieved_error <= 1e-9);
  CHECK(plan.fsepp.pass);
  CHECK(br.lower_bits <= br.upper_bits);
  CHECK(!plan.certificate.empty());
}

TEST_CASE("smoothed brackets re-verify the achieved error") {
  const auto n = noisy(cnot_channel(), 0.75);
  const double eps = 0.05;
  const auto br = cost_bracket(n, eps, FreeSetRelaxation::ppt_choi(), 3, {200});
  CHECK(br.upper_certificate.achieved_error <= eps + 1e-6);
  CHECK(br.lower_bits <= br.upper_bits + 1e-9);
  CHECK(br.lower_certificate.epsilon == eps);
}

TEST_CASE("random channels have ordered finite brackets") {
  for (int t = 0; t < 3; ++t) {
    const auto br = cost_bracket(random_channel(kAB, kAB, 3, 40 + t), 0.0, FreeSetRelaxation::ppt_choi(), t, {100});
    CHECK(std::isfinite(br.lower_bits));
    CHECK(std::isfinite(br.upper_bits));
    CHECK(br.lower_bits <= br.upper_bits + 1e-9);
  }
  CHECK_THROWS_AS(cost_bracket(cnot_channel(), -0.1, FreeSetRelaxation::ppt_choi(), 0), InputError);
}
