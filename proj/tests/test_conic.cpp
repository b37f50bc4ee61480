#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "entcost/conic.hpp"

#include <Eigen/Eigenvalues>

using namespace entcost;
using namespace entcost::conic;

TEST_CASE("embedding of a Hermitian matrix doubles its spectrum") {
  CMat y(2, 2);
  y << 0, cplx(0, -1), cplx(0, 1), 0;
  Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(embed_hermitian(y)).eigenvalues();
  CHECK(ev(0) == doctest::Approx(-1));
  CHECK(ev(1) == doctest::Approx(-1));
  CHECK(ev(2) == doctest::Approx(1));
  CHECK(ev(3) == doctest::Approx(1));
}

TEST_CASE("largest eigenvalue as an SDP") {
  CMat h(3, 3);
  h << 2, cplx(1, 1), 0, cplx(1, -1), 1, cplx(0, 0.5), 0, cplx(0, -0.5), -1;
  SdpProblem p;
  auto t = p.add_scalar("t");
  p.add_psd(t * CMat::Identity(3, 3) - MatExpr(h));
  p.minimize(t);
  auto sol = solve(p);
  REQUIRE(sol.optimal());
  const double lmax = Eigen::SelfAdjointEigenSolver<CMat>(h).eigenvalues().maxCoeff();
  CHECK(sol.primal_value == doctest::Approx(lmax).epsilon(1e-7));
  CHECK(sol.dual_value == doctest::Approx(lmax).epsilon(1e-7));
  // dual is the top eigenprojector
  CHECK(sol.constraint_duals[0].trace().real() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("maximization with an equality constraint") {
  // max tr(H X) over density matrices = lambda_max(H)
  CMat h(2, 2);
  h << 1, cplx(0, 2), cplx(0, -2), -1;
  SdpProblem p;
  auto x = p.add_hermitian("X", 2);
  p.add_psd(x);
  p.add_equality(trace(x), 1.0);
  ScalarExpr obj;
  // tr(HX) built from the entries
  for (const auto& [k, v] : x.terms()) {
    double s = 0;
    for (const auto& e : v) s += (h(e.col, e.row) * e.value).real();
    obj.add_term(k, s);
  }
  p.maximize(obj);
  auto sol = solve(p);
  REQUIRE(sol.optimal());
  CHECK(sol.primal_value == doctest::Approx(std::sqrt(5.0)).epsilon(1e-7));
  CHECK(sol.variable_values.at("X").trace().real() == doctest::Approx(1.0));
}

TEST_CASE("infeasible program is detected") {
  SdpProblem p;
  auto x = p.add_hermitian("X", 2);
  p.add_psd(x - MatExpr(CMat(CMat::Identity(2, 2))));
  p.add_nonnegative(-1.0 * trace(x));
  p.minimize(trace(x));
  auto sol = solve(p);
  CHECK(sol.status == SolveStatus::infeasible);
}

TEST_CASE("unbounded program is detected") {
  SdpProblem p;
  auto t = p.add_scalar("t");
  p.add_nonnegative(-1.0 * t);
  p.minimize(t);
  auto sol = solve(p);
  CHECK(sol.status == SolveStatus::unbounded);
}

TEST_CASE("inconsistent equalities are reported infeasible") {
  SdpProblem p;
  auto t = p.add_scalar("t");
  p.add_equality(t, 1.0);
  p.add_equality(t, 2.0);
  p.add_nonnegative(t);
  p.minimize(t);
  CHECK(solve(p).status == SolveStatus::infeasible);
}
