#include "entcost/metrics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace entcost::metrics {

using conic::MatExpr;
using conic::SdpProblem;
using conic::SolveStatus;

namespace {

DimSpec flat_dims(int in_dim, int out_dim) { return DimSpec{{"in", in_dim}, {"out", out_dim}}; }

void check_same_dims(const ChoiChannel& a, const ChoiChannel& b) {
  if (a.in_dim() != b.in_dim() || a.out_dim() != b.out_dim())
    throw InputError("diamond_distance: channels act on different spaces");
}

}  // namespace

void trace_preserving_constraint(SdpProblem& p, const MatExpr& choi, int in_dim, int out_dim) {
  const MatExpr marginal = conic::partial_trace(choi, flat_dims(in_dim, out_dim), {"in"});
  p.add_equality(marginal, CMat(CMat::Identity(in_dim, in_dim) / double(in_dim)));
}

DiamondResult diamond_distance(const ChoiChannel& a, const ChoiChannel& b, const conic::SolverSettings& settings) {
  check_same_dims(a, b);
  const int din = a.in_dim(), dout = a.out_dim();
  const int d = din * dout;
  // unnormalized Choi of the difference
  const CMat delta = double(din) * (a.choi() - b.choi());

  DiamondResult out;
  const double bound = 0.5 * trace_norm(delta);
  if (bound <= 1e-10) {
    out.half_distance = bound;
    out.short_circuit = true;
    out.witness_state = CMat::Identity(din, din) / double(din);
    out.witness_operator = CMat::Zero(d, d);
    out.witness_value = 0;
    return out;
  }

  SdpProblem p;
  const MatExpr z = p.add_hermitian("Z", d);
  const auto t = p.add_scalar("t");
  const int ball = p.add_psd(t * CMat::Identity(din, din) - conic::partial_trace(z, flat_dims(din, dout), {"in"}),
                             "operator norm");
  p.add_psd(z, "Z psd");
  p.add_psd(z - MatExpr(delta), "Z majorant");
  p.minimize(t);
  const auto sol = conic::solve(p, settings);

  out.status = sol.status;
  out.iterations = sol.iterations;
  out.diagnostics = sol.diagnostics;
  out.duality_gap = sol.duality_gap;
  out.half_distance = std::clamp(sol.primal_value, 0.0, 1.0);
  if (!sol.optimal()) return out;

  // dual witness: rho from the norm block, W optimal for that rho
  CMat rho = sol.constraint_duals[ball];
  rho = 0.5 * (rho + rho.adjoint());
  rho /= rho.trace().real();
  const CMat sq = kron(psd_sqrt(rho), CMat::Identity(dout, dout));
  Eigen::SelfAdjointEigenSolver<CMat> es(sq * delta * sq);
  CMat proj = CMat::Zero(d, d);
  double value = 0;
  for (int i = 0; i < d; ++i) {
    const double ev = es.eigenvalues()(i);
    if (ev > 0) {
      value += ev;
      proj += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
    }
  }
  out.witness_state = rho;
  out.witness_operator = sq * proj * sq;
  out.witness_value = value;
  if (std::abs(value - out.half_distance) > 1e-6) {
    std::ostringstream os;
    os << "dual witness value " << value << " disagrees with primal " << out.half_distance;
    out.status = SolveStatus::inaccurate;
    out.diagnostics += (out.diagnostics.empty() ? "" : "; ") + os.str();
  }
  return out;
}

void diamond_ball_constraints(SdpProblem& p, const MatExpr& choi, const ChoiChannel& center, double eps) {
  if (eps < 0) throw InputError("diamond ball radius must be nonnegative");
  const int din = center.in_dim(), dout = center.out_dim();
  if (choi.dim() != din * dout) throw InputError("diamond ball: Choi expression has the wrong size");
  if (eps == 0) {
    p.add_equality(choi, center.choi());
    return;
  }
  p.add_psd(choi, "ball Choi psd");
  trace_preserving_constraint(p, choi, din, dout);
  // unnormalized: Z >= |in| (J - J_c), Z >= 0, ||tr_out Z||_inf <= eps
  const MatExpr z = p.add_hermitian("ball Z", din * dout);
  p.add_psd(z, "ball Z psd");
  p.add_psd(z - double(din) * (choi - center.choi()), "ball Z majorant");
  p.add_psd(MatExpr(CMat(eps * CMat::Identity(din, din))) - conic::partial_trace(z, flat_dims(din, dout), {"in"}),
            "ball radius");
}

}  // namespace entcost::metrics
