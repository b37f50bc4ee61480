#include "entcost/monotones.hpp"

#include "entcost/metrics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace entcost {

using conic::MatExpr;
using conic::SdpProblem;
using conic::SolveStatus;

const char* to_string(Direction d) {
  switch (d) {
    case Direction::lower: return "lower";
    case Direction::upper: return "upper";
    case Direction::exact: return "exact";
  }
  return "unknown";
}

const char* to_string(RelaxationKind k) {
  switch (k) {
    case RelaxationKind::ppt_choi: return "ppt-choi";
    case RelaxationKind::sepp_sampled: return "sepp-sampled";
    case RelaxationKind::ppt_state: return "ppt-state";
  }
  return "unknown";
}

RelaxationKind parse_relaxation(const std::string& s) {
  if (s == "ppt-choi") return RelaxationKind::ppt_choi;
  if (s == "sepp-sampled") return RelaxationKind::sepp_sampled;
  if (s == "ppt-state") return RelaxationKind::ppt_state;
  throw InputError("unknown relaxation '" + s + "' (expected ppt-choi, sepp-sampled or ppt-state)");
}

FreeSetRelaxation FreeSetRelaxation::ppt_choi() { return {RelaxationKind::ppt_choi, {}}; }
FreeSetRelaxation FreeSetRelaxation::ppt_state() { return {RelaxationKind::ppt_state, {}}; }

FreeSetRelaxation FreeSetRelaxation::sepp_sampled(const DimSpec& in, int count, std::uint64_t seed) {
  if (count < 1) throw InputError("sepp-sampled relaxation needs at least one sample");
  FreeSetRelaxation r{RelaxationKind::sepp_sampled, {}};
  Rng rng(seed);
  for (int s = 0; s < count; ++s) {
    CVec psi = CVec::Ones(1);
    for (const auto& sub : in.subsystems()) psi = kron(psi, random_pure_state(sub.dim, rng));
    r.samples.push_back(DensityMatrix::pure(in, psi));
  }
  return r;
}

namespace {

constexpr double kSupportTol = 1e-10;

std::set<std::string> resolve_cut(const DimSpec& dims, const std::set<std::string>& b_side) {
  std::set<std::string> b = b_side.empty() ? b_side_labels(dims) : b_side;
  dims.require(b);
  if (b.empty() || b.size() == dims.size()) throw InputError("bipartite cut needs subsystems on both sides");
  return b;
}

bool ppt_is_exact(const DimSpec& dims, const std::set<std::string>& b) {
  int da = 1, db = 1;
  for (const auto& s : dims.subsystems()) (b.count(s.label) ? db : da) *= s.dim;
  return da * db <= 6;
}

double log2_clamped(double lambda) { return std::log2(std::max(lambda, 1.0)); }

void copy_status(BoundedValue& v, const conic::SdpSolution& sol) {
  v.status = sol.status;
  v.duality_gap = sol.duality_gap;
  v.iterations = sol.iterations;
  v.diagnostics = sol.diagnostics;
}

}  // namespace

// ---- D_max ------------------------------------------------------------------

namespace {

double dmax_matrices(const CMat& n, const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> es(m);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double cut = kSupportTol * std::max(1.0, ev.cwiseAbs().maxCoeff());
  std::vector<int> idx;
  for (int i = 0; i < ev.size(); ++i)
    if (ev(i) > cut) idx.push_back(i);
  const int d = static_cast<int>(m.rows());
  CMat u(d, idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) u.col(j) = es.eigenvectors().col(idx[j]) / std::sqrt(ev(idx[j]));
  CMat proj = CMat::Identity(d, d);
  for (int j : idx) proj -= es.eigenvectors().col(j) * es.eigenvectors().col(j).adjoint();
  const CMat leak = proj * n * proj;
  if (leak.cwiseAbs().maxCoeff() > kSupportTol) return std::numeric_limits<double>::infinity();
  if (idx.empty()) return std::numeric_limits<double>::infinity();
  const CMat b = u.adjoint() * n * u;
  const double lam = Eigen::SelfAdjointEigenSolver<CMat>(0.5 * (b + b.adjoint()), Eigen::EigenvaluesOnly)
                         .eigenvalues()
                         .maxCoeff();
  return std::log2(lam);
}

}  // namespace

BoundedValue dmax_channels(const ChoiChannel& n, const ChoiChannel& m) {
  if (!(n.in_dims() == m.in_dims()) || !(n.out_dims() == m.out_dims()))
    throw InputError("dmax_channels: channels have different dimensions");
  BoundedValue v;
  v.value = dmax_matrices(n.choi(), m.choi());
  v.direction = Direction::exact;
  v.log_scale = true;
  v.free_object = m.choi();
  return v;
}

BoundedValue dmax_states(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (!(rho.dims() == sigma.dims())) throw InputError("dmax_states: states have different dimensions");
  BoundedValue v;
  v.value = dmax_matrices(rho.matrix(), sigma.matrix());
  v.direction = Direction::exact;
  v.log_scale = true;
  v.free_object = sigma.matrix();
  return v;
}

// ---- state robustness ------------------------------------------------------

BoundedValue gen_robustness_state(const DensityMatrix& rho, const std::set<std::string>& b_side,
                                  const conic::SolverSettings& settings) {
  const auto b = resolve_cut(rho.dims(), b_side);
  SdpProblem p;
  // omega~ = lambda * omega
  const MatExpr w = p.add_hermitian("omega", rho.dim());
  const int dom = p.add_psd(w - MatExpr(rho.matrix()), "dominance");
  p.add_psd(conic::partial_transpose(w, rho.dims(), b), "ppt");
  p.minimize(conic::trace(w));
  const auto sol = conic::solve(p, settings);

  BoundedValue v;
  copy_status(v, sol);
  v.relaxation = RelaxationKind::ppt_state;
  v.direction = ppt_is_exact(rho.dims(), b) ? Direction::exact : Direction::lower;
  v.value = std::max(sol.primal_value, 1.0);
  const CMat om = sol.variable_values.at("omega");
  v.free_object = om / std::max(om.trace().real(), 1e-300);
  v.dual_witness = sol.constraint_duals.at(dom);
  return v;
}

BoundedValue std_robustness_state(const DensityMatrix& rho, const std::set<std::string>& b_side,
                                  const conic::SolverSettings& settings) {
  const auto b = resolve_cut(rho.dims(), b_side);
  SdpProblem p;
  // Y~ = (lambda - 1) * mixing state
  const MatExpr y = p.add_hermitian("Y", rho.dim());
  const MatExpr mixed = y + rho.matrix();
  p.add_psd(y, "Y psd");
  p.add_psd(conic::partial_transpose(y, rho.dims(), b), "Y ppt");
  const int dom = p.add_psd(mixed, "mixture psd");
  p.add_psd(conic::partial_transpose(mixed, rho.dims(), b), "mixture ppt");
  p.minimize(1.0 + conic::trace(y));
  const auto sol = conic::solve(p, settings);

  BoundedValue v;
  copy_status(v, sol);
  v.relaxation = RelaxationKind::ppt_state;
  v.direction = ppt_is_exact(rho.dims(), b) ? Direction::exact : Direction::lower;
  v.value = std::max(sol.primal_value, 1.0);
  v.free_object = sol.value(mixed) / v.value;
  v.dual_witness = sol.constraint_duals.at(dom);
  return v;
}

// ---- channel robustness ----------------------------------------------------

namespace {

BoundedValue channel_robustness(const ChoiChannel& n, const FreeSetRelaxation& relax, double eps,
                                const conic::SolverSettings& settings, bool standard) {
  if (!(eps >= 0)) throw InputError("epsilon must be nonnegative");
  const int din = n.in_dim(), dout = n.out_dim(), d = din * dout;
  if (relax.kind == RelaxationKind::ppt_state && din > 1)
    throw InputError("ppt-state relaxation applies to states only; use ppt-choi or sepp-sampled for channels");
  const DimSpec joint = n.joint_dims();
  const auto b_joint = b_side_labels(joint);
  if (b_joint.empty() || b_joint.size() == joint.size())
    throw InputError("channel needs subsystems on both sides of the A:B cut");
  const auto b_out = b_side_labels(n.out_dims());
  if (relax.kind == RelaxationKind::sepp_sampled) {
    if (relax.samples.empty()) throw InputError("sepp-sampled relaxation without samples");
    for (const auto& s : relax.samples)
      if (s.dim() != din) throw InputError("sepp-sampled sample does not match the channel input");
  }

  SdpProblem p;
  MatExpr jp(n.choi());
  if (eps > 0) {
    jp = p.add_hermitian("J'", d);
    metrics::diamond_ball_constraints(p, jp, n, eps);
  }
  const auto lam = p.add_scalar("lambda");
  const CMat id_in = CMat::Identity(din, din) / double(din);
  const DimSpec flat{{"in", din}, {"out", dout}};

  auto free_cone = [&](const MatExpr& x, const std::string& name) {
    if (relax.kind == RelaxationKind::sepp_sampled) {
      for (std::size_t s = 0; s < relax.samples.size(); ++s) {
        const MatExpr out = conic::apply_choi(x, din, dout, relax.samples[s].matrix());
        p.add_psd(conic::partial_transpose(out, n.out_dims(), b_out), name + " sample " + std::to_string(s));
      }
    } else {
      p.add_psd(conic::partial_transpose(x, joint, b_joint), name + " ppt");
    }
  };

  int dom = -1;
  MatExpr free_part;
  if (!standard) {
    // M~ = lambda * J_M
    const MatExpr m = p.add_hermitian("M", d);
    dom = p.add_psd(m - jp, "dominance");
    p.add_equality(conic::partial_trace(m, flat, {"in"}), lam * id_in);
    free_cone(m, "M");
    free_part = m;
  } else {
    // Y~ = (lambda - 1) * J_M'', lambda J_M* = J' + Y~
    const MatExpr y = p.add_hermitian("Y", d);
    dom = p.add_psd(y, "Y psd");
    free_cone(y, "Y");
    const MatExpr mix = jp + y;
    free_cone(mix, "mixture");
    p.add_equality(conic::partial_trace(y, flat, {"in"}), lam * id_in - id_in);
    free_part = y;
  }
  p.minimize(lam);
  const auto sol = conic::solve(p, settings);

  BoundedValue v;
  copy_status(v, sol);
  v.relaxation = relax.kind;
  v.epsilon = eps;
  v.direction = Direction::lower;
  v.log_scale = true;
  v.value = log2_clamped(sol.primal_value);
  const CMat fp = sol.value(free_part);
  const double tr = fp.trace().real();
  v.free_object = tr > 1e-12 ? CMat(fp / tr) : CMat(n.choi());
  v.dual_witness = sol.constraint_duals.at(dom);
  v.smoothed_choi = sol.value(jp);
  return v;
}

}  // namespace

BoundedValue gen_log_robustness_channel(const ChoiChannel& n, const FreeSetRelaxation& relax, double eps,
                                        const conic::SolverSettings& settings) {
  return channel_robustness(n, relax, eps, settings, false);
}

BoundedValue std_log_robustness_channel(const ChoiChannel& n, const FreeSetRelaxation& relax, double eps,
                                        const conic::SolverSettings& settings) {
  return channel_robustness(n, relax, eps, settings, true);
}

// ---- robustness-generating power -------------------------------------------

namespace {

CVec top_eigenvector(const CMat& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (h + h.adjoint()));
  return es.eigenvectors().col(h.rows() - 1);
}

// Alternating maximization of <a (x) b| q |a (x) b> over unit vectors.
void alternate(const CMat& q, int da, int db, CVec& a, CVec& b, int rounds) {
  for (int r = 0; r < rounds; ++r) {
    CMat qa = CMat::Zero(da, da);
    for (int i = 0; i < da; ++i)
      for (int j = 0; j < da; ++j) qa(i, j) = b.adjoint() * q.block(i * db, j * db, db, db) * b;
    a = top_eigenvector(qa);
    CMat qb = CMat::Zero(db, db);
    for (int i = 0; i < da; ++i)
      for (int j = 0; j < da; ++j) qb += std::conj(a(i)) * a(j) * q.block(i * db, j * db, db, db);
    b = top_eigenvector(qb);
  }
}

}  // namespace

PowerResult rob_gen_power(const ChoiChannel& n, int restarts, std::uint64_t seed,
                          const conic::SolverSettings& settings) {
  if (restarts < 1) throw InputError("rob_gen_power needs at least one restart");
  const DimSpec& in = n.in_dims();
  const auto b_in = resolve_cut(in, {});
  const auto b_out = resolve_cut(n.out_dims(), {});
  std::vector<std::string> order;
  int da = 1, db = 1;
  for (const auto& s : in.subsystems())
    if (!b_in.count(s.label)) {
      order.push_back(s.label);
      da *= s.dim;
    }
  for (const auto& s : in.subsystems())
    if (b_in.count(s.label)) {
      order.push_back(s.label);
      db *= s.dim;
    }
  const CMat perm = permutation_operator(in, order);

  PowerResult res;
  res.bound.direction = Direction::lower;
  res.bound.relaxation = RelaxationKind::ppt_state;
  res.bound.value = 0;
  int failures = 0;
  double worst_gap = 0;

  auto evaluate = [&](const CVec& a, const CVec& b, CMat& w) -> std::optional<double> {
    const CVec psi = perm.adjoint() * kron(a, b);
    const DensityMatrix sigma = DensityMatrix::pure(in, psi);
    const DensityMatrix out = apply(n, sigma);
    const BoundedValue r = gen_robustness_state(out, b_out, settings);
    ++res.evaluations;
    if (!r.ok()) {
      ++failures;
      return std::nullopt;
    }
    worst_gap = std::max(worst_gap, r.duality_gap);
    w = r.dual_witness;
    return r.value;
  };

  Rng rng(seed);
  bool have = false;
  for (int r = 0; r < restarts; ++r) {
    CVec a = random_pure_state(da, rng);
    CVec b = random_pure_state(db, rng);
    CMat w;
    auto f = evaluate(a, b, w);
    if (!f) continue;
    for (int step = 0; step < 25; ++step) {
      const CMat q = perm * apply_adjoint(n, w) * perm.adjoint();
      CVec a2 = a, b2 = b;
      alternate(q, da, db, a2, b2, 8);
      CMat w2;
      auto f2 = evaluate(a2, b2, w2);
      if (!f2 || *f2 <= *f + 1e-10) break;
      a = a2;
      b = b2;
      w = w2;
      f = f2;
    }
    if (!have || *f > res.bound.value) {
      have = true;
      res.bound.value = *f;
      res.best_input = DensityMatrix::pure(in, perm.adjoint() * kron(a, b)).matrix();
    }
  }
  res.bound.duality_gap = worst_gap;
  res.bound.iterations = res.evaluations;
  if (!have) {
    res.bound.status = SolveStatus::inaccurate;
    res.bound.diagnostics = "every output robustness evaluation failed";
  } else if (failures > 0) {
    res.bound.diagnostics = std::to_string(failures) + " of " + std::to_string(res.evaluations) +
                            " output evaluations failed and were skipped";
  }
  return res;
}

double max_product_overlap(int k, int restarts, std::uint64_t seed) {
  if (k < 1) throw InputError("overlap needs K >= 1");
  if (restarts < 1) throw InputError("overlap needs at least one restart");
  const CMat phi = DensityMatrix::max_entangled(k).matrix();
  Rng rng(seed);
  double best = 0;
  for (int r = 0; r < restarts; ++r) {
    CVec a = random_pure_state(k, rng);
    CVec b = random_pure_state(k, rng);
    alternate(phi, k, k, a, b, 50);
    const CVec v = kron(a, b);
    best = std::max(best, (v.adjoint() * phi * v)(0, 0).real());
  }
  return best;
}

}  // namespace entcost
