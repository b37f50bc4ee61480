#include "entcost/simulate.hpp"

#include "entcost/conic.hpp"
#include "entcost/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace entcost {

using conic::MatExpr;
using conic::SdpProblem;

const char* to_string(PlanMethod m) { return m == PlanMethod::theorem1 ? "theorem1" : "teleport"; }

namespace {

bool is_b(const std::string& label) { return !label.empty() && label[0] == 'B'; }

struct SideSplit {
  std::vector<Subsystem> a;
  std::vector<Subsystem> b;
  int da = 1;
  int db = 1;
};

// Splits a spec into its A and B groups; A labels must come first.
SideSplit split_sides(const DimSpec& dims, const char* what) {
  SideSplit s;
  for (const auto& sub : dims.subsystems()) {
    if (is_b(sub.label)) {
      s.b.push_back(sub);
      s.db *= sub.dim;
    } else {
      if (!s.b.empty())
        throw InputError(std::string(what) + " dims must list A-side subsystems before B-side subsystems");
      s.a.push_back(sub);
      s.da *= sub.dim;
    }
  }
  return s;
}

CVec max_entangled_vector(int k) {
  CVec v = CVec::Zero(k * k);
  for (int i = 0; i < k; ++i) v(i * k + i) = 1.0 / std::sqrt(double(k));
  return v;
}

CMat clock(int d) {
  CMat z = CMat::Zero(d, d);
  for (int j = 0; j < d; ++j) z(j, j) = std::polar(1.0, 2 * M_PI * j / d);
  return z;
}

CMat shift(int d) {
  CMat x = CMat::Zero(d, d);
  for (int j = 0; j < d; ++j) x((j + 1) % d, j) = 1.0;
  return x;
}

// Teleportation Kraus operators on (data, send, recv) -> recv: Bell
// measurement on (data, send) and the matching correction on recv.
std::vector<CMat> teleport_ops(int d) {
  const CVec phi = max_entangled_vector(d);
  const CMat id = CMat::Identity(d, d);
  const CMat x = shift(d), z = clock(d);
  std::vector<CMat> ops;
  CMat xa = id;
  for (int a = 0; a < d; ++a) {
    CMat zb = id;
    for (int b = 0; b < d; ++b) {
      const CVec bell = kron(id, CMat(xa * zb)) * phi;
      const CMat meas = kron(CMat(bell.adjoint()), id);  // d x d^3
      const CMat v = double(d) * meas * kron(id, CMat(phi));
      ops.push_back(v.adjoint() * meas);
      zb = zb * z;
    }
    xa = xa * x;
  }
  return ops;
}

CMat sigma_k_state(const CMat& sigma_tilde, double lambda, int k, int dout) {
  const CMat id = CMat::Identity(dout, dout);
  return (sigma_tilde + (double(k) - lambda) * id / double(dout)) / double(k - 1);
}

// Mixes toward the maximally mixed state until m and its partial transpose are PSD.
CMat make_ppt(const CMat& m, const DimSpec& dims, const std::set<std::string>& b) {
  const int d = dims.total_dim();
  const double lo = std::min(min_eigenvalue(m), min_eigenvalue(partial_transpose(m, dims, b)));
  if (lo >= 0) return m;
  const double delta = std::min(1.0, -lo / (1.0 / d - lo) + 1e-14);
  return (1 - delta) * m + delta * CMat::Identity(d, d) / double(d);
}

std::optional<SimulationPlan> theorem1_plan(const ChoiChannel& n, double eps, const FreeSetRelaxation& relax,
                                            int k_teleport, std::uint64_t seed, const BracketOptions& options,
                                            std::string& note) {
  const int din = n.in_dim(), dout = n.out_dim(), d = din * dout;
  const DimSpec joint = n.joint_dims();
  const auto b_joint = b_side_labels(joint);
  const auto b_out = b_side_labels(n.out_dims());
  if (b_out.empty() || b_out.size() == n.out_dims().size()) {
    note = "skipped: output has no A:B cut";
    return std::nullopt;
  }

  SdpProblem p;
  MatExpr jp(n.choi());
  if (eps > 0) {
    jp = p.add_hermitian("J'", d);
    metrics::diamond_ball_constraints(p, jp, n, eps);
  }
  const MatExpr sig = p.add_hermitian("sigma", dout);
  const auto lam = p.add_scalar("lambda");
  p.add_psd(sig, "sigma psd");
  p.add_psd(conic::partial_transpose(sig, n.out_dims(), b_out), "sigma ppt");
  p.add_equality(conic::trace(sig), lam - 1.0);
  const MatExpr mixture = jp + conic::kron(CMat::Identity(din, din) / double(din), sig);
  if (relax.kind == RelaxationKind::sepp_sampled) {
    for (std::size_t s = 0; s < relax.samples.size(); ++s) {
      const MatExpr out = conic::apply_choi(mixture, din, dout, relax.samples[s].matrix());
      p.add_psd(conic::partial_transpose(out, n.out_dims(), b_out), "sample " + std::to_string(s));
    }
  } else {
    p.add_psd(conic::partial_transpose(mixture, joint, b_joint), "mixture ppt");
  }
  p.minimize(lam);
  const auto sol = conic::solve(p, options.settings);
  if (!sol.optimal()) {
    note = std::string("restricted program ") + conic::to_string(sol.status);
    return std::nullopt;
  }

  const double lambda = std::max(1.0, sol.primal_value);
  int k = std::max(1, static_cast<int>(std::ceil(lambda - 1e-9)));
  std::ostringstream os;
  os << "lambda=" << lambda << " K=" << k;
  if (k >= k_teleport) {
    note = os.str() + " not below teleport K=" + std::to_string(k_teleport);
    return std::nullopt;
  }
  int da_out = 1, db_out = 1;
  for (const auto& s : n.out_dims().subsystems()) (is_b(s.label) ? db_out : da_out) *= s.dim;
  if (k > 1 && da_out * db_out > 6) {
    note = os.str() + "; mixing state cannot be certified separable at these output dimensions";
    return std::nullopt;
  }

  const ChoiChannel n1 = eps > 0 ? ChoiChannel::project(n.in_dims(), n.out_dims(), sol.value(jp)) : n;
  std::vector<std::string> order;
  int dja = 1, djb = 1;
  for (const auto& s : joint.subsystems())
    if (!b_joint.count(s.label)) {
      order.push_back(s.label);
      dja *= s.dim;
    }
  for (const auto& s : joint.subsystems())
    if (b_joint.count(s.label)) {
      order.push_back(s.label);
      djb *= s.dim;
    }
  const CMat perm = permutation_operator(joint, order);

  // An optimum on the cone boundary may defeat the search; a larger K adds
  // noise to the mixture and is tried before giving up.
  ChoiChannel n2;
  SeparabilityCertificate cert;
  for (; k < k_teleport; ++k) {
    CMat sigma_k = CMat::Identity(dout, dout) / double(dout);
    if (k > 1)
      sigma_k = make_ppt(hermitian_part(sigma_k_state(sol.value(sig), lambda, k, dout)), n.out_dims(), b_out);
    sigma_k /= sigma_k.trace().real();
    n2 = replacer_channel(n.in_dims(), DensityMatrix(n.out_dims(), sigma_k));
    // M* = (N' + (K-1) N'') / K must be separable across the joint cut.
    const CMat x = (n1.choi() + double(k - 1) * n2.choi()) / double(k);
    const CMat xp = hermitian_part(perm * x * perm.adjoint());
    cert = certify_separable(xp, dja, djb, seed);
    if (cert.certified && cert.verify(xp, dja, djb)) break;
    if (da_out * db_out > 6) break;  // no separable mixing state is certifiable for K > 1
  }
  if (k >= k_teleport || !cert.certified) {
    note = os.str() + "; mixture not certified separable (" + cert.method + ")";
    return std::nullopt;
  }
  if (k > static_cast<int>(std::ceil(lambda - 1e-9))) os << ", certified at K=" << k;

  SimulationPlan plan;
  plan.method = PlanMethod::theorem1;
  plan.k = k;
  plan.ebits = std::log2(double(k));
  plan.lambda = lambda;
  plan.m = theorem1_channel(n1, n2, k);
  const auto dist = metrics::diamond_distance(simulated_channel(plan.m, k, n.in_dims()), n, options.settings);
  plan.achieved_error = dist.half_distance;
  if (dist.status != conic::SolveStatus::optimal || plan.achieved_error > eps + 1e-6) {
    note = os.str() + "; achieved error " + std::to_string(plan.achieved_error) + " exceeds target";
    return std::nullopt;
  }
  std::ostringstream c;
  c << "mixture " << cert.method << " (" << cert.atoms.size() << " atoms, noise weight " << cert.noise_weight
    << ", margin " << cert.margin << ")";
  if (k > 1) c << "; mixing state PPT on " << da_out << "x" << db_out;
  plan.certificate = c.str();
  note = os.str() + "; certified";
  return plan;
}

}  // namespace

DimSpec simulation_input(const DimSpec& target_in, int k) {
  if (k < 1) throw InputError("K must be at least 1");
  const auto s = split_sides(target_in, "target input");
  std::vector<Subsystem> subs = s.a;
  subs.push_back({"A'", k});
  subs.insert(subs.end(), s.b.begin(), s.b.end());
  subs.push_back({"B'", k});
  return DimSpec(subs);
}

ChoiChannel theorem1_channel(const ChoiChannel& n_prime, const ChoiChannel& n_dblprime, int k) {
  if (!(n_prime.in_dims() == n_dblprime.in_dims()) || !(n_prime.out_dims() == n_dblprime.out_dims()))
    throw InputError("theorem1_channel: N' and N'' differ in dims");
  const DimSpec full = simulation_input(n_prime.in_dims(), k);
  const std::vector<std::string> pair{"A'", "B'"};
  const DimSpec none;

  // orthonormal basis of Phi^K and its complement
  const CVec phi = max_entangled_vector(k);
  Eigen::HouseholderQR<CMat> qr{CMat(phi)};
  const CMat basis = qr.householderQ() * CMat::Identity(k * k, k * k);

  std::vector<CMat> ops;
  const auto k1 = kraus_from_choi(n_prime).ops;
  const auto k2 = kraus_from_choi(n_dblprime).ops;
  for (int m = 0; m < k * k; ++m) {
    const CVec v = m == 0 ? phi : CVec(basis.col(m));
    const CMat proj = lift_operator(CMat(v.adjoint()), full, pair, none, nullptr);
    for (const auto& op : (m == 0 ? k1 : k2)) ops.push_back(op * proj);
  }
  return choi_from_kraus(ops, full, n_prime.out_dims());
}

ChoiChannel simulated_channel(const ChoiChannel& m, int k, const DimSpec& target_in) {
  const DimSpec full = simulation_input(target_in, k);
  if (!(m.in_dims() == full)) throw InputError("simulated_channel: channel input does not match the target and K");
  std::vector<std::string> order = target_in.labels();
  order.push_back("A'");
  order.push_back("B'");
  const CMat p = permutation_operator(full, order);
  const int din = target_in.total_dim();
  const CMat v = p.adjoint() * kron(CMat::Identity(din, din), CMat(max_entangled_vector(k)));
  const ChoiChannel attach = choi_from_kraus({v}, target_in, full);
  return compose(attach, m);
}

SimulationPlan teleport_channel(const ChoiChannel& n) {
  const auto in = split_sides(n.in_dims(), "target input");
  const auto out = split_sides(n.out_dims(), "target output");
  const int da = in.da, db = in.db, ea = out.da, eb = out.db;
  const int k = da * ea;
  const DimSpec fine{{"A", da}, {"A'1", da}, {"A'2", ea}, {"B", db}, {"B'1", da}, {"B'2", ea}};
  const DimSpec none;

  std::vector<CMat> ops;
  DimSpec d1, d2, d3;
  const auto tel_in = teleport_ops(da);
  const auto tel_out = teleport_ops(ea);
  const auto nk = kraus_from_choi(n).ops;
  for (const auto& t1 : tel_in) {
    const CMat s1 = lift_operator(t1, fine, {"A", "A'1", "B'1"}, DimSpec{{"X", da}}, &d1);
    for (const auto& kj : nk) {
      const CMat s2 = lift_operator(kj, d1, {"X", "B"}, DimSpec{{"Y", ea}, {"Z", eb}}, &d2);
      for (const auto& t3 : tel_out) {
        const CMat s3 = lift_operator(t3, d2, {"Y", "B'2", "A'2"}, DimSpec{{"W", ea}}, &d3);
        ops.push_back(permutation_operator(d3, {"W", "Z"}) * s3 * s2 * s1);
      }
    }
  }
  const ChoiChannel m_fine = choi_from_kraus(ops, fine, DimSpec{{"W", ea}, {"Z", eb}});

  SimulationPlan plan;
  plan.method = PlanMethod::teleport;
  plan.k = k;
  plan.ebits = std::log2(double(k));
  plan.lambda = double(k);
  plan.m = ChoiChannel(simulation_input(n.in_dims(), k), n.out_dims(), m_fine.choi());
  plan.achieved_error = metrics::diamond_distance(simulated_channel(plan.m, k, n.in_dims()), n).half_distance;
  plan.certificate = "LOCC teleportation in both directions";
  return plan;
}

FseppDiagnostics fsepp_sample_check(const ChoiChannel& m, int samples, std::uint64_t seed, double tol) {
  if (samples < 1) throw InputError("FSEPP check needs at least one sample");
  const auto b_out = b_side_labels(m.out_dims());
  if (b_out.empty() || b_out.size() == m.out_dims().size())
    throw InputError("FSEPP check needs output subsystems on both sides of the A:B cut");
  FseppDiagnostics diag;
  diag.samples = samples;
  diag.seed = seed;
  diag.tol = tol;
  diag.worst_min_eigenvalue = std::numeric_limits<double>::infinity();
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    CVec psi = CVec::Ones(1);
    for (const auto& sub : m.in_dims().subsystems()) psi = kron(psi, random_pure_state(sub.dim, rng));
    const CMat rho = psi * psi.adjoint();
    const CMat out = hermitian_part(apply_to_operator(m, rho));
    const double e = min_eigenvalue(partial_transpose(out, m.out_dims(), b_out));
    if (e < diag.worst_min_eigenvalue) {
      diag.worst_min_eigenvalue = e;
      diag.worst_input = rho;
    }
  }
  diag.pass = diag.worst_min_eigenvalue >= -tol;
  return diag;
}

CostBracket cost_bracket(const ChoiChannel& n, double eps, const FreeSetRelaxation& relax, std::uint64_t seed,
                         const BracketOptions& options) {
  if (!(eps >= 0) || eps > 1) throw InputError("epsilon must lie in [0, 1]");
  CostBracket br;
  br.epsilon = eps;
  br.lower_certificate = gen_log_robustness_channel(n, relax, eps, options.settings);
  br.lower_bits = br.lower_certificate.value;

  SimulationPlan teleport = teleport_channel(n);
  auto t1 = theorem1_plan(n, eps, relax, teleport.k, seed, options, br.theorem1_note);
  br.upper_certificate = t1 ? std::move(*t1) : std::move(teleport);
  br.upper_certificate.fsepp = fsepp_sample_check(br.upper_certificate.m, options.fsepp_samples, seed, options.fsepp_tol);
  br.upper_bits = br.upper_certificate.ebits;
  return br;
}

}  // namespace entcost
