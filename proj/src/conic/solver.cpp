#include "entcost/cone_program.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace entcost::conic {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::inaccurate: return "inaccurate";
  }
  return "unknown";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Blocks = std::vector<MatrixXd>;

double inner(const Blocks& a, const Blocks& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].cwiseProduct(b[i]).sum();
  return s;
}

double norm(const Blocks& a) { return std::sqrt(inner(a, a)); }

MatrixXd sym(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

struct Scaling {
  MatrixXd r;     // W^T u = r u r^T,  W v = r^T v r
  MatrixXd rti;   // W^{-T} v = rti^T v rti
  MatrixXd p;     // (W^T W)^{-1} v = p v p
  MatrixXd pinv;  // W^T W v = pinv v pinv
  VectorXd lambda;
};

class Problem {
 public:
  explicit Problem(const ConeProgram& prog) : prog_(prog) {
    n_ = prog.num_vars;
    for (const auto& b : prog.blocks) {
      MatrixXd h = MatrixXd::Zero(b.dim, b.dim);
      for (const auto& e : b.h) h(e.row, e.col) += e.value;
      h_.push_back(h);
      nu_ += b.dim;
    }
  }

  int n() const { return n_; }
  int nu() const { return nu_; }
  const Blocks& h() const { return h_; }
  const ConeProgram& prog() const { return prog_; }

  Blocks zeros() const {
    Blocks out;
    for (const auto& b : prog_.blocks) out.push_back(MatrixXd::Zero(b.dim, b.dim));
    return out;
  }

  Blocks identity() const {
    Blocks out;
    for (const auto& b : prog_.blocks) out.push_back(MatrixXd::Identity(b.dim, b.dim));
    return out;
  }

  Blocks g(const VectorXd& x) const {
    Blocks out = zeros();
    for (std::size_t i = 0; i < prog_.blocks.size(); ++i)
      for (const auto& [k, entries] : prog_.blocks[i].columns) {
        const double xk = x(k);
        if (xk == 0.0) continue;
        for (const auto& e : entries) out[i](e.row, e.col) += xk * e.value;
      }
    return out;
  }

  VectorXd gt(const Blocks& z) const {
    VectorXd out = VectorXd::Zero(n_);
    for (std::size_t i = 0; i < prog_.blocks.size(); ++i)
      for (const auto& [k, entries] : prog_.blocks[i].columns) {
        double s = 0;
        for (const auto& e : entries) s += e.value * z[i](e.row, e.col);
        out(k) += s;
      }
    return out;
  }

 private:
  const ConeProgram& prog_;
  int n_ = 0;
  int nu_ = 0;
  Blocks h_;
};

// Solves  [0   A'  G'      ] [dx]   [r1]
//         [A   0   0       ] [dy] = [r2]
//         [G   0  -W'W     ] [dz]   [r3]
class Kkt {
 public:
  Kkt(const Problem& pb, const std::vector<Scaling>& sc) : pb_(pb), sc_(sc) {
    const auto& prog = pb.prog();
    const int n = pb.n();
    MatrixXd hmat = MatrixXd::Zero(n, n);
    for (std::size_t b = 0; b < prog.blocks.size(); ++b) {
      const auto& cols = prog.blocks[b].columns;
      const MatrixXd& p = sc[b].p;
      const int d = prog.blocks[b].dim;
      MatrixXd q(d, d);
      for (std::size_t i = 0; i < cols.size(); ++i) {
        q.setZero();
        for (const auto& e : cols[i].second) q.noalias() += e.value * p.col(e.row) * p.row(e.col);
        for (std::size_t j = 0; j <= i; ++j) {
          double s = 0;
          for (const auto& e : cols[j].second) s += e.value * q(e.row, e.col);
          hmat(cols[i].first, cols[j].first) += s;
          if (cols[i].first != cols[j].first) hmat(cols[j].first, cols[i].first) += s;
        }
      }
    }
    const MatrixXd& a = prog.a;
    MatrixXd k1 = hmat;
    if (a.rows() > 0) k1.noalias() += a.transpose() * a;
    // regularize only when the plain factorization breaks down
    const double scale = std::max(1.0, k1.diagonal().cwiseAbs().maxCoeff());
    for (double reg : {0.0, 1e-14, 1e-12, 1e-10}) {
      MatrixXd k = k1;
      k.diagonal().array() += reg * scale;
      l1_.compute(k);
      ok_ = l1_.info() == Eigen::Success;
      if (!ok_) continue;
      if (a.rows() == 0) break;
      MatrixXd s = a * l1_.solve(MatrixXd(a.transpose()));
      l2_.compute(s);
      ok_ = l2_.info() == Eigen::Success;
      if (ok_) break;
    }
  }

  bool ok() const { return ok_; }

  void solve(const VectorXd& r1, const VectorXd& r2, const Blocks& r3, VectorXd& dx, VectorXd& dy,
             Blocks& dz) const {
    raw(r1, r2, r3, dx, dy, dz);
    for (int it = 0; it < 3; ++it) {
      VectorXd e1, e2;
      Blocks e3;
      residual(r1, r2, r3, dx, dy, dz, e1, e2, e3);
      VectorXd cx, cy;
      Blocks cz;
      raw(e1, e2, e3, cx, cy, cz);
      dx += cx;
      if (dy.size()) dy += cy;
      for (std::size_t b = 0; b < dz.size(); ++b) dz[b] += cz[b];
    }
  }

 private:
  void raw(const VectorXd& r1, const VectorXd& r2, const Blocks& r3, VectorXd& dx, VectorXd& dy,
           Blocks& dz) const {
    const MatrixXd& a = pb_.prog().a;
    Blocks pr3(r3.size());
    for (std::size_t b = 0; b < r3.size(); ++b) pr3[b] = sc_[b].p * r3[b] * sc_[b].p;
    VectorXd rhs = r1 + pb_.gt(pr3);
    if (a.rows() > 0) {
      rhs += a.transpose() * r2;
      const VectorXd t = l1_.solve(rhs);
      dy = l2_.solve(a * t - r2);
      dx = l1_.solve(rhs - a.transpose() * dy);
    } else {
      dy = VectorXd();
      dx = l1_.solve(rhs);
    }
    Blocks gdx = pb_.g(dx);
    dz.resize(r3.size());
    for (std::size_t b = 0; b < r3.size(); ++b) dz[b] = sym(sc_[b].p * (gdx[b] - r3[b]) * sc_[b].p);
  }

  void residual(const VectorXd& r1, const VectorXd& r2, const Blocks& r3, const VectorXd& dx, const VectorXd& dy,
                const Blocks& dz, VectorXd& e1, VectorXd& e2, Blocks& e3) const {
    const MatrixXd& a = pb_.prog().a;
    e1 = r1 - pb_.gt(dz);
    if (a.rows() > 0) {
      e1 -= a.transpose() * dy;
      e2 = r2 - a * dx;
    } else {
      e2 = VectorXd();
    }
    Blocks gdx = pb_.g(dx);
    e3.resize(r3.size());
    for (std::size_t b = 0; b < r3.size(); ++b)
      e3[b] = r3[b] - gdx[b] + sc_[b].pinv * dz[b] * sc_[b].pinv;
  }

  const Problem& pb_;
  const std::vector<Scaling>& sc_;
  Eigen::LLT<MatrixXd> l1_;
  Eigen::LLT<MatrixXd> l2_;
  bool ok_ = true;
};

bool nt_scaling(const MatrixXd& s, const MatrixXd& z, Scaling& out) {
  Eigen::LLT<MatrixXd> cs(s), cz(z);
  if (cs.info() != Eigen::Success || cz.info() != Eigen::Success) return false;
  const MatrixXd ls = cs.matrixL();
  const MatrixXd lz = cz.matrixL();
  Eigen::JacobiSVD<MatrixXd> svd(lz.transpose() * ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VectorXd lam = svd.singularValues();
  if (lam.minCoeff() <= 0) return false;
  const VectorXd isq = lam.cwiseSqrt().cwiseInverse();
  out.r = ls * svd.matrixV() * isq.asDiagonal();
  out.rti = lz * svd.matrixU() * isq.asDiagonal();
  out.p = out.rti * out.rti.transpose();
  out.pinv = out.r * out.r.transpose();
  out.lambda = lam;
  return true;
}

// Largest step t with lambda + t * d >= 0 (in the scaled space).
double max_step(const VectorXd& lambda, const MatrixXd& d) {
  const VectorXd isq = lambda.cwiseSqrt().cwiseInverse();
  const MatrixXd m = isq.asDiagonal() * sym(d) * isq.asDiagonal();
  const double ev = Eigen::SelfAdjointEigenSolver<MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
  return ev < 0 ? -1.0 / ev : std::numeric_limits<double>::infinity();
}

// Shifts a symmetric matrix to have minimum eigenvalue at least 1 when it
// is not comfortably interior.
void make_interior(Blocks& v) {
  for (auto& m : v) {
    m = sym(m);
    const double ev = Eigen::SelfAdjointEigenSolver<MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
    if (ev < 1e-8) m.diagonal().array() += 1.0 - ev;
  }
}

MatrixXd lambda_div(const VectorXd& lam, const MatrixXd& v) {
  MatrixXd u(v.rows(), v.cols());
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = 0; j < v.cols(); ++j) u(i, j) = 2.0 * v(i, j) / (lam(i) + lam(j));
  return u;
}

// Drops dependent equality rows. Returns false if the system is inconsistent.
bool reduce_equalities(ConeProgram& prog, std::vector<Eigen::Index>& kept) {
  kept.clear();
  if (prog.a.rows() == 0) return true;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(prog.a.transpose());
  qr.setThreshold(1e-11);
  const Eigen::Index r = qr.rank();
  for (Eigen::Index i = 0; i < r; ++i) kept.push_back(qr.colsPermutation().indices()(i));
  std::sort(kept.begin(), kept.end());
  // consistency: least squares solution must satisfy all rows
  const VectorXd x0 = prog.a.colPivHouseholderQr().solve(prog.b);
  const double res = (prog.a * x0 - prog.b).norm();
  if (res > 1e-8 * std::max(1.0, prog.b.norm())) return false;
  MatrixXd a(kept.size(), prog.a.cols());
  VectorXd b(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    a.row(i) = prog.a.row(kept[i]);
    b(i) = prog.b(kept[i]);
  }
  prog.a = a;
  prog.b = b;
  return true;
}

}  // namespace

ConeSolution solve_cone_program(const ConeProgram& input, const SolverSettings& settings) {
  ConeSolution sol;
  ConeProgram prog = input;
  const Eigen::Index p_orig = input.a.rows();
  std::vector<Eigen::Index> kept;
  if (!reduce_equalities(prog, kept)) {
    sol.status = SolveStatus::infeasible;
    sol.diagnostics = "equality constraints are inconsistent";
    sol.x = VectorXd::Zero(prog.num_vars);
    sol.y = VectorXd::Zero(p_orig);
    return sol;
  }
  const Problem pb(prog);
  const int n = pb.n();
  const int nblk = static_cast<int>(prog.blocks.size());
  const VectorXd& c = prog.c;
  const VectorXd& b = prog.b;
  const Blocks& h = pb.h();

  auto expand_y = [&](const VectorXd& y) {
    VectorXd out = VectorXd::Zero(p_orig);
    for (std::size_t i = 0; i < kept.size(); ++i) out(kept[i]) = y(i);
    return out;
  };

  if (nblk == 0) {
    // pure equality program: optimal iff c lies in the row space of A
    VectorXd x0 = VectorXd::Zero(n), y0 = VectorXd::Zero(b.size());
    double res = c.norm();
    if (b.size()) {
      x0 = prog.a.colPivHouseholderQr().solve(b);
      const MatrixXd at = prog.a.transpose();
      y0 = at.colPivHouseholderQr().solve(VectorXd(-c));
      res = (at * y0 + c).norm();
    }
    sol.x = x0;
    sol.y = expand_y(y0);
    if (res <= 1e-9 * std::max(1.0, c.norm())) {
      sol.status = SolveStatus::optimal;
      sol.primal_objective = c.dot(x0);
      sol.dual_objective = b.size() ? -b.dot(y0) : 0.0;
    } else {
      sol.status = SolveStatus::unbounded;
      sol.diagnostics = "objective is unbounded on the affine feasible set";
    }
    return sol;
  }

  const double resx0 = std::max(1.0, c.norm());
  const double resy0 = std::max(1.0, b.size() ? b.norm() : 0.0);
  const double resz0 = std::max(1.0, norm(h));
  const double nu = pb.nu();

  // ---- initial point: two least-squares solves with W = I
  std::vector<Scaling> sc(nblk);
  for (int i = 0; i < nblk; ++i) {
    const int d = prog.blocks[i].dim;
    sc[i].r = sc[i].rti = sc[i].p = sc[i].pinv = MatrixXd::Identity(d, d);
    sc[i].lambda = VectorXd::Ones(d);
  }
  VectorXd x, y;
  Blocks s, z;
  {
    Kkt kkt(pb, sc);
    if (!kkt.ok()) {
      sol.status = SolveStatus::inaccurate;
      sol.diagnostics = "initial KKT factorization failed";
      return sol;
    }
    Blocks dz;
    kkt.solve(VectorXd::Zero(n), b, h, x, y, dz);
    s = dz;
    for (auto& m : s) m = -m;
    VectorXd x2;
    kkt.solve(-c, VectorXd::Zero(b.size()), pb.zeros(), x2, y, z);
    make_interior(s);
    make_interior(z);
  }
  double tau = 1.0, kappa = 1.0;

  std::ostringstream diag;
  int iter = 0;
  double pres = 0, dres = 0, pcost = 0, dcost = 0, gapv = 0;
  for (;; ++iter) {
    // residuals of the homogeneous embedding
    const Blocks gx = pb.g(x);
    VectorXd rx = pb.gt(z) + tau * c;
    VectorXd ry = tau * b;
    if (b.size()) {
      rx += prog.a.transpose() * y;
      ry -= prog.a * x;
    }
    Blocks rz(nblk);
    for (int i = 0; i < nblk; ++i) rz[i] = tau * h[i] - gx[i] - s[i];
    const double cx = c.dot(x);
    const double by = b.size() ? b.dot(y) : 0.0;
    const double hz = inner(h, z);
    const double rt = -cx - by - hz - kappa;
    const double sz = inner(s, z);
    const double mu = (sz + tau * kappa) / (nu + 1.0);

    pres = std::max(ry.norm() / resy0, norm(rz) / resz0) / tau;
    dres = rx.norm() / resx0 / tau;
    pcost = cx / tau;
    dcost = -(by + hz) / tau;
    gapv = sz / (tau * tau);
    if (settings.verbose)
      std::fprintf(stderr, "%3d pcost %+.9e dcost %+.9e gap %.2e pres %.2e dres %.2e tau %.2e kappa %.2e\n", iter,
                   pcost, dcost, gapv, pres, dres, tau, kappa);

    if (pres <= settings.feas_tol && dres <= settings.feas_tol && std::abs(pcost - dcost) <= settings.gap_tol &&
        gapv <= settings.gap_tol) {
      sol.status = SolveStatus::optimal;
      break;
    }
    // infeasibility certificates
    {
      VectorXd aty = pb.gt(z);
      if (b.size()) aty += prog.a.transpose() * y;
      if (hz + by < 0) {
        const double pinf = aty.norm() / resx0 / (-(hz + by));
        if (pinf <= settings.feas_tol) {
          sol.status = SolveStatus::infeasible;
          const double f = 1.0 / (-(hz + by));
          y *= f;
          for (auto& m : z) m *= f;
          diag << "primal infeasibility certificate found";
          break;
        }
      }
      if (cx < 0) {
        double e1 = b.size() ? (prog.a * x).norm() / resy0 : 0.0;
        Blocks gs = gx;
        for (int i = 0; i < nblk; ++i) gs[i] += s[i];
        const double dinf = std::max(e1, norm(gs) / resz0) / (-cx);
        if (dinf <= settings.feas_tol) {
          sol.status = SolveStatus::unbounded;
          const double f = 1.0 / (-cx);
          x *= f;
          for (auto& m : s) m *= f;
          diag << "primal unboundedness certificate found";
          break;
        }
      }
    }
    if (iter >= settings.max_iterations) {
      diag << "iteration limit reached";
      break;
    }

    // ---- scaling and factorization
    bool ok = true;
    for (int i = 0; i < nblk && ok; ++i) ok = nt_scaling(s[i], z[i], sc[i]);
    if (!ok) {
      diag << "iterate left the cone interior at iteration " << iter;
      break;
    }
    Kkt kkt(pb, sc);
    if (!kkt.ok()) {
      diag << "KKT factorization failed at iteration " << iter;
      break;
    }
    VectorXd x2, y2;
    Blocks z2;
    kkt.solve(-c, b, h, x2, y2, z2);
    const double denom = kappa / tau - c.dot(x2) - (b.size() ? b.dot(y2) : 0.0) - inner(h, z2);

    Blocks dsa(nblk), dza(nblk);
    double dtau_a = 0, dkappa_a = 0, sigma = 0;
    VectorXd dx, dy;
    Blocks dz(nblk), ds(nblk), dst(nblk), dzt(nblk);
    double dtau = 0, dkappa = 0, alpha = 0;
    bool step_ok = true;
    for (int phase = 0; phase < 2; ++phase) {
      const double eta = phase == 0 ? 1.0 : 1.0 - sigma;
      Blocks u(nblk), wtu(nblk);
      for (int i = 0; i < nblk; ++i) {
        const VectorXd& lam = sc[i].lambda;
        MatrixXd rhs = -MatrixXd(lam.array().square().matrix().asDiagonal());
        if (phase == 1) {
          rhs -= sym(dsa[i] * dza[i]);
          rhs.diagonal().array() += sigma * mu;
        }
        u[i] = lambda_div(lam, rhs);
        wtu[i] = sc[i].r * u[i] * sc[i].r.transpose();
      }
      double rhs_k = -tau * kappa;
      if (phase == 1) rhs_k += -dtau_a * dkappa_a + sigma * mu;
      Blocks r3(nblk);
      for (int i = 0; i < nblk; ++i) r3[i] = eta * rz[i] - wtu[i];
      VectorXd x1, y1;
      Blocks z1;
      kkt.solve(-eta * rx, eta * ry, r3, x1, y1, z1);
      dtau = (-eta * rt + rhs_k / tau + c.dot(x1) + (b.size() ? b.dot(y1) : 0.0) + inner(h, z1)) / denom;
      dx = x1 + dtau * x2;
      dy = b.size() ? VectorXd(y1 + dtau * y2) : VectorXd();
      // ds from the primal linear equation so the residual shrinks exactly
      const Blocks gdx = pb.g(dx);
      for (int i = 0; i < nblk; ++i) {
        dz[i] = z1[i] + dtau * z2[i];
        dzt[i] = sym(sc[i].r.transpose() * dz[i] * sc[i].r);
        ds[i] = sym(eta * rz[i] + dtau * h[i] - gdx[i]);
        dst[i] = sym(sc[i].rti.transpose() * ds[i] * sc[i].rti);
      }
      dkappa = (rhs_k - kappa * dtau) / tau;
      double amax = std::numeric_limits<double>::infinity();
      for (int i = 0; i < nblk; ++i) {
        amax = std::min(amax, max_step(sc[i].lambda, dst[i]));
        amax = std::min(amax, max_step(sc[i].lambda, dzt[i]));
      }
      if (dtau < 0) amax = std::min(amax, -tau / dtau);
      if (dkappa < 0) amax = std::min(amax, -kappa / dkappa);
      if (!std::isfinite(dtau) || !std::isfinite(dkappa) || !dx.allFinite()) {
        step_ok = false;
        break;
      }
      if (phase == 0) {
        const double aa = std::min(1.0, amax);
        sigma = std::pow(1.0 - aa, 3);
        dsa = dst;
        dza = dzt;
        dtau_a = dtau;
        dkappa_a = dkappa;
      } else {
        alpha = std::min(1.0, 0.99 * amax);
      }
    }
    if (!step_ok) {
      diag << "non-finite search direction at iteration " << iter;
      break;
    }
    x += alpha * dx;
    if (b.size()) y += alpha * dy;
    for (int i = 0; i < nblk; ++i) {
      z[i] = sym(z[i] + alpha * dz[i]);
      s[i] = sym(s[i] + alpha * ds[i]);
    }
    tau += alpha * dtau;
    kappa += alpha * dkappa;
    if (alpha < 1e-10) {
      diag << "step length collapsed at iteration " << iter;
      break;
    }
  }

  sol.iterations = iter;
  sol.primal_residual = pres;
  sol.dual_residual = dres;
  if (sol.status == SolveStatus::optimal || sol.status == SolveStatus::inaccurate) {
    x /= tau;
    if (b.size()) y /= tau;
    for (auto& m : s) m /= tau;
    for (auto& m : z) m /= tau;
    sol.primal_objective = c.dot(x);
    sol.dual_objective = -(b.size() ? b.dot(y) : 0.0) - inner(h, z);
    sol.gap = inner(s, z);
  }
  if (sol.status == SolveStatus::inaccurate) {
    diag << " (pres " << pres << ", dres " << dres << ", pcost " << pcost << ", dcost " << dcost << ", gap " << gapv
         << ")";
  }
  sol.diagnostics = diag.str();
  sol.x = x;
  sol.y = expand_y(b.size() ? y : VectorXd());
  sol.s = s;
  sol.z = z;
  return sol;
}

}  // namespace entcost::conic
