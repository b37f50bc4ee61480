#include "entcost/separability.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace entcost {

namespace {

constexpr double kExactTol = 1e-10;

// Real coordinates of a Hermitian matrix preserving the Frobenius inner product.
Eigen::VectorXd hvec(const CMat& h) {
  const Eigen::Index d = h.rows();
  Eigen::VectorXd v(d * d);
  Eigen::Index k = 0;
  const double r2 = std::sqrt(2.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    v(k++) = h(i, i).real();
    for (Eigen::Index j = i + 1; j < d; ++j) {
      v(k++) = r2 * h(i, j).real();
      v(k++) = r2 * h(i, j).imag();
    }
  }
  return v;
}

CMat product_projector(const CVec& a, const CVec& b) {
  const CVec v = kron(a, b);
  return v * v.adjoint();
}

CVec top_eigenvector(const CMat& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (h + h.adjoint()));
  return es.eigenvectors().col(h.rows() - 1);
}

// Approximately maximizes <ab|r|ab> over unit product vectors.
double best_product(const CMat& r, int da, int db, Rng& rng, CVec& a, CVec& b) {
  double best = -std::numeric_limits<double>::infinity();
  for (int start = 0; start < 4; ++start) {
    CVec x, y;
    if (start == 0) {
      // Schmidt factors of the top eigenvector
      const CVec v = top_eigenvector(r);
      CMat m(da, db);
      for (int i = 0; i < da; ++i)
        for (int j = 0; j < db; ++j) m(i, j) = v(i * db + j);
      Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
      x = svd.matrixU().col(0);
      y = svd.matrixV().col(0).conjugate();
    } else {
      x = random_pure_state(da, rng);
      y = random_pure_state(db, rng);
    }
    for (int round = 0; round < 30; ++round) {
      CMat ra = CMat::Zero(da, da);
      for (int i = 0; i < da; ++i)
        for (int j = 0; j < da; ++j) ra(i, j) = y.adjoint() * r.block(i * db, j * db, db, db) * y;
      x = top_eigenvector(ra);
      CMat rb = CMat::Zero(db, db);
      for (int i = 0; i < da; ++i)
        for (int j = 0; j < da; ++j) rb += std::conj(x(i)) * x(j) * r.block(i * db, j * db, db, db);
      y = top_eigenvector(rb);
    }
    const CVec v = kron(x, y);
    const double val = (v.adjoint() * r * v)(0, 0).real();
    if (val > best) {
      best = val;
      a = x;
      b = y;
    }
  }
  return best;
}

}  // namespace

Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_iterations) {
  const Eigen::Index n = a.cols();
  if (max_iterations <= 0) max_iterations = static_cast<int>(3 * n + 10);
  const Eigen::MatrixXd gram = a.transpose() * a;
  const Eigen::VectorXd atb = a.transpose() * b;
  const double tol = 1e-12 * std::max(1.0, gram.diagonal().maxCoeff()) * std::max<double>(1, n);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(n, false);

  auto solve_passive = [&](Eigen::VectorXd& s) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n; ++i)
      if (passive[i]) idx.push_back(i);
    Eigen::MatrixXd g(idx.size(), idx.size());
    Eigen::VectorXd r(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      r(i) = atb(idx[i]);
      for (std::size_t j = 0; j < idx.size(); ++j) g(i, j) = gram(idx[i], idx[j]);
    }
    const Eigen::VectorXd sp = g.ldlt().solve(r);
    s = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < idx.size(); ++i) s(idx[i]) = sp(i);
  };

  for (int outer = 0; outer < max_iterations; ++outer) {
    const Eigen::VectorXd w = atb - gram * x;
    Eigen::Index j = -1;
    double wmax = tol;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!passive[i] && w(i) > wmax) {
        wmax = w(i);
        j = i;
      }
    if (j < 0) break;
    passive[j] = true;
    for (int inner = 0; inner < max_iterations; ++inner) {
      Eigen::VectorXd s;
      solve_passive(s);
      bool feasible = true;
      for (Eigen::Index i = 0; i < n; ++i)
        if (passive[i] && s(i) <= 0) feasible = false;
      if (feasible) {
        x = s;
        break;
      }
      double alpha = 1.0;
      for (Eigen::Index i = 0; i < n; ++i)
        if (passive[i] && s(i) <= 0) alpha = std::min(alpha, x(i) / (x(i) - s(i)));
      x += alpha * (s - x);
      for (Eigen::Index i = 0; i < n; ++i)
        if (passive[i] && x(i) <= tol) {
          passive[i] = false;
          x(i) = 0;
        }
    }
  }
  return x;
}

bool SeparabilityCertificate::verify(const CMat& x, int da, int db) const {
  if (!certified) return false;
  const int d = da * db;
  if (x.rows() != d) return false;
  CMat rest = x;
  for (const auto& at : atoms) {
    if (at.weight < 0) return false;
    rest -= at.weight * product_projector(at.a, at.b);
  }
  const double w = rest.trace().real();
  if (method == "rank-1 product") return rest.norm() <= 1e-9 * d * std::max(1.0, x.trace().real());
  if (w <= 0) return false;
  const CMat r = rest - (w / d) * CMat::Identity(d, d);
  return r.norm() <= w / d;
}

SeparabilityCertificate certify_separable(const CMat& x, int da, int db, std::uint64_t seed, int max_atoms) {
  const int d = da * db;
  if (x.rows() != d || x.cols() != d) throw InputError("certify_separable: operator size does not match da*db");
  const HermMatrix h(x);
  const CMat& xm = h.matrix();
  const double tr = xm.trace().real();
  SeparabilityCertificate cert;
  Eigen::SelfAdjointEigenSolver<CMat> es(xm);
  const Eigen::VectorXd ev = es.eigenvalues();

  // rank one: the single eigenvector must be a product vector
  if (d == 1 || ev(d - 2) <= kExactTol * std::max(1.0, tr)) {
    const CVec v = es.eigenvectors().col(d - 1);
    CMat m(da, db);
    for (int i = 0; i < da; ++i)
      for (int j = 0; j < db; ++j) m(i, j) = v(i * db + j);
    Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto sv = svd.singularValues();
    if (sv.size() < 2 || sv(1) <= 1e-9) {
      cert.certified = true;
      cert.method = "rank-1 product";
      cert.atoms.push_back({ev(d - 1) * sv(0) * sv(0), svd.matrixU().col(0), svd.matrixV().col(0).conjugate()});
      cert.residual_norm = 0;
      if (cert.verify(xm, da, db)) return cert;
    }
    return {false, "rank one but entangled", {}, 0, 0, 0};
  }
  const double lmin = ev(0);
  if (lmin <= kExactTol * std::max(1.0, tr)) return {false, "not full rank; no noise margin available", {}, 0, 0, 0};

  Rng rng(seed);
  SeparabilityCertificate best{false, "decomposition search did not reach the noise ball", {}, 0, 0, -1e300};
  for (double frac : {0.5, 0.3, 0.7}) {
    const double w0 = frac * d * lmin;
    const CMat target = xm - (w0 / d) * CMat::Identity(d, d);
    const Eigen::VectorXd tv = hvec(target);
    std::vector<CVec> as, bs;
    Eigen::MatrixXd cols(d * d, 0);
    Eigen::VectorXd p;
    CMat resid = target;
    auto refit = [&]() {
      p = nnls(cols, tv);
      resid = target;
      for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p(i) > 0) resid -= p(i) * product_projector(as[i], bs[i]);
    };
    double w = 0, rn = 0, margin = 0;
    auto check = [&]() {
      const double trr = resid.trace().real();
      w = w0 + trr;
      rn = (resid - (trr / d) * CMat::Identity(d, d)).norm();
      margin = w / d - rn;
      if (margin > best.margin) {
        best.margin = margin;
        best.noise_weight = w;
        best.residual_norm = rn;
      }
      return w > 0 && margin > 0;
    };
    double last = resid.norm();
    int stall = 0;
    while (static_cast<int>(as.size()) < max_atoms) {
      // add a batch of atoms aligned with the residual
      for (int k = 0; k < 8; ++k) {
        CVec a, b;
        const double gain = best_product(resid, da, db, rng, a, b);
        if (gain <= 0) break;
        as.push_back(a);
        bs.push_back(b);
        cols.conservativeResize(Eigen::NoChange, cols.cols() + 1);
        cols.col(cols.cols() - 1) = hvec(product_projector(a, b));
        // greedy step so the next atom sees a fresh residual
        const CMat proj = product_projector(a, b);
        resid -= std::max(0.0, gain) * proj;
      }
      refit();
      if (check()) {
        SeparabilityCertificate cert2;
        cert2.certified = true;
        cert2.method = "product decomposition";
        for (Eigen::Index i = 0; i < p.size(); ++i)
          if (p(i) > 0) cert2.atoms.push_back({p(i), as[i], bs[i]});
        cert2.noise_weight = w;
        cert2.residual_norm = rn;
        cert2.margin = margin;
        if (cert2.verify(xm, da, db)) return cert2;
      }
      const double now = resid.norm();
      if (now > last * 0.995) {
        if (++stall >= 6) break;
      } else {
        stall = 0;
      }
      last = std::min(last, now);
    }
  }
  best.atoms.clear();
  return best;
}

}  // namespace entcost
