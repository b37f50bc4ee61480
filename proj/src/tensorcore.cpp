#include "entcost/tensorcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace entcost {

namespace {

constexpr double kHermRejectTol = 1e-8;
constexpr double kStateTol = 1e-10;
constexpr double kTpTol = 1e-9;

std::vector<int> strides_of(const std::vector<int>& dims) {
  std::vector<int> s(dims.size(), 1);
  for (int i = static_cast<int>(dims.size()) - 2; i >= 0; --i) s[i] = s[i + 1] * dims[i + 1];
  return s;
}

// For each full index: its index inside the `first` subsystems and inside the rest.
struct Split {
  std::vector<int> first;
  std::vector<int> rest;
  int first_dim = 1;
  int rest_dim = 1;
};

Split split_indices(const DimSpec& dims, const std::set<std::string>& first_labels) {
  const auto d = dims.dims();
  const auto labels = dims.labels();
  const int total = dims.total_dim();
  Split out;
  std::vector<bool> in_first(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    in_first[i] = first_labels.count(labels[i]) > 0;
    (in_first[i] ? out.first_dim : out.rest_dim) *= d[i];
  }
  out.first.assign(total, 0);
  out.rest.assign(total, 0);
  std::vector<int> digit(d.size(), 0);
  for (int f = 0; f < total; ++f) {
    int a = 0, b = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (in_first[i]) a = a * d[i] + digit[i];
      else b = b * d[i] + digit[i];
    }
    out.first[f] = a;
    out.rest[f] = b;
    for (int i = static_cast<int>(d.size()) - 1; i >= 0; --i) {
      if (++digit[i] < d[i]) break;
      digit[i] = 0;
    }
  }
  return out;
}

void check_square(const CMat& m, const DimSpec& dims, const char* what) {
  if (m.rows() != m.cols() || m.rows() != dims.total_dim()) {
    std::ostringstream os;
    os << what << ": matrix is " << m.rows() << "x" << m.cols() << " but dims give " << dims.total_dim();
    throw InputError(os.str());
  }
}

}  // namespace

CMat hermitian_part(const CMat& m) { return (m + m.adjoint()) * 0.5; }

// ---- DimSpec ----------------------------------------------------------------

DimSpec::DimSpec(std::initializer_list<Subsystem> subsystems)
    : DimSpec(std::vector<Subsystem>(subsystems)) {}

DimSpec::DimSpec(std::vector<Subsystem> subsystems) : subs_(std::move(subsystems)) {
  std::set<std::string> seen;
  for (const auto& s : subs_) {
    if (s.dim < 1) throw InputError("subsystem '" + s.label + "' has dimension < 1");
    if (!seen.insert(s.label).second) throw InputError("duplicate subsystem label '" + s.label + "'");
    total_ *= s.dim;
  }
}

bool DimSpec::contains(const std::string& label) const {
  return std::any_of(subs_.begin(), subs_.end(), [&](const Subsystem& s) { return s.label == label; });
}

std::size_t DimSpec::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < subs_.size(); ++i)
    if (subs_[i].label == label) return i;
  throw InputError("unknown subsystem label '" + label + "'");
}

int DimSpec::dim(const std::string& label) const { return subs_[index_of(label)].dim; }

std::vector<int> DimSpec::dims() const {
  std::vector<int> d;
  for (const auto& s : subs_) d.push_back(s.dim);
  return d;
}

std::vector<std::string> DimSpec::labels() const {
  std::vector<std::string> l;
  for (const auto& s : subs_) l.push_back(s.label);
  return l;
}

DimSpec DimSpec::subset(const std::set<std::string>& keep) const {
  std::vector<Subsystem> out;
  for (const auto& s : subs_)
    if (keep.count(s.label)) out.push_back(s);
  return DimSpec(out);
}

DimSpec DimSpec::concat(const DimSpec& other) const {
  auto all = subs_;
  all.insert(all.end(), other.subs_.begin(), other.subs_.end());
  return DimSpec(all);
}

DimSpec DimSpec::with_prefix(const std::string& prefix) const {
  auto all = subs_;
  for (auto& s : all) s.label = prefix + s.label;
  return DimSpec(all);
}

void DimSpec::require(const std::set<std::string>& labels) const {
  for (const auto& l : labels)
    if (!contains(l)) throw InputError("unknown subsystem label '" + l + "'");
}

std::set<std::string> b_side_labels(const DimSpec& dims) {
  std::set<std::string> out;
  for (const auto& s : dims.subsystems()) {
    // joint Choi labels carry an "in:" / "out:" prefix
    const auto colon = s.label.find(':');
    const std::string base = colon == std::string::npos ? s.label : s.label.substr(colon + 1);
    if (!base.empty() && base.front() == 'B') out.insert(s.label);
  }
  return out;
}

// ---- HermMatrix / DensityMatrix ---------------------------------------------

HermMatrix::HermMatrix(const CMat& m) {
  if (m.rows() != m.cols()) throw InputError("Hermitian matrix must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (m.size() > 0 && (m - m.adjoint()).cwiseAbs().maxCoeff() > kHermRejectTol * scale)
    throw InputError("matrix is not Hermitian");
  m_ = hermitian_part(m);
}

Eigen::VectorXd HermMatrix::eigenvalues() const {
  return Eigen::SelfAdjointEigenSolver<CMat>(m_, Eigen::EigenvaluesOnly).eigenvalues();
}

double HermMatrix::min_eigenvalue() const { return m_.size() == 0 ? 0.0 : eigenvalues()(0); }

DensityMatrix::DensityMatrix(DimSpec dims, const CMat& m) : dims_(std::move(dims)), m_(m) {
  check_square(m, dims_, "density matrix");
  if (std::abs(m_.trace() - 1.0) > kStateTol) throw InputError("density matrix trace differs from 1");
  if (m_.min_eigenvalue() < -kStateTol) throw InputError("density matrix is not positive semidefinite");
}

DensityMatrix DensityMatrix::pure(DimSpec dims, const CVec& psi) {
  const CVec v = psi / psi.norm();
  return DensityMatrix(std::move(dims), v * v.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(DimSpec dims) {
  const int d = dims.total_dim();
  return DensityMatrix(std::move(dims), CMat::Identity(d, d) / double(d));
}

DensityMatrix DensityMatrix::max_entangled(int k, const std::string& a, const std::string& b) {
  if (k < 1) throw InputError("Phi^K needs K >= 1");
  CVec v = CVec::Zero(k * k);
  for (int i = 0; i < k; ++i) v(i * k + i) = 1.0;
  return pure(DimSpec{{a, k}, {b, k}}, v);
}

// ---- ChoiChannel ------------------------------------------------------------

ChoiChannel::ChoiChannel(DimSpec in, DimSpec out, const CMat& choi)
    : in_(std::move(in)), out_(std::move(out)), choi_(joint_dims(), choi) {
  std::set<std::string> keep;
  for (const auto& l : in_.labels()) keep.insert("in:" + l);
  const CMat in_marginal = partial_trace(choi_.matrix(), joint_dims(), keep);
  const int d = in_.total_dim();
  const double err = (in_marginal - CMat::Identity(d, d) / double(d)).cwiseAbs().maxCoeff();
  if (err > kTpTol) {
    std::ostringstream os;
    os << "Choi matrix is not trace preserving (marginal error " << err << ")";
    throw InputError(os.str());
  }
}

DimSpec ChoiChannel::joint_dims() const { return in_.with_prefix("in:").concat(out_.with_prefix("out:")); }

ChoiChannel ChoiChannel::project(DimSpec in, DimSpec out, const CMat& choi) {
  const int din = in.total_dim();
  const int dout = out.total_dim();
  if (choi.rows() != din * dout || choi.cols() != din * dout) throw InputError("Choi matrix size mismatch");
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(choi));
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  CMat j = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  // restore tr_out J = I/din by the congruence (X (x) I) J (X (x) I), X = (din T)^{-1/2}
  CMat t = CMat::Zero(din, din);
  for (int a = 0; a < din; ++a)
    for (int b = 0; b < din; ++b) t(a, b) = j.block(a * dout, b * dout, dout, dout).trace();
  Eigen::SelfAdjointEigenSolver<CMat> et(hermitian_part(t * double(din)));
  if (et.eigenvalues().minCoeff() <= 1e-12) throw InputError("cannot project: input marginal is singular");
  const CMat x = et.eigenvectors() * et.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                 et.eigenvectors().adjoint();
  const CMat lift = kron(x, CMat::Identity(dout, dout));
  j = lift * j * lift.adjoint();
  j /= j.trace().real();
  return ChoiChannel(std::move(in), std::move(out), hermitian_part(j));
}

ChoiChannel ChoiChannel::from_state(const DensityMatrix& rho) { return ChoiChannel(DimSpec{}, rho.dims(), rho.matrix()); }

double KrausMap::completeness_error() const {
  const int d = in.total_dim();
  CMat sum = CMat::Zero(d, d);
  for (const auto& k : ops) sum += k.adjoint() * k;
  return (sum - CMat::Identity(d, d)).cwiseAbs().maxCoeff();
}

// ---- matrix calculus --------------------------------------------------------

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CVec kron(const CVec& a, const CVec& b) {
  CVec out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

CMat partial_trace(const CMat& m, const DimSpec& dims, const std::set<std::string>& keep) {
  check_square(m, dims, "partial_trace");
  dims.require(keep);
  const Split s = split_indices(dims, keep);
  std::vector<std::vector<int>> full(s.first_dim, std::vector<int>(s.rest_dim));
  for (int f = 0; f < dims.total_dim(); ++f) full[s.first[f]][s.rest[f]] = f;
  CMat out = CMat::Zero(s.first_dim, s.first_dim);
  for (int i = 0; i < s.first_dim; ++i)
    for (int j = 0; j < s.first_dim; ++j) {
      cplx acc = 0;
      for (int t = 0; t < s.rest_dim; ++t) acc += m(full[i][t], full[j][t]);
      out(i, j) = acc;
    }
  return out;
}

HermMatrix partial_trace(const HermMatrix& m, const DimSpec& dims, const std::set<std::string>& keep) {
  return HermMatrix(partial_trace(m.matrix(), dims, keep));
}

CMat partial_transpose(const CMat& m, const DimSpec& dims, const std::set<std::string>& flip) {
  check_square(m, dims, "partial_transpose");
  dims.require(flip);
  // index = (flipped part) + (kept part) as separate additive contributions
  const auto d = dims.dims();
  const auto labels = dims.labels();
  const auto st = strides_of(d);
  const int total = dims.total_dim();
  std::vector<int> flipped(total, 0), kept(total, 0);
  for (int f = 0; f < total; ++f) {
    int rem = f;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const int digit = rem / st[i];
      rem %= st[i];
      (flip.count(labels[i]) ? flipped[f] : kept[f]) += digit * st[i];
    }
  }
  CMat out(total, total);
  for (int i = 0; i < total; ++i)
    for (int j = 0; j < total; ++j) out(kept[i] + flipped[j], kept[j] + flipped[i]) = m(i, j);
  return out;
}

HermMatrix partial_transpose(const HermMatrix& m, const DimSpec& dims, const std::set<std::string>& flip) {
  return HermMatrix(partial_transpose(m.matrix(), dims, flip));
}

CMat permutation_operator(const DimSpec& dims, const std::vector<std::string>& order) {
  if (order.size() != dims.size() || std::set<std::string>(order.begin(), order.end()).size() != order.size())
    throw InputError("permutation must list every subsystem exactly once");
  std::vector<Subsystem> target;
  for (const auto& l : order) target.push_back(dims.subsystems()[dims.index_of(l)]);
  const DimSpec tdims(target);
  const auto st_new = strides_of(tdims.dims());
  const auto d = dims.dims();
  const auto st = strides_of(d);
  std::vector<int> pos(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) pos[i] = static_cast<int>(tdims.index_of(dims.labels()[i]));
  const int total = dims.total_dim();
  CMat p = CMat::Zero(total, total);
  for (int f = 0; f < total; ++f) {
    int rem = f, g = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      g += (rem / st[i]) * st_new[pos[i]];
      rem %= st[i];
    }
    p(g, f) = 1.0;
  }
  return p;
}

CMat permute_subsystems(const CMat& m, const DimSpec& dims, const std::vector<std::string>& order) {
  check_square(m, dims, "permute_subsystems");
  const CMat p = permutation_operator(dims, order);
  return p * m * p.transpose();
}

double trace_norm(const CMat& hermitian) {
  return Eigen::SelfAdjointEigenSolver<CMat>(hermitian_part(hermitian), Eigen::EigenvaluesOnly)
      .eigenvalues()
      .cwiseAbs()
      .sum();
}

double min_eigenvalue(const CMat& hermitian) {
  return Eigen::SelfAdjointEigenSolver<CMat>(hermitian_part(hermitian), Eigen::EigenvaluesOnly).eigenvalues()(0);
}

CMat psd_sqrt(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(m));
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

// ---- channels ---------------------------------------------------------------

ChoiChannel choi_from_kraus(const std::vector<CMat>& kraus, const DimSpec& in, const DimSpec& out) {
  const int din = in.total_dim();
  const int dout = out.total_dim();
  CMat sum = CMat::Zero(din, din);
  for (const auto& k : kraus) {
    if (k.rows() != dout || k.cols() != din) throw InputError("Kraus operator has wrong shape");
    sum += k.adjoint() * k;
  }
  if ((sum - CMat::Identity(din, din)).cwiseAbs().maxCoeff() > 1e-9)
    throw InputError("Kraus operators are not complete (sum K^dag K != I)");
  const int d = din * dout;
  CMat v(d, static_cast<Eigen::Index>(kraus.size()));
  for (std::size_t k = 0; k < kraus.size(); ++k)
    for (int i = 0; i < din; ++i)
      for (int o = 0; o < dout; ++o) v(i * dout + o, k) = kraus[k](o, i);
  CMat j = v * v.adjoint() / double(din);
  return ChoiChannel(in, out, hermitian_part(j));
}

ChoiChannel choi_from_kraus(const KrausMap& k) { return choi_from_kraus(k.ops, k.in, k.out); }

KrausMap kraus_from_choi(const ChoiChannel& ch, double cutoff) {
  const int din = ch.in_dim();
  const int dout = ch.out_dim();
  Eigen::SelfAdjointEigenSolver<CMat> es(ch.choi() * double(din));
  KrausMap out{ch.in_dims(), ch.out_dims(), {}};
  for (int e = static_cast<int>(es.eigenvalues().size()) - 1; e >= 0; --e) {
    const double mu = es.eigenvalues()(e);
    if (mu <= cutoff) continue;
    CMat k(dout, din);
    for (int i = 0; i < din; ++i)
      for (int o = 0; o < dout; ++o) k(o, i) = std::sqrt(mu) * es.eigenvectors()(i * dout + o, e);
    out.ops.push_back(std::move(k));
  }
  return out;
}

CMat apply_to_operator(const ChoiChannel& ch, const CMat& x) {
  const int din = ch.in_dim();
  const int dout = ch.out_dim();
  if (x.rows() != din || x.cols() != din) throw InputError("apply: input dimension mismatch");
  const CMat& j = ch.choi();
  CMat out = CMat::Zero(dout, dout);
  for (int b = 0; b < din; ++b)
    for (int a = 0; a < din; ++a) {
      const cplx w = x(b, a);
      if (w == cplx(0.0)) continue;
      out += w * j.block(b * dout, a * dout, dout, dout);
    }
  return out * double(din);
}

DensityMatrix apply(const ChoiChannel& ch, const DensityMatrix& rho) {
  if (!(rho.dims().dims() == ch.in_dims().dims())) throw InputError("apply: state dims do not match channel input");
  return DensityMatrix(ch.out_dims(), hermitian_part(apply_to_operator(ch, rho.matrix())));
}

CMat apply_adjoint(const ChoiChannel& ch, const CMat& y) {
  const int din = ch.in_dim();
  const int dout = ch.out_dim();
  if (y.rows() != dout || y.cols() != dout) throw InputError("apply_adjoint: output dimension mismatch");
  const CMat& j = ch.choi();
  CMat out(din, din);
  for (int a = 0; a < din; ++a)
    for (int b = 0; b < din; ++b) out(a, b) = (y.transpose().cwiseProduct(j.block(b * dout, a * dout, dout, dout))).sum();
  return out * double(din);
}

KrausMap compose(const KrausMap& first, const KrausMap& second) {
  if (first.out.total_dim() != second.in.total_dim()) throw InputError("compose: dimension mismatch");
  KrausMap out{first.in, second.out, {}};
  out.ops.reserve(first.ops.size() * second.ops.size());
  for (const auto& b : second.ops)
    for (const auto& a : first.ops) out.ops.push_back(b * a);
  return out;
}

ChoiChannel compose(const ChoiChannel& first, const ChoiChannel& second) {
  if (first.out_dim() != second.in_dim()) throw InputError("compose: dimension mismatch");
  return choi_from_kraus(compose(kraus_from_choi(first), kraus_from_choi(second)));
}

ChoiChannel mix(const std::vector<std::pair<double, ChoiChannel>>& parts) {
  if (parts.empty()) throw InputError("mix: no channels");
  const auto& ref = parts.front().second;
  CMat j = CMat::Zero(ref.choi().rows(), ref.choi().cols());
  for (const auto& [w, ch] : parts) {
    if (!(ch.in_dims() == ref.in_dims()) || !(ch.out_dims() == ref.out_dims()))
      throw InputError("mix: channels have different dims");
    j += w * ch.choi();
  }
  return ChoiChannel(ref.in_dims(), ref.out_dims(), j);
}

CMat lift_operator(const CMat& op, const DimSpec& full_in, const std::vector<std::string>& targets,
                   const DimSpec& produced, DimSpec* out_dims) {
  std::set<std::string> tset(targets.begin(), targets.end());
  full_in.require(tset);
  // put targets in the requested order before splitting
  std::vector<std::string> order;
  for (const auto& l : full_in.labels())
    if (!tset.count(l)) order.push_back(l);
  order.insert(order.end(), targets.begin(), targets.end());
  const CMat p = permutation_operator(full_in, order);  // |rest, targets>
  int dt = 1;
  for (const auto& t : targets) dt *= full_in.dim(t);
  const int drest = full_in.total_dim() / dt;
  if (op.cols() != dt || op.rows() != produced.total_dim()) throw InputError("lift_operator: operator shape mismatch");
  std::vector<Subsystem> rest;
  for (const auto& s : full_in.subsystems())
    if (!tset.count(s.label)) rest.push_back(s);
  DimSpec outd = DimSpec(rest).concat(produced);
  const CMat body = kron(CMat::Identity(drest, drest), op);
  if (out_dims) *out_dims = outd;
  return body * p;
}

// ---- standard objects -------------------------------------------------------

ChoiChannel identity_channel(const DimSpec& dims) {
  const int d = dims.total_dim();
  return choi_from_kraus({CMat::Identity(d, d)}, dims, dims);
}

ChoiChannel unitary_channel(const CMat& u, const DimSpec& dims) { return choi_from_kraus({u}, dims, dims); }

ChoiChannel replacer_channel(const DimSpec& in, const DensityMatrix& sigma) {
  const int din = in.total_dim();
  return ChoiChannel(in, sigma.dims(), kron(CMat::Identity(din, din) / double(din), sigma.matrix()));
}

ChoiChannel dephasing_channel(const DimSpec& dims) {
  const int d = dims.total_dim();
  std::vector<CMat> ks;
  for (int i = 0; i < d; ++i) {
    CMat k = CMat::Zero(d, d);
    k(i, i) = 1.0;
    ks.push_back(k);
  }
  return choi_from_kraus(ks, dims, dims);
}

ChoiChannel swap_channel(int d) {
  CMat u = CMat::Zero(d * d, d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) u(b * d + a, a * d + b) = 1.0;
  return unitary_channel(u, DimSpec{{"A", d}, {"B", d}});
}

ChoiChannel cnot_channel() {
  CMat u = CMat::Zero(4, 4);
  u(0, 0) = u(1, 1) = u(2, 3) = u(3, 2) = 1.0;
  return unitary_channel(u, DimSpec{{"A", 2}, {"B", 2}});
}

// ---- random instances -------------------------------------------------------

namespace {

CMat gaussian(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMat g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      const double re = n(rng);
      const double im = n(rng);
      g(i, j) = cplx(re, im) / std::sqrt(2.0);
    }
  return g;
}

// Q factor with the phase convention diag(R) > 0.
CMat orthonormalize(const CMat& g) {
  Eigen::HouseholderQR<CMat> qr(g);
  CMat q = qr.householderQ() * CMat::Identity(g.rows(), g.cols());
  const CMat r = qr.matrixQR();
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    const double a = std::abs(r(j, j));
    if (a > 0) q.col(j) *= r(j, j) / a;
  }
  return q;
}

}  // namespace

CMat random_unitary(int n, Rng& rng) { return orthonormalize(gaussian(n, n, rng)); }

CVec random_pure_state(int n, Rng& rng) {
  CVec v = gaussian(n, 1, rng).col(0);
  return v / v.norm();
}

ChoiChannel random_channel(const DimSpec& in, const DimSpec& out, int env_dim, std::uint64_t seed) {
  if (env_dim < 1) throw InputError("random_channel: env_dim must be >= 1");
  const int din = in.total_dim();
  const int dout = out.total_dim();
  if (dout * env_dim < din) throw InputError("random_channel: |out| * env_dim must be >= |in| for an isometry");
  Rng rng(seed);
  const CMat v = orthonormalize(gaussian(dout * env_dim, din, rng));
  std::vector<CMat> ks;
  for (int e = 0; e < env_dim; ++e) {
    CMat k(dout, din);
    for (int o = 0; o < dout; ++o) k.row(o) = v.row(o * env_dim + e);
    ks.push_back(k);
  }
  return choi_from_kraus(ks, in, out);
}

}  // namespace entcost
