#include "entcost/conic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace entcost::conic {

namespace {

std::uint64_t key(int r, int c) { return (std::uint64_t(std::uint32_t(r)) << 32) | std::uint32_t(c); }

// Sums duplicate positions of a sparse coefficient list.
std::unordered_map<std::uint64_t, cplx> consolidate(const std::vector<MatrixEntry>& entries) {
  std::unordered_map<std::uint64_t, cplx> m;
  m.reserve(entries.size() * 2);
  for (const auto& e : entries) m[key(e.row, e.col)] += e.value;
  return m;
}

cplx lookup(const std::unordered_map<std::uint64_t, cplx>& m, int r, int c) {
  auto it = m.find(key(r, c));
  return it == m.end() ? cplx(0.0) : it->second;
}

constexpr double kDropTol = 1e-15;

}  // namespace

// ---- embedding --------------------------------------------------------------

Eigen::MatrixXd embed_hermitian(const CMat& h) {
  const Eigen::Index m = h.rows();
  Eigen::MatrixXd out(2 * m, 2 * m);
  out.topLeftCorner(m, m) = h.real();
  out.bottomRightCorner(m, m) = h.real();
  out.topRightCorner(m, m) = -h.imag();
  out.bottomLeftCorner(m, m) = h.imag();
  return out;
}

Eigen::MatrixXd embed_hermitian(const HermMatrix& h) { return embed_hermitian(h.matrix()); }

// ---- ScalarExpr -------------------------------------------------------------

void ScalarExpr::add_term(int param, double coef) {
  if (coef == 0.0) return;
  terms_[param] += coef;
}

ScalarExpr& ScalarExpr::operator+=(const ScalarExpr& o) {
  constant_ += o.constant_;
  for (const auto& [k, v] : o.terms_) terms_[k] += v;
  return *this;
}

ScalarExpr& ScalarExpr::operator-=(const ScalarExpr& o) {
  constant_ -= o.constant_;
  for (const auto& [k, v] : o.terms_) terms_[k] -= v;
  return *this;
}

ScalarExpr& ScalarExpr::operator*=(double f) {
  constant_ *= f;
  for (auto& [k, v] : terms_) v *= f;
  return *this;
}

ScalarExpr operator+(ScalarExpr a, const ScalarExpr& b) { return a += b; }
ScalarExpr operator-(ScalarExpr a, const ScalarExpr& b) { return a -= b; }
ScalarExpr operator*(double f, ScalarExpr a) { return a *= f; }

// ---- MatExpr ----------------------------------------------------------------

MatExpr::MatExpr(const CMat& constant) : dim_(static_cast<int>(constant.rows())), constant_(constant) {
  if (constant.rows() != constant.cols()) throw InputError("matrix expression must be square");
}

MatExpr MatExpr::zero(int dim) { return MatExpr(CMat::Zero(dim, dim)); }

void MatExpr::add_entry(int param, int row, int col, cplx value) { terms_[param].push_back({row, col, value}); }

MatExpr& MatExpr::operator+=(const MatExpr& o) {
  if (dim_ != o.dim_) throw InputError("matrix expression size mismatch");
  constant_ += o.constant_;
  for (const auto& [k, v] : o.terms_) {
    auto& dst = terms_[k];
    dst.insert(dst.end(), v.begin(), v.end());
  }
  return *this;
}

MatExpr& MatExpr::operator-=(const MatExpr& o) {
  if (dim_ != o.dim_) throw InputError("matrix expression size mismatch");
  constant_ -= o.constant_;
  for (const auto& [k, v] : o.terms_) {
    auto& dst = terms_[k];
    for (const auto& e : v) dst.push_back({e.row, e.col, -e.value});
  }
  return *this;
}

MatExpr& MatExpr::operator*=(double f) {
  constant_ *= f;
  for (auto& [k, v] : terms_)
    for (auto& e : v) e.value *= f;
  return *this;
}

MatExpr operator+(MatExpr a, const MatExpr& b) { return a += b; }
MatExpr operator-(MatExpr a, const MatExpr& b) { return a -= b; }
MatExpr operator*(double f, MatExpr a) { return a *= f; }
MatExpr operator+(MatExpr a, const CMat& b) { return a += MatExpr(b); }
MatExpr operator-(MatExpr a, const CMat& b) { return a -= MatExpr(b); }

MatExpr operator*(const ScalarExpr& s, const CMat& m) {
  MatExpr out(CMat(m * s.constant()));
  for (const auto& [k, v] : s.terms())
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c)
        if (m(r, c) != cplx(0.0)) out.add_entry(k, r, c, v * m(r, c));
  return out;
}

ScalarExpr trace(const MatExpr& e) {
  ScalarExpr out(e.constant().trace().real());
  for (const auto& [k, v] : e.terms())
    for (const auto& en : v)
      if (en.row == en.col) out.add_term(k, en.value.real());
  return out;
}

MatExpr partial_trace(const MatExpr& e, const DimSpec& dims, const std::set<std::string>& keep) {
  if (e.dim() != dims.total_dim()) throw InputError("partial_trace: expression size does not match dims");
  dims.require(keep);
  // per full index: kept index and traced index
  const auto d = dims.dims();
  const auto labels = dims.labels();
  const int total = dims.total_dim();
  std::vector<int> kept(total), traced(total);
  int kdim = 1;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (keep.count(labels[i])) kdim *= d[i];
  std::vector<int> digit(d.size(), 0);
  for (int f = 0; f < total; ++f) {
    int a = 0, b = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (keep.count(labels[i])) a = a * d[i] + digit[i];
      else b = b * d[i] + digit[i];
    }
    kept[f] = a;
    traced[f] = b;
    for (int i = static_cast<int>(d.size()) - 1; i >= 0; --i) {
      if (++digit[i] < d[i]) break;
      digit[i] = 0;
    }
  }
  return e.map_entries(kdim, [&](int r, int c, auto emit) {
    if (traced[r] == traced[c]) emit(kept[r], kept[c], 1.0);
  });
}

MatExpr partial_transpose(const MatExpr& e, const DimSpec& dims, const std::set<std::string>& flip) {
  if (e.dim() != dims.total_dim()) throw InputError("partial_transpose: expression size does not match dims");
  dims.require(flip);
  const auto d = dims.dims();
  const auto labels = dims.labels();
  const int total = dims.total_dim();
  std::vector<int> stride(d.size(), 1);
  for (int i = static_cast<int>(d.size()) - 2; i >= 0; --i) stride[i] = stride[i + 1] * d[i + 1];
  std::vector<int> flipped(total, 0), kept(total, 0);
  for (int f = 0; f < total; ++f) {
    int rem = f;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const int digit = rem / stride[i];
      rem %= stride[i];
      (flip.count(labels[i]) ? flipped[f] : kept[f]) += digit * stride[i];
    }
  }
  return e.map_entries(total, [&](int r, int c, auto emit) {
    emit(kept[r] + flipped[c], kept[c] + flipped[r], 1.0);
  });
}

MatExpr kron(const CMat& left, const MatExpr& e) {
  const int m = e.dim();
  const int l = static_cast<int>(left.rows());
  return e.map_entries(l * m, [&](int r, int c, auto emit) {
    for (int i = 0; i < l; ++i)
      for (int j = 0; j < l; ++j)
        if (left(i, j) != cplx(0.0)) emit(i * m + r, j * m + c, left(i, j));
  });
}

MatExpr apply_choi(const MatExpr& choi, int in_dim, int out_dim, const CMat& x) {
  if (choi.dim() != in_dim * out_dim) throw InputError("apply_choi: Choi expression size mismatch");
  if (x.rows() != in_dim || x.cols() != in_dim) throw InputError("apply_choi: input operator size mismatch");
  const double scale = in_dim;
  // J_{(b,o),(a,o')} contributes x_{ba} |o><o'|
  return choi.map_entries(out_dim, [&](int r, int c, auto emit) {
    const int b = r / out_dim, o = r % out_dim;
    const int a = c / out_dim, o2 = c % out_dim;
    const cplx w = x(b, a);
    if (w != cplx(0.0)) emit(o, o2, scale * w);
  });
}

// ---- SdpProblem -------------------------------------------------------------

MatExpr SdpProblem::add_hermitian(const std::string& name, int dim) {
  if (dim < 1) throw InputError("Hermitian variable needs dimension >= 1");
  HermitianVariable v{name, dim, num_params_};
  MatExpr e = MatExpr::zero(dim);
  int k = num_params_;
  for (int p = 0; p < dim; ++p) {
    e.add_entry(k++, p, p, 1.0);
    for (int q = p + 1; q < dim; ++q) {
      e.add_entry(k, p, q, 1.0);
      e.add_entry(k, q, p, 1.0);
      ++k;
      e.add_entry(k, p, q, cplx(0.0, 1.0));
      e.add_entry(k, q, p, cplx(0.0, -1.0));
      ++k;
    }
  }
  num_params_ = k;
  herm_vars_.push_back(v);
  return e;
}

ScalarExpr SdpProblem::add_scalar(const std::string& name) {
  scalar_vars_.push_back({name, num_params_});
  ScalarExpr e;
  e.add_term(num_params_, 1.0);
  ++num_params_;
  return e;
}

void SdpProblem::add_equality(const MatExpr& lhs, const MatExpr& rhs) { mat_eq_.push_back(lhs - rhs); }
void SdpProblem::add_equality(const MatExpr& lhs, const CMat& rhs) { mat_eq_.push_back(lhs - rhs); }
void SdpProblem::add_equality(const ScalarExpr& lhs, const ScalarExpr& rhs) { scalar_eq_.push_back(lhs - rhs); }

int SdpProblem::add_psd(const MatExpr& expr, const std::string& name) {
  psd_.push_back({name, expr});
  return static_cast<int>(psd_.size()) - 1;
}

int SdpProblem::add_nonnegative(const ScalarExpr& expr, const std::string& name) {
  return add_psd(expr * CMat::Identity(1, 1), name);
}

void SdpProblem::minimize(const ScalarExpr& objective) {
  objective_ = objective;
  maximize_ = false;
}

void SdpProblem::maximize(const ScalarExpr& objective) {
  objective_ = objective;
  maximize_ = true;
}

void SdpProblem::validate() const {
  auto check_params = [&](int k) {
    if (k < 0 || k >= num_params_) throw InputError("expression references an undeclared variable");
  };
  auto check_expr = [&](const MatExpr& e, const std::string& what) {
    if ((e.constant() - e.constant().adjoint()).cwiseAbs().maxCoeff() > 1e-10)
      throw InputError(what + ": constant part is not Hermitian");
    for (const auto& [k, v] : e.terms()) {
      check_params(k);
      const auto m = consolidate(v);
      for (const auto& [pos, val] : m) {
        const int r = int(pos >> 32), c = int(pos & 0xffffffffu);
        if (std::abs(lookup(m, c, r) - std::conj(val)) > 1e-10)
          throw InputError(what + ": coefficient matrix is not Hermitian");
      }
    }
  };
  for (const auto& e : mat_eq_) check_expr(e, "equality");
  for (const auto& c : psd_) check_expr(c.expr, "PSD constraint '" + c.name + "'");
  for (const auto& e : scalar_eq_)
    for (const auto& [k, v] : e.terms()) check_params(k);
  for (const auto& [k, v] : objective_.terms()) check_params(k);
}

// ---- lowering ---------------------------------------------------------------

namespace {

bool is_real_scalar(const MatExpr& e) {
  if (e.dim() != 1) return false;
  if (std::abs(e.constant()(0, 0).imag()) > 0) return false;
  for (const auto& [k, v] : e.terms())
    for (const auto& en : v)
      if (en.value.imag() != 0.0) return false;
  return true;
}

ConeBlock lower_psd(const MatExpr& e) {
  ConeBlock blk;
  if (is_real_scalar(e)) {
    blk.dim = 1;
    const double c0 = e.constant()(0, 0).real();
    if (c0 != 0.0) blk.h.push_back({0, 0, c0});
    for (const auto& [k, v] : e.terms()) {
      double s = 0;
      for (const auto& en : v) s += en.value.real();
      if (std::abs(s) > kDropTol) blk.columns.push_back({k, {{0, 0, -s}}});
    }
    return blk;
  }
  const int m = e.dim();
  blk.dim = 2 * m;
  const Eigen::MatrixXd hc = embed_hermitian(e.constant());
  for (int r = 0; r < 2 * m; ++r)
    for (int c = 0; c < 2 * m; ++c)
      if (hc(r, c) != 0.0) blk.h.push_back({r, c, hc(r, c)});
  for (const auto& [k, v] : e.terms()) {
    std::unordered_map<std::uint64_t, double> acc;
    for (const auto& en : v) {
      const double re = en.value.real(), im = en.value.imag();
      if (re != 0.0) {
        acc[key(en.row, en.col)] += re;
        acc[key(en.row + m, en.col + m)] += re;
      }
      if (im != 0.0) {
        acc[key(en.row + m, en.col)] += im;
        acc[key(en.row, en.col + m)] -= im;
      }
    }
    std::vector<SymEntry> col;
    for (const auto& [pos, val] : acc)
      if (std::abs(val) > kDropTol) col.push_back({int(pos >> 32), int(pos & 0xffffffffu), -val});
    if (col.empty()) continue;
    std::sort(col.begin(), col.end(), [](const SymEntry& a, const SymEntry& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    blk.columns.push_back({k, std::move(col)});
  }
  return blk;
}

}  // namespace

ConeProgram lower(const SdpProblem& p) {
  p.validate();
  ConeProgram prog;
  const int n = p.num_params();
  prog.num_vars = n;
  prog.c = Eigen::VectorXd::Zero(n);
  const double sign = p.is_maximization() ? -1.0 : 1.0;
  for (const auto& [k, v] : p.objective().terms()) prog.c(k) += sign * v;

  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  for (const auto& e : p.scalar_equalities()) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
    for (const auto& [k, v] : e.terms()) row(k) += v;
    rows.push_back(row);
    rhs.push_back(-e.constant());
  }
  for (const auto& e : p.matrix_equalities()) {
    const int m = e.dim();
    // one real row per upper-triangular real part and strictly upper imaginary part
    std::vector<std::unordered_map<std::uint64_t, cplx>> coef;
    std::vector<int> params;
    for (const auto& [k, v] : e.terms()) {
      params.push_back(k);
      coef.push_back(consolidate(v));
    }
    for (int r = 0; r < m; ++r)
      for (int c = r; c < m; ++c)
        for (int part = 0; part < (r == c ? 1 : 2); ++part) {
          Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
          bool any = false;
          for (std::size_t i = 0; i < params.size(); ++i) {
            const cplx v = lookup(coef[i], r, c);
            const double x = part == 0 ? v.real() : v.imag();
            if (x != 0.0) {
              row(params[i]) += x;
              any = true;
            }
          }
          const cplx c0 = e.constant()(r, c);
          const double x0 = part == 0 ? c0.real() : c0.imag();
          if (!any && x0 == 0.0) continue;
          rows.push_back(row);
          rhs.push_back(-x0);
        }
  }
  prog.a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), n);
  prog.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    prog.a.row(i) = rows[i].transpose();
    prog.b(i) = rhs[i];
  }
  for (const auto& c : p.psd_constraints()) prog.blocks.push_back(lower_psd(c.expr));
  return prog;
}

// ---- solve ------------------------------------------------------------------

namespace {

CMat complex_dual(const Eigen::MatrixXd& z, bool embedded) {
  if (!embedded) return CMat::Constant(1, 1, z(0, 0));
  const Eigen::Index m = z.rows() / 2;
  const Eigen::MatrixXd re = z.topLeftCorner(m, m) + z.bottomRightCorner(m, m);
  const Eigen::MatrixXd im = z.bottomLeftCorner(m, m) - z.topRightCorner(m, m);
  CMat y(m, m);
  y.real() = re;
  y.imag() = im;
  return (y + y.adjoint()) * 0.5;
}

}  // namespace

CMat SdpSolution::value(const MatExpr& e) const {
  CMat out = e.constant();
  for (const auto& [k, v] : e.terms())
    for (const auto& en : v) out(en.row, en.col) += params(k) * en.value;
  return out;
}

double SdpSolution::value(const ScalarExpr& e) const {
  double out = e.constant();
  for (const auto& [k, v] : e.terms()) out += params(k) * v;
  return out;
}

SdpSolution solve(const SdpProblem& p, const SolverSettings& settings) {
  const ConeProgram prog = lower(p);
  const ConeSolution cs = solve_cone_program(prog, settings);

  SdpSolution sol;
  sol.status = cs.status;
  sol.iterations = cs.iterations;
  sol.diagnostics = cs.diagnostics;
  sol.params = cs.x.size() == prog.num_vars ? cs.x : Eigen::VectorXd::Zero(prog.num_vars);
  const double sign = p.is_maximization() ? -1.0 : 1.0;
  const double c0 = p.objective().constant();
  sol.primal_value = sign * cs.primal_objective + c0;
  sol.dual_value = sign * cs.dual_objective + c0;
  sol.duality_gap = std::abs(sol.primal_value - sol.dual_value);
  sol.complementarity = cs.gap;

  for (const auto& v : p.hermitian_variables()) {
    CMat m(v.dim, v.dim);
    int k = v.offset;
    for (int r = 0; r < v.dim; ++r) {
      m(r, r) = sol.params(k++);
      for (int c = r + 1; c < v.dim; ++c) {
        const double re = sol.params(k++);
        const double im = sol.params(k++);
        m(r, c) = cplx(re, im);
        m(c, r) = cplx(re, -im);
      }
    }
    sol.variable_values[v.name] = m;
  }
  for (const auto& v : p.scalar_variables()) sol.scalar_values[v.name] = sol.params(v.param);
  for (std::size_t i = 0; i < prog.blocks.size(); ++i) {
    if (i < cs.z.size()) sol.constraint_duals.push_back(complex_dual(cs.z[i], prog.blocks[i].dim > 1));
  }

  if (sol.status == SolveStatus::optimal) {
    // contract: accepted points satisfy every PSD constraint to -feas_tol
    for (std::size_t i = 0; i < p.psd_constraints().size(); ++i) {
      const auto& c = p.psd_constraints()[i];
      const double scale = std::max(1.0, c.expr.constant().cwiseAbs().maxCoeff());
      const double ev = min_eigenvalue(sol.value(c.expr));
      if (ev < -settings.feas_tol * scale * 10.0) {
        std::ostringstream os;
        os << "PSD constraint " << i << " ('" << c.name << "') violated: min eigenvalue " << ev;
        sol.status = SolveStatus::inaccurate;
        sol.diagnostics += (sol.diagnostics.empty() ? "" : "; ") + os.str();
      }
    }
    if (sol.duality_gap > settings.gap_tol) {
      std::ostringstream os;
      os << "duality gap " << sol.duality_gap << " above tolerance";
      sol.status = SolveStatus::inaccurate;
      sol.diagnostics += (sol.diagnostics.empty() ? "" : "; ") + os.str();
    }
  }
  return sol;
}

}  // namespace entcost::conic
