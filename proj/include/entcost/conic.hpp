#pragma once

// Complex Hermitian SDP modelling. Problems are stated with Hermitian
// matrix variables and real scalars; affine matrix expressions are lowered
// once, at solve time, to a real-symmetric cone program through the
// embedding X -> [[Re X, -Im X], [Im X, Re X]].

#include "entcost/cone_program.hpp"
#include "entcost/tensorcore.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace entcost::conic {

/// Real symmetric matrix of twice the size with the same spectrum as `h`,
/// each eigenvalue doubled in multiplicity.
Eigen::MatrixXd embed_hermitian(const HermMatrix& h);
Eigen::MatrixXd embed_hermitian(const CMat& h);

struct MatrixEntry {
  int row;
  int col;
  cplx value;
};

/// Real affine function constant + sum_k a_k x_k of the problem parameters.
class ScalarExpr {
 public:
  ScalarExpr() = default;
  ScalarExpr(double constant) : constant_(constant) {}  // NOLINT: implicit by design of the DSL

  double constant() const { return constant_; }
  const std::map<int, double>& terms() const { return terms_; }
  void add_term(int param, double coef);

  ScalarExpr& operator+=(const ScalarExpr& o);
  ScalarExpr& operator-=(const ScalarExpr& o);
  ScalarExpr& operator*=(double f);

 private:
  double constant_ = 0;
  std::map<int, double> terms_;
};

ScalarExpr operator+(ScalarExpr a, const ScalarExpr& b);
ScalarExpr operator-(ScalarExpr a, const ScalarExpr& b);
ScalarExpr operator*(double f, ScalarExpr a);

/// Hermitian-matrix-valued affine function: constant + sum_k x_k F_k with
/// sparse complex coefficient matrices F_k.
class MatExpr {
 public:
  MatExpr() = default;
  explicit MatExpr(const CMat& constant);
  static MatExpr zero(int dim);

  int dim() const { return dim_; }
  const CMat& constant() const { return constant_; }
  const std::map<int, std::vector<MatrixEntry>>& terms() const { return terms_; }
  void add_entry(int param, int row, int col, cplx value);

  MatExpr& operator+=(const MatExpr& o);
  MatExpr& operator-=(const MatExpr& o);
  MatExpr& operator*=(double f);

  /// Applies a linear map given entrywise: `f(row, col, emit)` calls
  /// emit(new_row, new_col, factor) for every image of the unit E_{row,col}.
  template <class F>
  MatExpr map_entries(int new_dim, F&& f) const;

 private:
  int dim_ = 0;
  CMat constant_;
  std::map<int, std::vector<MatrixEntry>> terms_;
};

MatExpr operator+(MatExpr a, const MatExpr& b);
MatExpr operator-(MatExpr a, const MatExpr& b);
MatExpr operator*(double f, MatExpr a);
MatExpr operator+(MatExpr a, const CMat& b);
MatExpr operator-(MatExpr a, const CMat& b);
/// Scalar affine expression times a constant Hermitian matrix.
MatExpr operator*(const ScalarExpr& s, const CMat& m);

ScalarExpr trace(const MatExpr& e);
MatExpr partial_trace(const MatExpr& e, const DimSpec& dims, const std::set<std::string>& keep);
MatExpr partial_transpose(const MatExpr& e, const DimSpec& dims, const std::set<std::string>& flip);
/// left (x) e for a constant matrix `left`.
MatExpr kron(const CMat& left, const MatExpr& e);
/// Channel action on a fixed input: |in| tr_in[(x^T (x) I) J] where J is
/// the (in (x) out) Choi expression.
MatExpr apply_choi(const MatExpr& choi, int in_dim, int out_dim, const CMat& x);

/// Problem builder. Variables are declared, constraints added, then the
/// objective is set. The builder owns nothing but metadata; expressions
/// are values.
class SdpProblem {
 public:
  struct HermitianVariable {
    std::string name;
    int dim;
    int offset;  ///< first real parameter
  };
  struct ScalarVariable {
    std::string name;
    int param;
  };
  struct PsdConstraint {
    std::string name;
    MatExpr expr;
  };

  MatExpr add_hermitian(const std::string& name, int dim);
  ScalarExpr add_scalar(const std::string& name);

  void add_equality(const MatExpr& lhs, const MatExpr& rhs);
  void add_equality(const MatExpr& lhs, const CMat& rhs);
  void add_equality(const ScalarExpr& lhs, const ScalarExpr& rhs);
  /// expr >= 0 in the PSD order. Returns the constraint index.
  int add_psd(const MatExpr& expr, const std::string& name = {});
  int add_nonnegative(const ScalarExpr& expr, const std::string& name = {});

  void minimize(const ScalarExpr& objective);
  void maximize(const ScalarExpr& objective);

  int num_params() const { return num_params_; }
  const std::vector<HermitianVariable>& hermitian_variables() const { return herm_vars_; }
  const std::vector<ScalarVariable>& scalar_variables() const { return scalar_vars_; }
  const std::vector<PsdConstraint>& psd_constraints() const { return psd_; }
  const std::vector<MatExpr>& matrix_equalities() const { return mat_eq_; }
  const std::vector<ScalarExpr>& scalar_equalities() const { return scalar_eq_; }
  const ScalarExpr& objective() const { return objective_; }
  bool is_maximization() const { return maximize_; }

  /// Checks that every referenced parameter exists and constants are
  /// Hermitian; throws InputError otherwise.
  void validate() const;

 private:
  int num_params_ = 0;
  std::vector<HermitianVariable> herm_vars_;
  std::vector<ScalarVariable> scalar_vars_;
  std::vector<MatExpr> mat_eq_;
  std::vector<ScalarExpr> scalar_eq_;
  std::vector<PsdConstraint> psd_;
  ScalarExpr objective_;
  bool maximize_ = false;
};

struct SdpSolution {
  SolveStatus status = SolveStatus::inaccurate;
  double primal_value = 0;  ///< objective at the primal point, original sense
  double dual_value = 0;    ///< dual objective, original sense
  double duality_gap = 0;   ///< |primal - dual|
  double complementarity = 0;
  int iterations = 0;
  std::string diagnostics;
  Eigen::VectorXd params;
  std::map<std::string, CMat> variable_values;
  std::map<std::string, double> scalar_values;
  /// Complex dual matrix Y of each PSD constraint, normalized so that the
  /// Lagrangian term is tr(Y expr).
  std::vector<CMat> constraint_duals;

  bool optimal() const { return status == SolveStatus::optimal; }
  CMat value(const MatExpr& e) const;
  double value(const ScalarExpr& e) const;
};

/// Lowers the problem to a real cone program.
ConeProgram lower(const SdpProblem& p);

SdpSolution solve(const SdpProblem& p, const SolverSettings& settings = {});

// ---- template implementation ------------------------------------------------

template <class F>
MatExpr MatExpr::map_entries(int new_dim, F&& f) const {
  MatExpr out = MatExpr::zero(new_dim);
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c) {
      const cplx v = constant_(r, c);
      if (v == cplx(0.0)) continue;
      f(r, c, [&](int nr, int nc, cplx factor) { out.constant_(nr, nc) += factor * v; });
    }
  for (const auto& [param, entries] : terms_) {
    auto& dst = out.terms_[param];
    for (const auto& e : entries)
      f(e.row, e.col, [&](int nr, int nc, cplx factor) { dst.push_back({nr, nc, factor * e.value}); });
    if (dst.empty()) out.terms_.erase(param);
  }
  return out;
}

}  // namespace entcost::conic
