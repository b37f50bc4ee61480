#pragma once

// Real conic program in the form
//
//   minimize    c'x
//   subject to  A x = b
//               G x + s = h,   s in S_+^{n_1} x ... x S_+^{n_k}
//
// with free x and its dual
//
//   maximize   -h'z - b'y
//   subject to  G'z + A'y + c = 0,   z in S_+^{n_1} x ... x S_+^{n_k}.
//
// Solved by a homogeneous self-dual interior-point method with
// Nesterov-Todd scaling and a Mehrotra predictor-corrector.

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace entcost::conic {

enum class SolveStatus { optimal, infeasible, unbounded, inaccurate };

const char* to_string(SolveStatus s);

struct SolverSettings {
  double feas_tol = 1e-8;
  double gap_tol = 1e-7;
  int max_iterations = 120;
  bool verbose = false;
};

struct SymEntry {
  int row;
  int col;
  double value;
};

/// One PSD block. `columns` holds, per variable touching the block, the
/// entries of its coefficient matrix in G (both triangles stored).
struct ConeBlock {
  int dim = 0;
  std::vector<SymEntry> h;
  std::vector<std::pair<int, std::vector<SymEntry>>> columns;
};

struct ConeProgram {
  int num_vars = 0;
  Eigen::VectorXd c;
  Eigen::MatrixXd a;  // p x n
  Eigen::VectorXd b;
  std::vector<ConeBlock> blocks;
};

struct ConeSolution {
  SolveStatus status = SolveStatus::inaccurate;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  std::vector<Eigen::MatrixXd> s;
  std::vector<Eigen::MatrixXd> z;
  double primal_objective = 0;
  double dual_objective = 0;
  double gap = 0;  ///< complementarity s'z
  double primal_residual = 0;
  double dual_residual = 0;
  int iterations = 0;
  std::string diagnostics;
};

ConeSolution solve_cone_program(const ConeProgram& prog, const SolverSettings& settings);

}  // namespace entcost::conic
