#pragma once

// Diamond-norm distance between channels, standalone and as a constraint
// block for smoothed monotones.

#include "entcost/conic.hpp"
#include "entcost/tensorcore.hpp"

namespace entcost::metrics {

struct DiamondResult {
  double half_distance = 0;
  double duality_gap = 0;
  conic::SolveStatus status = conic::SolveStatus::optimal;
  int iterations = 0;
  std::string diagnostics;
  /// Optimal input-side density matrix from the dual program.
  CMat witness_state;
  /// Discriminating operator 0 <= W <= witness_state (x) I on the Choi space.
  CMat witness_operator;
  /// tr[W (a - b)] with the unnormalized Choi difference; equals
  /// half_distance when the formulation is consistent.
  double witness_value = 0;
  /// True when the distance was settled by the trace-norm bound without a solve.
  bool short_circuit = false;
};

/// Half diamond distance (1/2)||a - b||_diamond of two channels.
DiamondResult diamond_distance(const ChoiChannel& a, const ChoiChannel& b,
                               const conic::SolverSettings& settings = {});

/// Constrains the Hermitian expression `choi` (a normalized Choi matrix on
/// center's in (x) out space) to be a valid channel within half diamond
/// distance eps of `center`. Adds positivity and trace preservation; for
/// eps = 0 the variable is pinned to the center.
void diamond_ball_constraints(conic::SdpProblem& p, const conic::MatExpr& choi, const ChoiChannel& center,
                              double eps);

/// Requires tr_out J = I/|in| for a normalized Choi expression.
void trace_preserving_constraint(conic::SdpProblem& p, const conic::MatExpr& choi, int in_dim, int out_dim);

}  // namespace entcost::metrics
