#pragma once

// Resource monotones of bipartite states and channels under tractable
// relaxations of the separable / separability-preserving sets. Every value
// carries the direction in which it bounds the unrelaxed quantity.

#include "entcost/conic.hpp"
#include "entcost/tensorcore.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace entcost {

enum class Direction { lower, upper, exact };
const char* to_string(Direction d);

enum class RelaxationKind { ppt_choi, sepp_sampled, ppt_state };
const char* to_string(RelaxationKind k);
/// Parses "ppt-choi", "sepp-sampled" or "ppt-state".
RelaxationKind parse_relaxation(const std::string& s);

/// Outer approximation of the free set.
///
/// PPT_CHOI: Choi matrix PPT across the A-side:B-side cut.
/// SEPP_SAMPLED: outputs PPT on a finite list of product inputs.
/// PPT_STATE: PPT across the cut for states (trivial input only).
struct FreeSetRelaxation {
  RelaxationKind kind = RelaxationKind::ppt_choi;
  std::vector<DensityMatrix> samples;

  static FreeSetRelaxation ppt_choi();
  static FreeSetRelaxation ppt_state();
  /// `count` product pure states on the subsystems of `in`, Haar on each factor.
  static FreeSetRelaxation sepp_sampled(const DimSpec& in, int count = 64, std::uint64_t seed = 0);
};

struct BoundedValue {
  double value = 0;  ///< may be +infinity
  Direction direction = Direction::lower;
  bool log_scale = false;
  RelaxationKind relaxation = RelaxationKind::ppt_choi;
  double epsilon = 0;
  conic::SolveStatus status = conic::SolveStatus::optimal;
  double duality_gap = 0;
  int iterations = 0;
  std::string diagnostics;
  /// Optimal free object (state or normalized Choi), when one was computed.
  CMat free_object;
  /// Dual operator certifying the bound, when available.
  CMat dual_witness;
  /// Smoothed target N' (normalized Choi), for channel monotones.
  CMat smoothed_choi;

  bool ok() const { return status == conic::SolveStatus::optimal; }
};

/// log2 min{lambda : lambda J_m - J_n >= 0}; +infinity when the support of
/// J_n is not contained in that of J_m.
BoundedValue dmax_channels(const ChoiChannel& n, const ChoiChannel& m);
BoundedValue dmax_states(const DensityMatrix& rho, const DensityMatrix& sigma);

/// min{lambda : rho <= lambda omega, omega PPT across the cut, tr omega = 1}.
/// `b_side` lists the labels of rho's B group; empty means b_side_labels().
BoundedValue gen_robustness_state(const DensityMatrix& rho, const std::set<std::string>& b_side = {},
                                  const conic::SolverSettings& settings = {});
/// Standard robustness: the mixing state must also be PPT.
BoundedValue std_robustness_state(const DensityMatrix& rho, const std::set<std::string>& b_side = {},
                                  const conic::SolverSettings& settings = {});

/// Smoothed generalized log-robustness of a channel (bits).
BoundedValue gen_log_robustness_channel(const ChoiChannel& n, const FreeSetRelaxation& relax, double eps,
                                        const conic::SolverSettings& settings = {});
/// Smoothed standard log-robustness of a channel (bits).
BoundedValue std_log_robustness_channel(const ChoiChannel& n, const FreeSetRelaxation& relax, double eps,
                                        const conic::SolverSettings& settings = {});

struct PowerResult {
  BoundedValue bound;
  CMat best_input;  ///< the product pure state attaining the bound
  int evaluations = 0;
};

/// Robustness-generating power max over product inputs of the output
/// generalized robustness, by multistart ascent (a lower bound).
PowerResult rob_gen_power(const ChoiChannel& n, int restarts = 32, std::uint64_t seed = 0,
                          const conic::SolverSettings& settings = {});

/// max over product pure states a (x) b of tr(Phi^K (a (x) b)), by multistart
/// alternating maximization.
double max_product_overlap(int k, int restarts = 32, std::uint64_t seed = 0);

}  // namespace entcost
