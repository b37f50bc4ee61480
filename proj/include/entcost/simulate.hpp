#pragma once

// Simulating channels for bipartite targets: the measurement construction
// M(rho) = N'(tr_{A'B'} Phi^K rho) + N''(tr_{A'B'} (I - Phi^K) rho), the
// double-teleportation simulation, FSEPP sampling and certified cost
// brackets.

#include "entcost/monotones.hpp"
#include "entcost/separability.hpp"
#include "entcost/tensorcore.hpp"

#include <optional>
#include <string>

namespace entcost {

enum class PlanMethod { theorem1, teleport };
const char* to_string(PlanMethod m);

struct FseppDiagnostics {
  int samples = 0;
  std::uint64_t seed = 0;
  double tol = 0;
  /// Smallest eigenvalue of any sampled output after partial transposition.
  double worst_min_eigenvalue = 0;
  bool pass = false;
  CMat worst_input;

  /// "PASS(sampled)" or "FAIL".
  std::string verdict() const { return pass ? "PASS(sampled)" : "FAIL"; }
};

struct SimulationPlan {
  PlanMethod method = PlanMethod::teleport;
  /// Simulating channel on (A, A', B, B') -> (A, B).
  ChoiChannel m;
  int k = 1;
  double ebits = 0;
  /// Half diamond distance between M(. (x) Phi^K) and the target.
  double achieved_error = 0;
  FseppDiagnostics fsepp;
  /// Real-valued robustness before rounding to K (theorem1 only).
  double lambda = 0;
  std::string certificate;
};

struct CostBracket {
  double lower_bits = 0;
  double upper_bits = 0;
  double epsilon = 0;
  BoundedValue lower_certificate;
  SimulationPlan upper_certificate;
  /// Outcome of the measurement-construction attempt, also when the teleport plan was chosen.
  std::string theorem1_note;
};

/// Input space of a simulating channel for `target_in`: A-side labels, A'
/// of dimension k, B-side labels, B' of dimension k.
DimSpec simulation_input(const DimSpec& target_in, int k);

/// Choi of M(rho) = N'(tr_{A'B'}(Phi^K rho)) + N''(tr_{A'B'}((I - Phi^K) rho)).
ChoiChannel theorem1_channel(const ChoiChannel& n_prime, const ChoiChannel& n_dblprime, int k);

/// rho -> M(rho (x) Phi^K_{A'B'}) for a simulating channel M.
ChoiChannel simulated_channel(const ChoiChannel& m, int k, const DimSpec& target_in);

/// Double-teleportation plan: teleport the A input to B's lab, apply n
/// there, teleport the A output back. K = |A_in| |A_out|. FSEPP diagnostics
/// are left empty; see fsepp_sample_check.
SimulationPlan teleport_channel(const ChoiChannel& n);

/// Random product pure inputs over every input subsystem of m; PT test on
/// the output A:B cut.
FseppDiagnostics fsepp_sample_check(const ChoiChannel& m, int samples, std::uint64_t seed, double tol = 1e-8);

struct BracketOptions {
  int fsepp_samples = 1000;
  double fsepp_tol = 1e-8;
  conic::SolverSettings settings;
};

/// Certified bracket on the one-shot cost: lower from the smoothed
/// generalized log-robustness, upper from the best certified simulation.
/// Throws InputError on bad arguments; a failed lower-bound solve is
/// reported through lower_certificate.status.
CostBracket cost_bracket(const ChoiChannel& n, double eps, const FreeSetRelaxation& relax, std::uint64_t seed,
                         const BracketOptions& options = {});

}  // namespace entcost
