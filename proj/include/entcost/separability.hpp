#pragma once

// Explicit separability certificates for bipartite PSD operators.
//
// A certificate writes X = sum_i p_i |a_i b_i><a_i b_i| + Y with p_i >= 0
// and Y = w I/D + R, tr R = 0, ||R||_2 <= w/D. The remainder Y is then
// separable because every unit-trace operator within Hilbert-Schmidt
// distance 1/sqrt(D(D-1)) of I/D is separable.

#include "entcost/tensorcore.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace entcost {

struct ProductAtom {
  double weight;
  CVec a;
  CVec b;
};

struct SeparabilityCertificate {
  bool certified = false;
  std::string method;  ///< "rank-1 product", "product decomposition" or the failure reason
  std::vector<ProductAtom> atoms;
  double noise_weight = 0;   ///< w
  double residual_norm = 0;  ///< ||R||_2
  double margin = 0;         ///< w/D - ||R||_2 (positive when certified with noise)

  /// Recomputes the decomposition from its parts and checks the ball
  /// condition against `x`; independent of how the atoms were found.
  bool verify(const CMat& x, int da, int db) const;
};

/// Searches for a certificate of `x` on C^da (x) C^db (A factor first).
SeparabilityCertificate certify_separable(const CMat& x, int da, int db, std::uint64_t seed = 0,
                                          int max_atoms = 600);

/// Nonnegative least squares min ||A p - b||_2, p >= 0 (Lawson-Hanson).
Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_iterations = 0);

}  // namespace entcost
