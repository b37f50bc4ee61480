#pragma once

// Dense Hermitian linear algebra and Choi-matrix calculus for small
// multipartite systems. Subsystem order is always the order listed in a
// DimSpec; the channel convention is (inputs) then (outputs).

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace entcost {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Rng = std::mt19937_64;

/// Malformed arguments: unknown labels, dimension mismatches, invalid states.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Subsystem {
  std::string label;
  int dim = 1;

  bool operator==(const Subsystem&) const = default;
};

/// Ordered list of labelled tensor factors.
class DimSpec {
 public:
  DimSpec() = default;
  DimSpec(std::initializer_list<Subsystem> subsystems);
  explicit DimSpec(std::vector<Subsystem> subsystems);

  const std::vector<Subsystem>& subsystems() const { return subs_; }
  std::size_t size() const { return subs_.size(); }
  bool empty() const { return subs_.empty(); }
  int total_dim() const { return total_; }

  bool contains(const std::string& label) const;
  std::size_t index_of(const std::string& label) const;
  int dim(const std::string& label) const;
  std::vector<int> dims() const;
  std::vector<std::string> labels() const;

  /// Subsystems whose labels are in `keep`, in this spec's order.
  DimSpec subset(const std::set<std::string>& keep) const;
  /// This spec followed by `other`; labels must stay unique.
  DimSpec concat(const DimSpec& other) const;
  DimSpec with_prefix(const std::string& prefix) const;

  /// Throws InputError naming the first label not present.
  void require(const std::set<std::string>& labels) const;

  bool operator==(const DimSpec& other) const { return subs_ == other.subs_; }

 private:
  std::vector<Subsystem> subs_;
  int total_ = 1;
};

/// Labels belonging to the B side of an A:B cut. By convention a subsystem
/// is on the B side when its label starts with 'B' (B, B', B1, ...).
std::set<std::string> b_side_labels(const DimSpec& dims);

/// Hermitian matrix, symmetrized on construction.
class HermMatrix {
 public:
  HermMatrix() = default;
  /// Rejects inputs whose anti-Hermitian part exceeds 1e-8 in any entry.
  explicit HermMatrix(const CMat& m);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMat& matrix() const { return m_; }
  double trace() const { return m_.trace().real(); }
  Eigen::VectorXd eigenvalues() const;
  double min_eigenvalue() const;

 private:
  CMat m_;
};

/// Unit-trace positive semidefinite operator on `dims`.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  DensityMatrix(DimSpec dims, const CMat& m);

  const DimSpec& dims() const { return dims_; }
  const CMat& matrix() const { return m_.matrix(); }
  const HermMatrix& herm() const { return m_; }
  int dim() const { return m_.dim(); }

  static DensityMatrix pure(DimSpec dims, const CVec& psi);
  static DensityMatrix maximally_mixed(DimSpec dims);
  /// |Phi^K> = sum_i |ii>/sqrt(K) on subsystems (a, b) of dimension K each.
  static DensityMatrix max_entangled(int k, const std::string& a = "A", const std::string& b = "B");

 private:
  DimSpec dims_;
  HermMatrix m_;
};

/// Channel represented by its trace-normalized Choi state
/// J = (id (x) N)(Phi^{|in|}) on (in (x) out).
class ChoiChannel {
 public:
  ChoiChannel() = default;
  /// Validates PSD (>= -1e-10) and trace preservation (1e-9).
  ChoiChannel(DimSpec in, DimSpec out, const CMat& choi);

  /// Projects a numerically perturbed Choi matrix onto the valid set:
  /// negative eigenvalues are clipped, then the input marginal is restored
  /// by a congruence. Used for solver output.
  static ChoiChannel project(DimSpec in, DimSpec out, const CMat& choi);
  /// A state viewed as a channel with trivial input.
  static ChoiChannel from_state(const DensityMatrix& rho);

  const DimSpec& in_dims() const { return in_; }
  const DimSpec& out_dims() const { return out_; }
  int in_dim() const { return in_.total_dim(); }
  int out_dim() const { return out_.total_dim(); }
  const CMat& choi() const { return choi_.matrix(); }
  const DensityMatrix& choi_state() const { return choi_; }
  /// Choi subsystems labelled "in:<label>" then "out:<label>".
  DimSpec joint_dims() const;

 private:
  DimSpec in_;
  DimSpec out_;
  DensityMatrix choi_;
};

/// Kraus representation with explicit subsystem structure.
struct KrausMap {
  DimSpec in;
  DimSpec out;
  std::vector<CMat> ops;

  /// max |sum K^dag K - I|.
  double completeness_error() const;
};

// ---- matrix calculus --------------------------------------------------------

CMat kron(const CMat& a, const CMat& b);
CVec kron(const CVec& a, const CVec& b);

CMat partial_trace(const CMat& m, const DimSpec& dims, const std::set<std::string>& keep);
HermMatrix partial_trace(const HermMatrix& m, const DimSpec& dims, const std::set<std::string>& keep);

CMat partial_transpose(const CMat& m, const DimSpec& dims, const std::set<std::string>& flip);
HermMatrix partial_transpose(const HermMatrix& m, const DimSpec& dims, const std::set<std::string>& flip);

/// Reorders tensor factors; `order` lists every label exactly once.
CMat permute_subsystems(const CMat& m, const DimSpec& dims, const std::vector<std::string>& order);
/// Basis permutation P with P|x_dims> = |x_order>, so P m P^dag reorders m.
CMat permutation_operator(const DimSpec& dims, const std::vector<std::string>& order);

/// (m + m^dag) / 2.
CMat hermitian_part(const CMat& m);
double trace_norm(const CMat& hermitian);
double min_eigenvalue(const CMat& hermitian);
/// Principal square root of a PSD matrix (negative eigenvalues clipped).
CMat psd_sqrt(const CMat& m);

// ---- channels ---------------------------------------------------------------

ChoiChannel choi_from_kraus(const std::vector<CMat>& kraus, const DimSpec& in, const DimSpec& out);
ChoiChannel choi_from_kraus(const KrausMap& k);
KrausMap kraus_from_choi(const ChoiChannel& ch, double cutoff = 1e-13);

DensityMatrix apply(const ChoiChannel& ch, const DensityMatrix& rho);
/// N(X) = |in| tr_in[(X^T (x) I) J] for any operator X on the input space.
CMat apply_to_operator(const ChoiChannel& ch, const CMat& x);
/// Adjoint map N^dag(Y) for an operator Y on the output space.
CMat apply_adjoint(const ChoiChannel& ch, const CMat& y);

/// Choi of `second` after `first`.
ChoiChannel compose(const ChoiChannel& first, const ChoiChannel& second);
/// Kraus sets composed pairwise (`second` after `first`).
KrausMap compose(const KrausMap& first, const KrausMap& second);

/// Affine mixture sum_i w_i N_i over channels with identical dims.
ChoiChannel mix(const std::vector<std::pair<double, ChoiChannel>>& parts);

/// Lifts `op` (acting on subsystems `targets`, in that order, and producing
/// `produced`) to the whole space `full_in`. The output space lists the
/// untouched subsystems in their original order followed by `produced`.
CMat lift_operator(const CMat& op, const DimSpec& full_in, const std::vector<std::string>& targets,
                   const DimSpec& produced, DimSpec* out_dims);

// ---- standard objects -------------------------------------------------------

ChoiChannel identity_channel(const DimSpec& dims);
ChoiChannel unitary_channel(const CMat& u, const DimSpec& dims);
/// rho -> tr(rho) sigma.
ChoiChannel replacer_channel(const DimSpec& in, const DensityMatrix& sigma);
/// Completely dephasing channel in the computational basis.
ChoiChannel dephasing_channel(const DimSpec& dims);
ChoiChannel swap_channel(int d);  ///< SWAP on A (x) B with |A| = |B| = d.
ChoiChannel cnot_channel();       ///< control A, target B.

// ---- random instances -------------------------------------------------------

/// Haar-distributed unitary from a Gaussian matrix (QR with phase fix).
CMat random_unitary(int n, Rng& rng);
/// Haar-distributed unit vector.
CVec random_pure_state(int n, Rng& rng);
/// Isometric dilation with an environment of dimension `env_dim`,
/// deterministic in `seed`.
ChoiChannel random_channel(const DimSpec& in, const DimSpec& out, int env_dim, std::uint64_t seed);

}  // namespace entcost
