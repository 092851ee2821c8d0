#pragma once

#include "cqed/bath.hpp"
#include "cqed/tensor.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

namespace cqed {

// Compound Liouville index beta = 3 * r + s: s is the ket (row) label and r
// the bra (column) label, so beta coincides with the column-stacked position.
inline constexpr std::size_t kLiouvilleDim = 9;
inline constexpr std::size_t ket_of(std::size_t beta) { return beta % 3; }
inline constexpr std::size_t bra_of(std::size_t beta) { return beta / 3; }
inline constexpr std::size_t compound_index(std::size_t ket, std::size_t bra) { return 3 * bra + ket; }

/// Diagonal of the phonon coupling operator in the system basis.
struct CouplingDiagonal {
  std::array<double, 3> lambda{0.0, 1.0, 0.0}; // sigma^dagger sigma

  double ket(std::size_t beta) const { return lambda[ket_of(beta)]; }
  double bra(std::size_t beta) const { return lambda[bra_of(beta)]; }
};

/// Pairwise influence factor exp(-(ls_i - lr_i)(eta ls_j - conj(eta) lr_j)) where
/// i labels the later slice and j the earlier one.
Complex influence_factor(Complex eta, double ket_later, double bra_later, double ket_earlier,
                         double bra_earlier);

struct InfluenceTensor {
  std::size_t delta = 0;
  Eigen::Matrix<Complex, 9, 9> values; // values(beta_later, beta_earlier)
};

InfluenceTensor influence_tensor(const MemoryKernel &kernel, std::size_t delta,
                                 const CouplingDiagonal &coupling = {});

/// Rank-4 node T[p_out, bond_in, p_in, bond_out] =
/// delta(p_out, p_in) delta(bond_in, bond_out) b(bond_in, p_in): the bond
/// carries the later slice's compound index past an earlier slice.
DenseTensor promote_rank4(const InfluenceTensor &b);

/// Influence MPO for the k-th step. Sites are ordered oldest slice first;
/// site l multiplies slice l by b_{k-l}(beta_k, beta_l). Each site has layout
/// (p_out, bond_newer, p_in, bond_older); the newest site has a unit
/// bond_newer, the oldest a unit bond_older.
struct StepMpo {
  std::size_t step = 0;
  std::vector<DenseTensor> sites;
};

/// memory_cutoff K: lags > K contribute identity factors.
StepMpo build_step_mpo(const MemoryKernel &kernel, std::size_t k, const CouplingDiagonal &coupling = {},
                       std::optional<std::size_t> memory_cutoff = std::nullopt);

/// Contracts all bonds and returns the diagonal of the resulting operator as a
/// tensor of shape (9, ..., 9), axis l-1 indexing slice l.
DenseTensor contract_step_mpo_diagonal(const StepMpo &mpo);

/// Liouville indices grouped by their (ket, bra) coupling eigenvalue pair.
/// The influence functional depends on an earlier slice only through its
/// class, and on the later slice only through its branch; all classes with
/// equal ket and bra eigenvalues share one identity branch.
struct InfluenceClasses {
  std::vector<std::size_t> active;         // retained compound indices
  std::vector<std::size_t> class_of;       // per active position -> class id
  std::vector<std::array<double, 2>> pair; // class id -> (ket, bra) eigenvalue
  std::vector<std::size_t> branch_of;      // per active position -> branch id
  std::vector<std::array<double, 2>> branch_pair; // branch 0 = identity when present
  bool has_identity_branch = false;

  std::size_t n_classes() const { return pair.size(); }
  std::size_t n_branches() const { return branch_pair.size(); }
};

InfluenceClasses classify(const std::vector<std::size_t> &active, const CouplingDiagonal &coupling = {});

/// Branch-by-class factor matrix for lag delta (shape n_branches x n_classes).
Eigen::MatrixXcd class_influence(const InfluenceClasses &classes, Complex eta);

} // namespace cqed
