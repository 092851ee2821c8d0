#pragma once

#include "cqed/tensor.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace cqed {

// Single-excitation basis of the emitter-cavity system.
inline constexpr int kG0 = 0; // |g,0>
inline constexpr int kE0 = 1; // |e,0>
inline constexpr int kG1 = 2; // |g,1>

inline constexpr double kBoltzmannEvPerK = 8.617333e-5;
inline constexpr double kFsPerInvEv = 0.6582119569; // hbar in eV fs

using Matrix3 = Eigen::Matrix3cd;
using DensityMatrix3 = Eigen::Matrix3cd;
using Vector9 = Eigen::Matrix<Complex, 9, 1>;
using Superoperator9 = Eigen::Matrix<Complex, 9, 9>;

/// Energies and rates in eV (hbar = 1).
struct SystemParams {
  double omega_e = 2.0;
  double g = 0.0;
  double omega_c = 2.0;
  double gamma = 0.0;
  double kappa = 0.0;
  bool rotating_frame = true;

  void validate() const;
};

/// Column-stacked vectorisation: vec[row + 3 * col] = rho(row, col).
Vector9 vectorize(const Matrix3 &rho);
Matrix3 unvectorize(const Vector9 &v);

Matrix3 jc_hamiltonian(const SystemParams &p);
Matrix3 sigma_minus(); // |g,0><e,0|
Matrix3 cavity_lowering(); // |g,0><g,1|

/// L0 rho = -i[H, rho] + Gamma L_sigma[rho] + kappa L_a[rho].
Superoperator9 lindblad_liouvillian(const SystemParams &p);

/// exp(L0 dt / 2)
Superoperator9 half_step_propagator(const Superoperator9 &l0, double dt);

/// rho(t) = exp(L0 t) rho0 on an ascending grid starting at 0.
std::vector<DensityMatrix3> exact_lindblad_dynamics(const SystemParams &p, const DensityMatrix3 &rho0,
                                                    std::span<const double> t_grid);

/// Hermitian within tol, unit trace within tol, eigenvalues >= -tol.
bool is_physical(const DensityMatrix3 &rho, double tol = 1e-10);
double hermiticity_error(const Matrix3 &rho);
double min_eigenvalue(const Matrix3 &rho);

inline double emitter_population(const Matrix3 &rho) { return rho(kE0, kE0).real(); }
inline double cavity_occupation(const Matrix3 &rho) { return rho(kG1, kG1).real(); }
inline Complex emitter_cavity_coherence(const Matrix3 &rho) { return rho(kE0, kG1); }

} // namespace cqed
