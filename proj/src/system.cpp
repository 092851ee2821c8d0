#include "cqed/system.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <stdexcept>

namespace cqed {

void SystemParams::validate() const {
  if (!(g >= 0.0)) throw std::invalid_argument("SystemParams: g must be >= 0");
  if (!(gamma >= 0.0)) throw std::invalid_argument("SystemParams: gamma must be >= 0");
  if (!(kappa >= 0.0)) throw std::invalid_argument("SystemParams: kappa must be >= 0");
  if (!(omega_e > 0.0)) throw std::invalid_argument("SystemParams: omega_e must be > 0");
  if (!(omega_c > 0.0)) throw std::invalid_argument("SystemParams: omega_c must be > 0");
}

Vector9 vectorize(const Matrix3 &rho) { return Eigen::Map<const Vector9>(rho.data()); }

Matrix3 unvectorize(const Vector9 &v) { return Eigen::Map<const Matrix3>(v.data()); }

Matrix3 sigma_minus() {
  Matrix3 s = Matrix3::Zero();
  s(kG0, kE0) = 1.0;
  return s;
}

Matrix3 cavity_lowering() {
  Matrix3 a = Matrix3::Zero();
  a(kG0, kG1) = 1.0;
  return a;
}

Matrix3 jc_hamiltonian(const SystemParams &p) {
  p.validate();
  Matrix3 h = Matrix3::Zero();
  const double frame = p.rotating_frame ? p.omega_e : 0.0;
  h(kE0, kE0) = p.omega_e - frame;
  h(kG1, kG1) = p.omega_c - frame;
  h(kE0, kG1) = p.g;
  h(kG1, kE0) = p.g;
  return h;
}

namespace {

Superoperator9 dissipator(const Matrix3 &o) {
  const Matrix3 id = Matrix3::Identity();
  const Matrix3 odo = o.adjoint() * o;
  Superoperator9 d = Eigen::kroneckerProduct(o.conjugate(), o);
  d -= 0.5 * Superoperator9(Eigen::kroneckerProduct(id, odo));
  d -= 0.5 * Superoperator9(Eigen::kroneckerProduct(odo.transpose(), id));
  return d;
}

} // namespace

Superoperator9 lindblad_liouvillian(const SystemParams &p) {
  const Matrix3 h = jc_hamiltonian(p);
  const Matrix3 id = Matrix3::Identity();
  const Complex i(0.0, 1.0);
  Superoperator9 l = -i * (Superoperator9(Eigen::kroneckerProduct(id, h)) -
                           Superoperator9(Eigen::kroneckerProduct(h.transpose(), id)));
  if (p.gamma > 0.0) l += p.gamma * dissipator(sigma_minus());
  if (p.kappa > 0.0) l += p.kappa * dissipator(cavity_lowering());
  return l;
}

Superoperator9 half_step_propagator(const Superoperator9 &l0, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("half_step_propagator: dt must be > 0");
  return matrix_exponential(l0 * (0.5 * dt));
}

std::vector<DensityMatrix3> exact_lindblad_dynamics(const SystemParams &p, const DensityMatrix3 &rho0,
                                                    std::span<const double> t_grid) {
  if (!t_grid.empty() && t_grid.front() != 0.0)
    throw std::invalid_argument("exact_lindblad_dynamics: time grid must start at 0");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] >= t_grid[i - 1]))
      throw std::invalid_argument("exact_lindblad_dynamics: time grid must be ascending");
  const Superoperator9 l0 = lindblad_liouvillian(p);
  const Vector9 v0 = vectorize(rho0);
  std::vector<DensityMatrix3> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    if (t == 0.0) {
      out.push_back(rho0);
      continue;
    }
    const Superoperator9 u = matrix_exponential(l0 * t);
    out.push_back(unvectorize(u * v0));
  }
  return out;
}

double hermiticity_error(const Matrix3 &rho) { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }

double min_eigenvalue(const Matrix3 &rho) {
  const Matrix3 herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix3> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

bool is_physical(const DensityMatrix3 &rho, double tol) {
  if (!rho.allFinite()) return false;
  if (hermiticity_error(rho) > tol) return false;
  if (std::abs(rho.trace() - 1.0) > tol) return false;
  return min_eigenvalue(rho) >= -tol;
}

} // namespace cqed
