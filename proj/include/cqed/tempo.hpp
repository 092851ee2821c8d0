#pragma once

#include "cqed/bath.hpp"
#include "cqed/influence.hpp"
#include "cqed/system.hpp"
#include "cqed/tensor.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cqed {

struct EngineConfig {
  double dt = 1.0;          // eV^-1
  double svd_cutoff = 1e-6; // relative
  std::optional<std::size_t> memory_cutoff;
  std::size_t max_steps = 1000;
  std::optional<std::size_t> max_bond_dimension;

  void validate() const;
};

enum class InitialStatePolicy { physical_only, allow_unphysical };

class BondDimensionError : public std::runtime_error {
public:
  BondDimensionError(std::size_t step, std::size_t bond, std::size_t cap);
  std::size_t step() const { return step_; }
  std::size_t bond() const { return bond_; }

private:
  std::size_t step_;
  std::size_t bond_;
};

/// MPS over time slices, oldest first. Site tensors are (left, phys, right).
/// Past slices carry their influence class as physical index; the newest
/// slice carries the full index restricted to the reachable subspace.
struct AugmentedState {
  std::vector<DenseTensor> mps;
  std::size_t step = 0;
  double cumulative_discarded_weight = 0.0;
  InfluenceClasses classes;
  std::size_t dropped_slices = 0; // slices summed out beyond the memory window

  std::size_t max_bond_dimension() const;
};

/// Propagator data shared by every step of one run.
struct EngineContext {
  EngineConfig cfg;
  Superoperator9 half;
  Superoperator9 full;
  InfluenceClasses classes;
  Eigen::MatrixXcd full_active; // restricted to classes.active
  std::vector<Eigen::MatrixXcd> class_factors; // lag -> n_branches x n_classes
  Eigen::VectorXcd self_factor;                // lag 0 on active indices
  std::size_t memory = 0;                      // effective memory in steps
};

/// Compound indices reachable from the support of vec(rho0) under l0.
std::vector<std::size_t> reachable_indices(const Superoperator9 &l0, const Vector9 &v0);

EngineContext make_context(const Vector9 &v0, const EngineConfig &cfg, const SystemParams &sys,
                           const MemoryKernel &kernel);

AugmentedState initialize(const DensityMatrix3 &rho0, const EngineConfig &cfg, const SystemParams &sys,
                          const MemoryKernel &kernel,
                          InitialStatePolicy policy = InitialStatePolicy::physical_only);
AugmentedState initialize(const DensityMatrix3 &rho0, const EngineContext &ctx,
                          InitialStatePolicy policy = InitialStatePolicy::physical_only);

void step(AugmentedState &state, const EngineContext &ctx);
AugmentedState step(AugmentedState state, const EngineConfig &cfg, const SystemParams &sys,
                    const MemoryKernel &kernel);

DensityMatrix3 reduced_state(const AugmentedState &state, const EngineContext &ctx);
double state_time(const AugmentedState &state, const EngineConfig &cfg);

struct Observables {
  double p_e = 0.0;
  double n_cav = 0.0;
  Complex coherence;
  double trace = 0.0;
};
Observables observables(const DensityMatrix3 &rho);

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix3> rho;
  std::vector<Observables> obs;
  std::vector<std::size_t> bond_dim;
  std::vector<double> discarded_weight;

  std::size_t size() const { return times.size(); }
};

/// Reduced states at t = 0, dt, ..., max_steps * dt.
Trajectory run_dynamics(const DensityMatrix3 &rho0, const EngineConfig &cfg, const SystemParams &sys,
                        const MemoryKernel &kernel,
                        InitialStatePolicy policy = InitialStatePolicy::physical_only);

void write_trajectory_csv(const Trajectory &traj, std::ostream &out);

/// Dense 9^k ADT with no compression: the reduced state after k slices,
/// i.e. at t = k dt. Throws std::length_error beyond the memory budget.
DensityMatrix3 brute_force_adt(const DensityMatrix3 &rho0, std::size_t k, const EngineConfig &cfg,
                               const SystemParams &sys, const MemoryKernel &kernel,
                               std::size_t memory_budget_bytes = std::size_t{1} << 30);

/// e^{-gamma t / 2} exp(-Phi(t)) with
/// Phi = int J [(1 - cos wt) coth(w / 2kT) + i (sin wt - wt)].
Complex ibm_coherence_oracle(const SpectralDensity &j, double temperature, double gamma, double t);

} // namespace cqed
