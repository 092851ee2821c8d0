#include "cqed/tempo.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <sstream>

using namespace cqed;

namespace {

SpectralDensity single_mode(double nu, double s) {
  ModeList m;
  m.entries.push_back({nu, s});
  return broaden(m, 2.5e-3);
}

Matrix3 projector(int a) {
  Matrix3 m = Matrix3::Zero();
  m(a, a) = 1.0;
  return m;
}

Matrix3 plus_state() {
  Matrix3 m = Matrix3::Zero();
  m(kG0, kG0) = m(kE0, kE0) = m(kG0, kE0) = m(kE0, kG0) = 0.5;
  return m;
}

Matrix3 mixed_state() {
  Matrix3 m = Matrix3::Zero();
  m(kE0, kE0) = 0.5;
  m(kG1, kG1) = 0.3;
  m(kG0, kG0) = 0.2;
  m(kE0, kG1) = Complex(0.2, 0.1);
  m(kG1, kE0) = std::conj(m(kE0, kG1));
  m(kG0, kE0) = 0.1;
  m(kE0, kG0) = 0.1;
  return m;
}

double max_diff(const Matrix3 &a, const Matrix3 &b) { return (a - b).cwiseAbs().maxCoeff(); }

SystemParams coupled() {
  SystemParams p;
  p.g = 0.02;
  p.omega_c = 1.98;
  p.gamma = 0.002;
  p.kappa = 0.01;
  return p;
}

} // namespace

TEST_CASE("engine configuration validation") {
  EngineConfig c;
  CHECK_NOTHROW(c.validate());
  c.dt = 0.0;
  CHECK_THROWS(c.validate());
  c = {};
  c.svd_cutoff = -1.0;
  CHECK_THROWS(c.validate());
  c = {};
  c.max_bond_dimension = 0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("uncompressed TEMPO equals the brute-force ADT") {
  const SystemParams sys = coupled();
  const SpectralDensity j = single_mode(0.1, 0.2);
  EngineConfig cfg;
  cfg.dt = 5.0;
  cfg.svd_cutoff = 0.0;
  cfg.max_steps = 5;
  const MemoryKernel kernel = memory_kernel(j, 4.0, cfg.dt, 5);
  for (const Matrix3 &rho0 : {projector(kE0), mixed_state(), plus_state()}) {
    const Trajectory tr = run_dynamics(rho0, cfg, sys, kernel);
    REQUIRE(tr.size() == 6);
    for (std::size_t k = 1; k <= 5; ++k) {
      const Matrix3 ref = brute_force_adt(rho0, k, cfg, sys, kernel);
      CHECK(max_diff(tr.rho[k], ref) < 1e-12);
    }
  }
}

TEST_CASE("memory cutoff is honoured identically by both paths") {
  const SystemParams sys = coupled();
  EngineConfig cfg;
  cfg.dt = 5.0;
  cfg.svd_cutoff = 0.0;
  cfg.max_steps = 5;
  cfg.memory_cutoff = 2;
  const MemoryKernel kernel = memory_kernel(single_mode(0.1, 0.2), 4.0, cfg.dt, 2);
  const Trajectory tr = run_dynamics(mixed_state(), cfg, sys, kernel);
  for (std::size_t k = 3; k <= 5; ++k) CHECK(max_diff(tr.rho[k], brute_force_adt(mixed_state(), k, cfg, sys, kernel)) < 1e-12);
}

TEST_CASE("brute force refuses large k") {
  EngineConfig cfg;
  const MemoryKernel kernel = memory_kernel(zero_density(), 4.0, cfg.dt, 20);
  CHECK_THROWS_AS(brute_force_adt(projector(kE0), 9, cfg, SystemParams{}, kernel, 1 << 20), std::length_error);
  CHECK_THROWS(brute_force_adt(projector(kE0), 0, cfg, SystemParams{}, kernel));
}

TEST_CASE("zero bath reproduces Lindblad dynamics") {
  const SystemParams sys = coupled();
  EngineConfig cfg;
  cfg.dt = 1.0;
  cfg.max_steps = 300;
  const MemoryKernel kernel = memory_kernel(zero_density(), 4.0, cfg.dt, cfg.max_steps);
  for (const Matrix3 &rho0 : {projector(kE0), mixed_state()}) {
    const Trajectory tr = run_dynamics(rho0, cfg, sys, kernel);
    const auto exact = exact_lindblad_dynamics(sys, rho0, tr.times);
    double err = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k) err = std::max(err, max_diff(tr.rho[k], exact[k]));
    CHECK(err < 1e-12);
    CHECK(*std::max_element(tr.bond_dim.begin(), tr.bond_dim.end()) == 1);
  }
}

TEST_CASE("independent-boson coherence") {
  SystemParams sys;
  sys.gamma = 0.004;
  const SpectralDensity j = gaussian_density(0.05, 0.01, 0.3, FrequencyGrid{0.0, 0.15, 6001});
  EngineConfig cfg;
  cfg.dt = 2.0;
  cfg.max_steps = 60;
  cfg.svd_cutoff = 1e-9;
  const MemoryKernel kernel = memory_kernel(j, 4.0, cfg.dt, cfg.max_steps);
  const Trajectory tr = run_dynamics(plus_state(), cfg, sys, kernel);
  double err = 0.0;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const Complex ref = 0.5 * oracle::ibm_coherence(j, 4.0, sys.gamma, tr.times[k]);
    err = std::max(err, std::abs(tr.rho[k](kE0, kG0) - ref));
    CHECK(std::abs(ibm_coherence_oracle(j, 4.0, sys.gamma, tr.times[k]) - 2.0 * ref) < 1e-12);
  }
  CHECK(err < 1e-6);
}

TEST_CASE("populations are untouched by a diagonal bath") {
  SystemParams sys;
  sys.gamma = 0.004;
  EngineConfig cfg;
  cfg.dt = 5.0;
  cfg.max_steps = 40;
  const MemoryKernel kernel = memory_kernel(single_mode(0.1, 0.3), 4.0, cfg.dt, cfg.max_steps);
  const Trajectory tr = run_dynamics(projector(kE0), cfg, sys, kernel);
  for (std::size_t k = 0; k < tr.size(); ++k) CHECK(std::abs(tr.obs[k].p_e - std::exp(-sys.gamma * tr.times[k])) < 1e-8);
}

TEST_CASE("long runs stay trace preserving and Hermitian") {
  const SystemParams sys = coupled();
  EngineConfig cfg;
  cfg.dt = 2.0;
  cfg.max_steps = 1000;
  cfg.svd_cutoff = 1e-8;
  cfg.memory_cutoff = 15;
  const SpectralDensity j = superohmic_density(0.01, 0.3, FrequencyGrid{0.0, 0.3, 6001});
  const MemoryKernel kernel = memory_kernel(j, 4.0, cfg.dt, 15);
  const Trajectory tr = run_dynamics(projector(kE0), cfg, sys, kernel);
  REQUIRE(tr.size() == 1001);
  for (std::size_t k = 0; k < tr.size(); ++k) {
    CHECK(std::abs(tr.rho[k].trace() - 1.0) < 1e-6);
    CHECK(hermiticity_error(tr.rho[k]) < 1e-10);
    CHECK(tr.rho[k].allFinite());
  }
}

TEST_CASE("results converge as the SVD threshold tightens") {
  const SystemParams sys = coupled();
  const SpectralDensity j = single_mode(0.1, 0.2);
  EngineConfig cfg;
  cfg.dt = 5.0;
  cfg.max_steps = 15;
  const MemoryKernel kernel = memory_kernel(j, 4.0, cfg.dt, cfg.max_steps);
  cfg.svd_cutoff = 1e-10;
  const Trajectory ref = run_dynamics(projector(kE0), cfg, sys, kernel);
  double last = 1.0;
  for (double eps : {1e-3, 1e-5, 1e-7}) {
    cfg.svd_cutoff = eps;
    const Trajectory tr = run_dynamics(projector(kE0), cfg, sys, kernel);
    double err = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k) err = std::max(err, max_diff(tr.rho[k], ref.rho[k]));
    CHECK(err < last);
    last = err;
  }
  CHECK(last < 1e-5);
}

TEST_CASE("second-order convergence in the timestep") {
  SystemParams sys = coupled();
  sys.g = 0.01;
  const SpectralDensity j = gaussian_density(0.02, 0.005, 0.2, FrequencyGrid{0.0, 0.08, 4001});
  const double t_end = 40.0;
  auto p_e_at_end = [&](double dt) {
    EngineConfig cfg;
    cfg.dt = dt;
    cfg.svd_cutoff = 1e-10;
    cfg.max_steps = static_cast<std::size_t>(std::lround(t_end / dt));
    const MemoryKernel kernel = memory_kernel(j, 4.0, dt, cfg.max_steps);
    return run_dynamics(projector(kE0), cfg, sys, kernel).rho.back();
  };
  const Matrix3 coarse = p_e_at_end(4.0);
  const Matrix3 mid = p_e_at_end(2.0);
  const Matrix3 fine = p_e_at_end(1.0);
  const double e1 = max_diff(coarse, mid);
  const double e2 = max_diff(mid, fine);
  CHECK(e1 / e2 > 3.0);
}

TEST_CASE("bond cap is enforced") {
  const SystemParams sys = coupled();
  EngineConfig cfg;
  cfg.dt = 5.0;
  cfg.max_steps = 20;
  cfg.svd_cutoff = 1e-12;
  cfg.max_bond_dimension = 2;
  const MemoryKernel kernel = memory_kernel(single_mode(0.1, 0.3), 4.0, cfg.dt, cfg.max_steps);
  try {
    run_dynamics(projector(kE0), cfg, sys, kernel);
    FAIL("expected BondDimensionError");
  } catch (const BondDimensionError &e) {
    CHECK(e.bond() > 2);
    CHECK(e.step() >= 2);
  }
}

TEST_CASE("initial state checks") {
  const SystemParams sys = coupled();
  EngineConfig cfg;
  cfg.max_steps = 3;
  const MemoryKernel kernel = memory_kernel(zero_density(), 4.0, cfg.dt, 3);
  Matrix3 bad = Matrix3::Zero();
  bad(kE0, kE0) = 1.5;
  bad(kG0, kG0) = -0.5;
  CHECK_THROWS_AS(run_dynamics(bad, cfg, sys, kernel), std::invalid_argument);
  CHECK_NOTHROW(run_dynamics(bad, cfg, sys, kernel, InitialStatePolicy::allow_unphysical));
  CHECK_THROWS(run_dynamics(Matrix3::Zero(), cfg, sys, kernel, InitialStatePolicy::allow_unphysical));

  const MemoryKernel wrong_dt = memory_kernel(zero_density(), 4.0, 2.0, 3);
  CHECK_THROWS(run_dynamics(projector(kE0), cfg, sys, wrong_dt));
  const MemoryKernel too_short = memory_kernel(single_mode(0.1, 0.1), 4.0, cfg.dt, 1);
  CHECK_THROWS(run_dynamics(projector(kE0), cfg, sys, too_short));
}

TEST_CASE("stepping API") {
  const SystemParams sys = coupled();
  EngineConfig cfg;
  cfg.dt = 5.0;
  cfg.max_steps = 4;
  const MemoryKernel kernel = memory_kernel(single_mode(0.1, 0.2), 4.0, cfg.dt, 4);
  const EngineContext ctx = make_context(vectorize(projector(kE0)), cfg, sys, kernel);
  CHECK(ctx.classes.active.size() == 5);
  CHECK(ctx.classes.n_classes() == 4);
  CHECK(ctx.classes.n_branches() == 3);
  AugmentedState s = initialize(projector(kE0), ctx);
  CHECK(state_time(s, cfg) == 5.0);
  const AugmentedState s2 = step(s, cfg, sys, kernel);
  CHECK(s2.step == 2);
  step(s, ctx);
  CHECK(max_diff(reduced_state(s, ctx), reduced_state(s2, ctx)) < 1e-14);
  step(s, ctx);
  step(s, ctx);
  CHECK_THROWS_AS(step(s, ctx), std::out_of_range);
  CHECK_THROWS(initialize(plus_state(), ctx));
}

TEST_CASE("trajectory CSV") {
  EngineConfig cfg;
  cfg.max_steps = 2;
  const MemoryKernel kernel = memory_kernel(zero_density(), 4.0, cfg.dt, 2);
  const Trajectory tr = run_dynamics(projector(kE0), cfg, SystemParams{}, kernel);
  std::ostringstream out;
  write_trajectory_csv(tr, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t_ev_inv,t_fs,P_e,n_cav,re_coh,im_coh,trace,max_bond_dim,discarded_weight");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);
}
