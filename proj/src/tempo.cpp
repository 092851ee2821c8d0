#include "cqed/tempo.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace cqed {

void EngineConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("EngineConfig: dt must be > 0");
  if (!(svd_cutoff >= 0.0)) throw std::invalid_argument("EngineConfig: svd_cutoff must be >= 0");
  if (max_steps < 1) throw std::invalid_argument("EngineConfig: max_steps must be >= 1");
  if (max_bond_dimension && *max_bond_dimension < 1)
    throw std::invalid_argument("EngineConfig: max_bond_dimension must be >= 1");
}

BondDimensionError::BondDimensionError(std::size_t step, std::size_t bond, std::size_t cap)
    : std::runtime_error(fmt::format("bond dimension {} exceeds cap {} at step {}", bond, cap, step)),
      step_(step), bond_(bond) {}

std::size_t AugmentedState::max_bond_dimension() const {
  std::size_t b = 1;
  for (const auto &s : mps) b = std::max({b, s.extent(0), s.extent(2)});
  return b;
}

std::vector<std::size_t> reachable_indices(const Superoperator9 &l0, const Vector9 &v0) {
  std::array<bool, kLiouvilleDim> seen{};
  std::vector<std::size_t> frontier;
  for (std::size_t i = 0; i < kLiouvilleDim; ++i)
    if (v0(static_cast<Eigen::Index>(i)) != Complex{0.0, 0.0}) {
      seen[i] = true;
      frontier.push_back(i);
    }
  while (!frontier.empty()) {
    const std::size_t j = frontier.back();
    frontier.pop_back();
    for (std::size_t i = 0; i < kLiouvilleDim; ++i)
      if (!seen[i] && l0(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != Complex{0.0, 0.0}) {
        seen[i] = true;
        frontier.push_back(i);
      }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < kLiouvilleDim; ++i)
    if (seen[i]) out.push_back(i);
  return out;
}

namespace {

const CouplingDiagonal kCoupling{};

void check_initial(const DensityMatrix3 &rho0, InitialStatePolicy policy) {
  if (!rho0.allFinite()) throw std::invalid_argument("initial state has non-finite entries");
  if (rho0.cwiseAbs().maxCoeff() == 0.0) throw std::invalid_argument("initial state is zero");
  if (policy == InitialStatePolicy::physical_only && !is_physical(rho0, 1e-10))
    throw std::invalid_argument("initial state is not a physical density matrix");
}

// Number of lags the run needs from the kernel.
std::size_t required_lags(const EngineConfig &cfg) {
  const std::size_t horizon = cfg.max_steps - 1;
  return cfg.memory_cutoff ? std::min(*cfg.memory_cutoff, horizon) : horizon;
}

} // namespace

EngineContext make_context(const Vector9 &v0, const EngineConfig &cfg, const SystemParams &sys,
                           const MemoryKernel &kernel) {
  cfg.validate();
  if (kernel.eta.empty()) throw std::invalid_argument("memory kernel is empty");
  if (std::abs(kernel.dt - cfg.dt) > 1e-12 * cfg.dt)
    throw std::invalid_argument(fmt::format("kernel dt {} differs from engine dt {}", kernel.dt, cfg.dt));
  if (kernel.delta_max() < required_lags(cfg))
    throw std::invalid_argument(fmt::format("kernel has {} lags, run needs {}", kernel.delta_max(),
                                            required_lags(cfg)));
  EngineContext ctx;
  ctx.cfg = cfg;
  const Superoperator9 l0 = lindblad_liouvillian(sys);
  ctx.half = half_step_propagator(l0, cfg.dt);
  ctx.full = ctx.half * ctx.half;

  ctx.classes = classify(reachable_indices(l0, v0), kCoupling);
  const auto &active = ctx.classes.active;
  const InfluenceClasses &classes = ctx.classes;
  const auto na = static_cast<Eigen::Index>(active.size());
  ctx.full_active.resize(na, na);
  ctx.self_factor.resize(na);
  for (Eigen::Index i = 0; i < na; ++i) {
    const std::size_t bi = active[static_cast<std::size_t>(i)];
    ctx.self_factor(i) = influence_factor(kernel.eta[0], kCoupling.ket(bi), kCoupling.bra(bi),
                                          kCoupling.ket(bi), kCoupling.bra(bi));
    for (Eigen::Index j = 0; j < na; ++j)
      ctx.full_active(i, j) = ctx.full(static_cast<Eigen::Index>(bi),
                                       static_cast<Eigen::Index>(active[static_cast<std::size_t>(j)]));
  }

  // Lags whose factors all equal one to working precision are dropped from
  // the tail of the memory window.
  std::size_t memory = std::min(required_lags(cfg), kernel.last_nonzero_lag());
  constexpr double unit = std::numeric_limits<double>::epsilon();
  while (memory > 0 &&
         (class_influence(classes, kernel.eta[memory]).array() - Complex(1.0, 0.0)).abs().maxCoeff() <= unit)
    --memory;
  ctx.memory = memory;
  ctx.class_factors.resize(ctx.memory + 1);
  for (std::size_t d = 1; d <= ctx.memory; ++d) ctx.class_factors[d] = class_influence(classes, kernel.eta[d]);
  return ctx;
}

AugmentedState initialize(const DensityMatrix3 &rho0, const EngineContext &ctx, InitialStatePolicy policy) {
  check_initial(rho0, policy);
  const Vector9 v = ctx.half * vectorize(rho0);
  AugmentedState s;
  s.classes = ctx.classes;
  const std::size_t na = s.classes.active.size();
  for (std::size_t i = 0; i < kLiouvilleDim; ++i)
    if (v(static_cast<Eigen::Index>(i)) != Complex{0.0, 0.0} &&
        std::find(s.classes.active.begin(), s.classes.active.end(), i) == s.classes.active.end())
      throw std::invalid_argument("initial state support lies outside the engine context");
  DenseTensor site({1, na, 1});
  for (std::size_t i = 0; i < na; ++i)
    site({0, i, 0}) = ctx.self_factor(static_cast<Eigen::Index>(i)) * v(static_cast<Eigen::Index>(s.classes.active[i]));
  s.mps.push_back(std::move(site));
  s.step = 1;
  return s;
}

AugmentedState initialize(const DensityMatrix3 &rho0, const EngineConfig &cfg, const SystemParams &sys,
                          const MemoryKernel &kernel, InitialStatePolicy policy) {
  check_initial(rho0, policy);
  return initialize(rho0, make_context(vectorize(rho0), cfg, sys, kernel), policy);
}

namespace {

// Sum the oldest site over its physical index and absorb it into its neighbour.
void absorb_oldest(std::vector<DenseTensor> &mps) {
  const DenseTensor &a = mps.front();
  const std::size_t dl = a.extent(0), d = a.extent(1), dr = a.extent(2);
  Eigen::RowVectorXcd v = Eigen::RowVectorXcd::Zero(static_cast<Eigen::Index>(dr));
  const auto m = a.as_matrix(2); // (dl d) x dr, dl == 1
  for (std::size_t p = 0; p < dl * d; ++p) v += m.row(static_cast<Eigen::Index>(p));
  DenseTensor &b = mps[1];
  const std::size_t d2 = b.extent(1), dr2 = b.extent(2);
  DenseTensor nb({1, d2, dr2});
  nb.as_matrix(1) = v * b.as_matrix(1);
  b = std::move(nb);
  mps.erase(mps.begin());
}

// A'[(a,m), c, (b,m)] = A[a,c,b] B(m,c); the leftmost site has no left m.
DenseTensor apply_branch_site(const DenseTensor &a, const Eigen::MatrixXcd &b, bool leftmost) {
  const std::size_t dl = a.extent(0), d = a.extent(1), dr = a.extent(2);
  const auto nb = static_cast<std::size_t>(b.rows());
  const std::size_t ml = leftmost ? 1 : nb;
  DenseTensor out({dl * ml, d, dr * nb});
  const auto src = a.data();
  auto dst = out.data();
  const std::size_t ostride_p = dr * nb, ostride_a = d * ostride_p;
  for (std::size_t ia = 0; ia < dl; ++ia)
    for (std::size_t m = 0; m < nb; ++m) {
      const std::size_t row = leftmost ? ia : ia * nb + m;
      for (std::size_t c = 0; c < d; ++c) {
        const Complex f = b(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(c));
        const Complex *s = &src[(ia * d + c) * dr];
        Complex *o = &dst[row * ostride_a + c * ostride_p];
        for (std::size_t ib = 0; ib < dr; ++ib) o[ib * nb + m] = f * s[ib];
      }
    }
  return out;
}

// New site: A'[(r,m), beta, 0] = A[r, beta, 0] delta(m, branch(beta)).
DenseTensor apply_branch_newest(const DenseTensor &a, const InfluenceClasses &cl) {
  const std::size_t dl = a.extent(0), d = a.extent(1);
  const std::size_t nb = cl.n_branches();
  DenseTensor out({dl * nb, d, 1});
  for (std::size_t r = 0; r < dl; ++r)
    for (std::size_t p = 0; p < d; ++p) out({r * nb + cl.branch_of[p], p, 0}) = a({r, p, 0});
  return out;
}

double compress(std::vector<DenseTensor> &mps, double cutoff) {
  const std::size_t n = mps.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    DenseTensor &a = mps[i];
    const std::size_t dl = a.extent(0), d = a.extent(1);
    const Eigen::MatrixXcd m = a.as_matrix(2);
    const auto rows = m.rows();
    const Eigen::Index r = std::min<Eigen::Index>(rows, m.cols());
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
    const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(rows, r);
    const Eigen::MatrixXcd rr = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    DenseTensor na({dl, d, static_cast<std::size_t>(r)});
    na.as_matrix(2) = q;
    a = std::move(na);
    DenseTensor &b = mps[i + 1];
    DenseTensor nb({static_cast<std::size_t>(r), b.extent(1), b.extent(2)});
    nb.as_matrix(1) = rr * b.as_matrix(1);
    b = std::move(nb);
  }
  double discarded = 0.0;
  for (std::size_t i = n; i-- > 1;) {
    DenseTensor &a = mps[i];
    const std::size_t d = a.extent(1), dr = a.extent(2);
    const SvdBlocks f = truncated_svd(a.as_matrix(1), cutoff);
    const auto r = static_cast<std::size_t>(f.s.size());
    DenseTensor na({r, d, dr});
    na.as_matrix(1) = f.vh;
    a = std::move(na);
    DenseTensor &b = mps[i - 1];
    DenseTensor nb({b.extent(0), b.extent(1), r});
    nb.as_matrix(2) = b.as_matrix(2) * (f.u * f.s.asDiagonal());
    b = std::move(nb);
    if (f.total_weight > 0.0) discarded += f.discarded_weight / f.total_weight;
  }
  return discarded;
}

} // namespace

void step(AugmentedState &state, const EngineContext &ctx) {
  if (state.mps.empty()) throw std::invalid_argument("step: state is not initialised");
  if (state.step >= ctx.cfg.max_steps)
    throw std::out_of_range(fmt::format("step: already at max_steps = {}", ctx.cfg.max_steps));
  const InfluenceClasses &cl = state.classes;
  const std::size_t na = cl.active.size(), nc = cl.n_classes();

  // newest slice becomes a past slice; the full-step propagator opens a new one
  {
    DenseTensor &a = state.mps.back();
    const std::size_t dl = a.extent(0);
    const auto am = a.as_matrix(1); // dl x na
    RowMatrix summed = RowMatrix::Zero(static_cast<Eigen::Index>(dl * nc), static_cast<Eigen::Index>(na));
    for (std::size_t r = 0; r < dl; ++r)
      for (std::size_t b = 0; b < na; ++b) {
        const std::size_t c = cl.class_of[b];
        summed.row(static_cast<Eigen::Index>(r * nc + c)) +=
            am(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(b)) *
            ctx.full_active.col(static_cast<Eigen::Index>(b)).transpose();
      }
    DenseTensor past({dl, nc, na});
    past.as_matrix(2) = summed;
    a = std::move(past);
    DenseTensor fresh({na, na, 1});
    for (std::size_t p = 0; p < na; ++p) fresh({p, p, 0}) = ctx.self_factor(static_cast<Eigen::Index>(p));
    state.mps.push_back(std::move(fresh));
  }

  while (state.mps.size() - 1 > ctx.memory) {
    absorb_oldest(state.mps);
    ++state.dropped_slices;
  }

  const std::size_t past = state.mps.size() - 1;
  if (cl.n_branches() > 1 && past > 0) {
    for (std::size_t i = 0; i < past; ++i)
      state.mps[i] = apply_branch_site(state.mps[i], ctx.class_factors[past - i], i == 0);
    state.mps.back() = apply_branch_newest(state.mps.back(), cl);
  }

  state.cumulative_discarded_weight += compress(state.mps, ctx.cfg.svd_cutoff);
  ++state.step;

  if (ctx.cfg.max_bond_dimension) {
    const std::size_t bond = state.max_bond_dimension();
    if (bond > *ctx.cfg.max_bond_dimension)
      throw BondDimensionError(state.step, bond, *ctx.cfg.max_bond_dimension);
  }
}

AugmentedState step(AugmentedState state, const EngineConfig &cfg, const SystemParams &sys,
                    const MemoryKernel &kernel) {
  Vector9 support = Vector9::Zero();
  for (std::size_t b : state.classes.active) support(static_cast<Eigen::Index>(b)) = 1.0;
  const EngineContext ctx = make_context(support, cfg, sys, kernel);
  step(state, ctx);
  return state;
}

DensityMatrix3 reduced_state(const AugmentedState &state, const EngineContext &ctx) {
  if (state.mps.empty()) throw std::invalid_argument("reduced_state: state is not initialised");
  Eigen::RowVectorXcd v = Eigen::RowVectorXcd::Ones(1);
  for (std::size_t i = 0; i + 1 < state.mps.size(); ++i) {
    const DenseTensor &a = state.mps[i];
    const std::size_t d = a.extent(1), dr = a.extent(2);
    const Eigen::RowVectorXcd w = v * a.as_matrix(1);
    Eigen::RowVectorXcd nv = Eigen::RowVectorXcd::Zero(static_cast<Eigen::Index>(dr));
    for (std::size_t c = 0; c < d; ++c)
      nv += w.segment(static_cast<Eigen::Index>(c * dr), static_cast<Eigen::Index>(dr));
    v = std::move(nv);
  }
  const DenseTensor &last = state.mps.back();
  const Eigen::RowVectorXcd rho_active = v * last.as_matrix(1);
  Vector9 vec = Vector9::Zero();
  for (std::size_t i = 0; i < state.classes.active.size(); ++i)
    vec(static_cast<Eigen::Index>(state.classes.active[i])) = rho_active(static_cast<Eigen::Index>(i));
  return unvectorize(ctx.half * vec);
}

double state_time(const AugmentedState &state, const EngineConfig &cfg) {
  return static_cast<double>(state.step) * cfg.dt;
}

Observables observables(const DensityMatrix3 &rho) {
  return {emitter_population(rho), cavity_occupation(rho), emitter_cavity_coherence(rho), rho.trace().real()};
}

Trajectory run_dynamics(const DensityMatrix3 &rho0, const EngineConfig &cfg, const SystemParams &sys,
                        const MemoryKernel &kernel, InitialStatePolicy policy) {
  check_initial(rho0, policy);
  const EngineContext ctx = make_context(vectorize(rho0), cfg, sys, kernel);
  Trajectory tr;
  auto record = [&](double t, const DensityMatrix3 &rho, std::size_t bond, double dw) {
    tr.times.push_back(t);
    tr.rho.push_back(rho);
    tr.obs.push_back(observables(rho));
    tr.bond_dim.push_back(bond);
    tr.discarded_weight.push_back(dw);
  };
  record(0.0, rho0, 1, 0.0);
  AugmentedState s = initialize(rho0, ctx, policy);
  record(state_time(s, cfg), reduced_state(s, ctx), s.max_bond_dimension(), 0.0);
  while (s.step < cfg.max_steps) {
    step(s, ctx);
    record(state_time(s, cfg), reduced_state(s, ctx), s.max_bond_dimension(), s.cumulative_discarded_weight);
  }
  return tr;
}

void write_trajectory_csv(const Trajectory &traj, std::ostream &out) {
  out << "t_ev_inv,t_fs,P_e,n_cav,re_coh,im_coh,trace,max_bond_dim,discarded_weight\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto &o = traj.obs[i];
    fmt::print(out, "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{:.17g}\n", traj.times[i],
               traj.times[i] * kFsPerInvEv, o.p_e, o.n_cav, o.coherence.real(), o.coherence.imag(), o.trace,
               traj.bond_dim[i], traj.discarded_weight[i]);
  }
}

DensityMatrix3 brute_force_adt(const DensityMatrix3 &rho0, std::size_t k, const EngineConfig &cfg,
                               const SystemParams &sys, const MemoryKernel &kernel,
                               std::size_t memory_budget_bytes) {
  if (k < 1) throw std::invalid_argument("brute_force_adt: k must be >= 1");
  cfg.validate();
  constexpr std::size_t d = kLiouvilleDim;
  double bytes = sizeof(Complex);
  for (std::size_t i = 0; i < k; ++i) bytes *= static_cast<double>(d);
  bytes *= 10.0 / 9.0;
  if (k > 12 || bytes > static_cast<double>(memory_budget_bytes))
    throw std::length_error(fmt::format("brute_force_adt: k = {} needs {:.0f} bytes, budget {}", k, bytes,
                                        memory_budget_bytes));
  const std::size_t max_lag = cfg.memory_cutoff ? std::min(*cfg.memory_cutoff, k - 1) : k - 1;
  if (kernel.delta_max() < max_lag) throw std::invalid_argument("brute_force_adt: kernel too short");

  const Superoperator9 l0 = lindblad_liouvillian(sys);
  const Superoperator9 half = half_step_propagator(l0, cfg.dt);
  const Superoperator9 full = half * half;
  std::vector<InfluenceTensor> b;
  for (std::size_t lag = 0; lag < k; ++lag) {
    if (lag <= max_lag) {
      b.push_back(influence_tensor(kernel, lag, kCoupling));
    } else {
      b.push_back({lag, Eigen::Matrix<Complex, 9, 9>::Ones()});
    }
  }

  const Vector9 v1 = half * vectorize(rho0);
  std::vector<Complex> psi(d);
  for (std::size_t p = 0; p < d; ++p) psi[p] = b[0].values(p, p) * v1(p);

  std::vector<std::size_t> digits;
  for (std::size_t n = 1; n < k; ++n) {
    std::vector<Complex> next(psi.size() * d);
    digits.assign(n, 0);
    for (std::size_t idx = 0; idx < psi.size(); ++idx) {
      // digits[l] = beta_{l+1}; the last digit is fastest
      std::size_t rem = idx;
      for (std::size_t l = n; l-- > 0;) {
        digits[l] = rem % d;
        rem /= d;
      }
      const Complex amp = psi[idx];
      for (std::size_t q = 0; q < d; ++q) {
        Complex f = amp * full(q, digits[n - 1]) * b[0].values(q, q);
        for (std::size_t l = 0; l < n; ++l) f *= b[n - l].values(q, digits[l]);
        next[idx * d + q] = f;
      }
    }
    psi = std::move(next);
  }

  Vector9 last = Vector9::Zero();
  for (std::size_t idx = 0; idx < psi.size(); ++idx) last(idx % d) += psi[idx];
  return unvectorize(half * last);
}

Complex ibm_coherence_oracle(const SpectralDensity &j, double temperature, double gamma, double t) {
  if (!(temperature > 0.0)) throw std::invalid_argument("ibm_coherence_oracle: temperature must be > 0");
  const Complex phi = j.integrate([temperature, t](double w) -> Complex {
    if (w == 0.0) return {0.0, 0.0};
    const double x = w * t;
    const double coth = 1.0 / std::tanh(w / (2.0 * kBoltzmannEvPerK * temperature));
    const double s = std::sin(0.5 * x);
    const double xms = std::abs(x) < 1e-2 ? x * x * x / 6.0 * (1.0 - x * x / 20.0) : x - std::sin(x);
    return {2.0 * s * s * coth, -xms};
  });
  return std::exp(-0.5 * gamma * t) * std::exp(-phi);
}

} // namespace cqed
