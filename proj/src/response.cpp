#include "cqed/response.hpp"

#include <fftw3.h>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

namespace cqed {

Matrix3 DriveMode::mu() const {
  Matrix3 m = Matrix3::Zero();
  const int x = kind == DriveKind::dipole ? kE0 : kG1;
  m(x, kG0) = 1.0;
  m(kG0, x) = 1.0;
  return m;
}

namespace {

struct Runner {
  const DriveMode &drive;
  Matrix3 mu;
  EngineContext ctx;
  AugmentedState state;
  ResponseSeries out;

  Runner(const DriveMode &d, const EngineConfig &cfg, const SystemParams &sys, const MemoryKernel &kernel)
      : drive(d), mu(d.mu()) {
    Matrix3 g0 = Matrix3::Zero();
    g0(kG0, kG0) = 1.0;
    const Matrix3 rho0 = mu * g0;
    ctx = make_context(vectorize(rho0), cfg, sys, kernel);
    out.drive = d;
    out.cfg = cfg;
    out.rotating_frame = sys.rotating_frame;
    out.omega_e = sys.omega_e;
    record(0.0, rho0);
    state = initialize(rho0, ctx, InitialStatePolicy::allow_unphysical);
    record(state_time(state, cfg), reduced_state(state, ctx));
  }

  void record(double t, const Matrix3 &rho) {
    out.times.push_back(t);
    out.values.push_back((mu * rho).trace());
  }

  void advance() {
    step(state, ctx);
    record(state_time(state, ctx.cfg), reduced_state(state, ctx));
    out.max_bond_dimension = std::max(out.max_bond_dimension, state.max_bond_dimension());
  }

  ResponseSeries finish(double threshold) {
    out.discarded_weight = state.cumulative_discarded_weight;
    const double s0 = std::abs(out.values.front());
    out.residual = std::abs(out.values.back()) / s0;
    if (!(out.residual < threshold))
      out.warnings.push_back(fmt::format("response not equilibrated: |S(t_end)|/|S(0)| = {:.3e}", out.residual));
    return std::move(out);
  }
};

} // namespace

ResponseSeries response_function(const DriveMode &drive, const EngineConfig &cfg, const SystemParams &sys,
                                 const MemoryKernel &kernel, std::size_t n_steps) {
  EngineConfig c = cfg;
  c.max_steps = n_steps;
  Runner r(drive, c, sys, kernel);
  while (r.state.step < n_steps) r.advance();
  return r.finish(kEquilibrationThreshold);
}

ResponseSeries response_until_equilibrium(const DriveMode &drive, const EngineConfig &cfg,
                                          const SystemParams &sys, const MemoryKernel &kernel, double threshold,
                                          std::size_t window) {
  Runner r(drive, cfg, sys, kernel);
  const double s0 = std::abs(r.out.values.front());
  std::size_t quiet = 0;
  while (r.state.step < cfg.max_steps && quiet < window) {
    r.advance();
    quiet = std::abs(r.out.values.back()) < threshold * s0 ? quiet + 1 : 0;
  }
  return r.finish(threshold);
}

namespace {
std::mutex fftw_plan_mutex; // planner is not thread safe
}

Spectrum absorption_spectrum(const ResponseSeries &s, std::size_t pad_to, bool hann) {
  if (pad_to == 0 || (pad_to & (pad_to - 1)) != 0)
    throw std::invalid_argument(fmt::format("absorption_spectrum: pad_to = {} is not a power of two", pad_to));
  const std::size_t len = s.values.size();
  if (len == 0) throw std::invalid_argument("absorption_spectrum: empty response");
  if (pad_to < len)
    throw std::invalid_argument(fmt::format("absorption_spectrum: pad_to = {} below series length {}", pad_to, len));
  const double dt = s.dt();
  const int n = static_cast<int>(pad_to);

  auto *buf = static_cast<fftw_complex *>(fftw_malloc(sizeof(fftw_complex) * pad_to));
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_plan_mutex);
    plan = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  for (std::size_t k = 0; k < pad_to; ++k) {
    Complex v{0.0, 0.0};
    if (k < len) {
      double w = k == 0 ? 0.5 : 1.0;
      if (hann) w *= 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(k) / static_cast<double>(len)));
      v = s.values[k] * (w * dt);
    }
    buf[k][0] = v.real();
    buf[k][1] = v.imag();
  }
  fftw_execute(plan);

  Spectrum spec;
  spec.pad_to = pad_to;
  spec.resolution = 2.0 * std::numbers::pi / (static_cast<double>(pad_to) * dt);
  spec.omega.resize(pad_to);
  spec.a_vals.resize(pad_to);
  const double shift = s.rotating_frame ? s.omega_e : 0.0;
  const std::size_t half = pad_to / 2;
  for (std::size_t i = 0; i < pad_to; ++i) {
    // fftshift: output index i holds frequency bin i - N/2
    const std::size_t src = (i + half) % pad_to;
    const double bin = static_cast<double>(i) - static_cast<double>(half);
    spec.omega[i] = bin * spec.resolution + shift;
    spec.a_vals[i] = 2.0 * buf[src][0];
  }
  {
    std::lock_guard lock(fftw_plan_mutex);
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  return spec;
}

double integrate_spectrum(const Spectrum &s) {
  double acc = 0.0;
  for (std::size_t i = 1; i < s.a_vals.size(); ++i)
    acc += 0.5 * (s.a_vals[i] + s.a_vals[i - 1]) * (s.omega[i] - s.omega[i - 1]);
  return acc;
}

Splitting find_splitting(const Spectrum &spec, std::optional<std::pair<double, double>> window) {
  const auto &a = spec.a_vals;
  const std::size_t n = a.size();
  std::size_t lo = 0, hi = n;
  if (window) {
    lo = static_cast<std::size_t>(std::lower_bound(spec.omega.begin(), spec.omega.end(), window->first) -
                                  spec.omega.begin());
    hi = static_cast<std::size_t>(std::upper_bound(spec.omega.begin(), spec.omega.end(), window->second) -
                                  spec.omega.begin());
  }
  if (hi < lo + 3) throw SplittingError("find_splitting: window holds fewer than three samples");
  const double gmax = *std::max_element(a.begin() + static_cast<std::ptrdiff_t>(lo),
                                        a.begin() + static_cast<std::ptrdiff_t>(hi));

  struct Peak {
    std::size_t i;
    double prominence;
  };
  std::vector<Peak> peaks;
  for (std::size_t i = lo + 1; i + 1 < hi; ++i) {
    if (!(a[i] > a[i - 1] && a[i] >= a[i + 1])) continue;
    double left_min = a[i], right_min = a[i];
    std::size_t j = i;
    while (j > lo && a[j - 1] <= a[i]) left_min = std::min(left_min, a[--j]);
    j = i;
    while (j + 1 < hi && a[j + 1] <= a[i]) right_min = std::min(right_min, a[++j]);
    const double prom = a[i] - std::max(left_min, right_min);
    if (prom >= 0.02 * gmax) peaks.push_back({i, prom});
  }
  if (peaks.size() < 2)
    throw SplittingError(fmt::format("find_splitting: {} peak(s) above the prominence threshold", peaks.size()));
  std::partial_sort(peaks.begin(), peaks.begin() + 2, peaks.end(),
                    [](const Peak &x, const Peak &y) { return x.prominence > y.prominence; });

  auto refine = [&](std::size_t i) {
    const double ym = a[i - 1], y0 = a[i], yp = a[i + 1];
    const double den = ym - 2.0 * y0 + yp;
    const double off = den != 0.0 ? 0.5 * (ym - yp) / den : 0.0;
    return spec.omega[i] + off * (spec.omega[i + 1] - spec.omega[i]);
  };
  double p1 = refine(peaks[0].i), p2 = refine(peaks[1].i);
  if (p1 > p2) std::swap(p1, p2);
  return {{p1, p2}, p2 - p1};
}

} // namespace cqed
