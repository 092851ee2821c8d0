#include "cqed/bath.hpp"

#include "cqed/system.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace cqed {

double ModeList::total_hrf() const {
  double s = 0.0;
  for (const auto &m : entries) s += m.hrf;
  return s;
}

double ModeList::max_energy() const {
  double e = 0.0;
  for (const auto &m : entries) e = std::max(e, m.energy);
  return e;
}

ModeList parse_modes(std::istream &in, EnergyUnit unit) {
  const double scale = unit == EnergyUnit::mev ? 1e-3 : 1.0;
  std::map<double, double> merged;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string a, b, extra;
    if (!(ls >> a)) continue;
    if (!(ls >> b) || (ls >> extra))
      throw ModeFileError("mode file line " + std::to_string(lineno) + ": expected '<energy> <hrf>'", lineno);
    double energy = 0.0, hrf = 0.0;
    try {
      std::size_t pa = 0, pb = 0;
      energy = std::stod(a, &pa);
      hrf = std::stod(b, &pb);
      if (pa != a.size() || pb != b.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception &) {
      throw ModeFileError("mode file line " + std::to_string(lineno) + ": malformed number", lineno);
    }
    if (!std::isfinite(energy) || !std::isfinite(hrf))
      throw ModeFileError("mode file line " + std::to_string(lineno) + ": non-finite value", lineno);
    if (energy <= 0.0)
      throw ModeFileError("mode file line " + std::to_string(lineno) + ": mode energy must be positive", lineno);
    if (hrf < 0.0)
      throw ModeFileError("mode file line " + std::to_string(lineno) + ": negative Huang-Rhys factor", lineno);
    if (hrf == 0.0) continue;
    merged[energy * scale] += hrf;
  }
  ModeList out;
  for (auto [e, s] : merged) out.entries.push_back({e, s});
  return out;
}

ModeList load_modes(const std::filesystem::path &path, EnergyUnit unit) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mode file " + path.string());
  return parse_modes(in, unit);
}

void FrequencyGrid::validate() const {
  if (n_points < 2) throw std::invalid_argument("FrequencyGrid: at least two points required");
  if (!(omega_max > omega_min)) throw std::invalid_argument("FrequencyGrid: omega_max must exceed omega_min");
  if (omega_min < 0.0) throw std::invalid_argument("FrequencyGrid: omega_min must be >= 0");
}

FrequencyGrid default_grid(const ModeList &modes, double sigma) {
  FrequencyGrid g;
  g.omega_min = 0.0;
  g.omega_max = modes.empty() ? 6.0 * sigma : modes.max_energy() + 6.0 * sigma;
  if (!(g.omega_max > 0.0)) g.omega_max = 1.0;
  g.n_points = 20001;
  return g;
}

double SpectralDensity::weight(std::size_t i) const {
  const double h = grid.spacing();
  return (i == 0 || i + 1 == samples.size()) ? 0.5 * h : h;
}

namespace {

double gaussian(double x, double sigma) {
  return std::exp(-0.5 * x * x / (sigma * sigma)) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
}

SpectralDensity make_density(DensityKind kind, const FrequencyGrid &grid) {
  grid.validate();
  SpectralDensity j;
  j.kind = kind;
  j.grid = grid;
  j.samples.assign(grid.n_points, 0.0);
  return j;
}

// coth(omega / 2kT), with omega > 0
double coth_thermal(double omega, double temperature) {
  return 1.0 / std::tanh(omega / (2.0 * kBoltzmannEvPerK * temperature));
}

// x - sin x without cancellation for small x
double x_minus_sin(double x) {
  if (std::abs(x) < 1e-2) {
    const double x2 = x * x;
    return x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)));
  }
  return x - std::sin(x);
}

double one_minus_cos(double x) {
  const double s = std::sin(0.5 * x);
  return 2.0 * s * s;
}

} // namespace

SpectralDensity broaden(const ModeList &modes, double sigma, const FrequencyGrid &grid) {
  if (!(sigma > 0.0)) throw std::invalid_argument("broaden: sigma must be > 0");
  SpectralDensity j = make_density(DensityKind::broadened_modes, grid);
  j.broadening = sigma;
  for (const auto &m : modes.entries) {
    if (m.energy - 6.0 * sigma < grid.omega_min || m.energy + 6.0 * sigma > grid.omega_max) {
      j.diagnostics.push_back("mode at " + std::to_string(m.energy) +
                              " eV is not covered by the frequency grid within 6 sigma");
    }
    // only evaluate within 12 sigma; beyond that the Gaussian underflows the quadrature
    const double lo = m.energy - 12.0 * sigma, hi = m.energy + 12.0 * sigma;
    const double h = grid.spacing();
    const auto i0 = static_cast<std::size_t>(std::max(0.0, std::floor((lo - grid.omega_min) / h)));
    const auto i1 = static_cast<std::size_t>(
        std::clamp(std::ceil((hi - grid.omega_min) / h), 0.0, static_cast<double>(grid.n_points - 1)));
    for (std::size_t i = i0; i <= i1 && i < grid.n_points; ++i)
      j.samples[i] += m.hrf * gaussian(grid[i] - m.energy, sigma);
  }
  return j;
}

SpectralDensity broaden(const ModeList &modes, double sigma) {
  return broaden(modes, sigma, default_grid(modes, sigma));
}

SpectralDensity gaussian_density(double center, double width, double s_tot, const FrequencyGrid &grid) {
  if (!(width > 0.0)) throw std::invalid_argument("gaussian_density: width must be > 0");
  if (!(s_tot >= 0.0)) throw std::invalid_argument("gaussian_density: s_tot must be >= 0");
  SpectralDensity j = make_density(DensityKind::analytic_test, grid);
  j.broadening = width;
  for (std::size_t i = 0; i < grid.n_points; ++i) j.samples[i] = s_tot * gaussian(grid[i] - center, width);
  return j;
}

SpectralDensity superohmic_density(double cutoff, double s_tot, const FrequencyGrid &grid) {
  if (!(cutoff > 0.0)) throw std::invalid_argument("superohmic_density: cutoff must be > 0");
  SpectralDensity j = make_density(DensityKind::analytic_test, grid);
  const double c4 = std::pow(cutoff, 4);
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double w = grid[i];
    j.samples[i] = s_tot * w * w * w / (6.0 * c4) * std::exp(-w / cutoff);
  }
  return j;
}

SpectralDensity zero_density(const FrequencyGrid &grid) {
  return make_density(DensityKind::analytic_test, grid);
}

double total_hrf(const SpectralDensity &j) {
  return j.integrate([](double) { return 1.0; });
}

SpectralDensity scale_hrf(const SpectralDensity &j, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("scale_hrf: alpha must lie in [0, 1]");
  SpectralDensity out = j;
  for (auto &v : out.samples) v *= alpha;
  out.alpha_hrf = j.alpha_hrf * alpha;
  return out;
}

double spectral_mean(const SpectralDensity &j) {
  const double s = total_hrf(j);
  if (!(s > 0.0)) throw std::invalid_argument("spectral_mean: density has no weight");
  return j.integrate([](double w) { return w; }) / s;
}

double spectral_std(const SpectralDensity &j) {
  const double s = total_hrf(j);
  const double mean = spectral_mean(j);
  const double var = j.integrate([mean](double w) { return (w - mean) * (w - mean); }) / s;
  return std::sqrt(std::max(var, 0.0));
}

SpectralDensity effective_width_sd(const SpectralDensity &j) {
  const double s = total_hrf(j);
  if (!(s > 0.0)) throw std::invalid_argument("effective_width_sd: total Huang-Rhys factor must be > 0");
  const double mean = spectral_mean(j);
  const double width = std::max(spectral_std(j), j.grid.spacing());
  // widen the grid at fixed spacing so the Gaussian tail is not cut off
  FrequencyGrid grid = j.grid;
  const double top = mean + 6.0 * width;
  if (top > grid.omega_max) {
    const double h = grid.spacing();
    grid.n_points += static_cast<std::size_t>(std::ceil((top - grid.omega_max) / h));
    grid.omega_max = grid.omega_min + h * static_cast<double>(grid.n_points - 1);
  }
  SpectralDensity out = make_density(DensityKind::effective_width, grid);
  out.broadening = width;
  out.alpha_hrf = j.alpha_hrf;
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double w = grid[i];
    out.samples[i] = w > 0.0 ? gaussian(w - mean, width) : 0.0;
  }
  const double norm = total_hrf(out);
  for (auto &v : out.samples) v *= s / norm;
  return out;
}

double reorganization_energy(const SpectralDensity &j) {
  return j.integrate([](double w) { return w; });
}

double franck_condon(double alpha, double s_tot) { return std::exp(-0.5 * alpha * s_tot); }

Complex correlation_function(const SpectralDensity &j, double temperature, double t) {
  if (!(temperature > 0.0)) throw std::invalid_argument("correlation_function: temperature must be > 0");
  return j.integrate([temperature, t](double w) -> Complex {
    if (w == 0.0) return {0.0, 0.0};
    const double w2 = w * w;
    return {w2 * coth_thermal(w, temperature) * std::cos(w * t), -w2 * std::sin(w * t)};
  });
}

std::size_t MemoryKernel::last_nonzero_lag() const {
  for (std::size_t d = eta.size(); d-- > 0;)
    if (eta[d] != Complex{0.0, 0.0}) return d;
  return 0;
}

MemoryKernel memory_kernel(const SpectralDensity &j, double temperature, double dt, std::size_t delta_max) {
  if (!(dt > 0.0)) throw std::invalid_argument("memory_kernel: dt must be > 0");
  if (!(temperature > 0.0)) throw std::invalid_argument("memory_kernel: temperature must be > 0");
  MemoryKernel k;
  k.dt = dt;
  k.temperature = temperature;
  k.eta.assign(delta_max + 1, Complex{0.0, 0.0});

  constexpr std::size_t kResync = 32;
  for (std::size_t i = 0; i < j.samples.size(); ++i) {
    const double w = j.grid[i];
    if (j.samples[i] == 0.0 || w == 0.0) continue;
    const double wj = j.weight(i) * j.samples[i];
    const double coth = coth_thermal(w, temperature);
    const double x = w * dt;
    const double omc = one_minus_cos(x);

    k.eta[0] += wj * Complex(coth * omc, -x_minus_sin(x));

    // lag d >= 1: 2 (1 - cos w dt) [coth cos(w d dt) - i sin(w d dt)]
    const double pref = 2.0 * omc * wj;
    const Complex step = std::polar(1.0, -x);
    Complex phase = step;
    for (std::size_t d = 1; d <= delta_max; ++d) {
      if (d % kResync == 0) phase = std::polar(1.0, -x * static_cast<double>(d));
      k.eta[d] += pref * Complex(coth * phase.real(), phase.imag());
      phase *= step;
    }
  }
  return k;
}

} // namespace cqed
