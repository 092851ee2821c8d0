#pragma once

#include "cqed/tensor.hpp"

#include <cstddef>
#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cqed {

struct Mode {
  double energy = 0.0; // eV
  double hrf = 0.0;    // partial Huang-Rhys factor
};

struct ModeList {
  std::vector<Mode> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  double total_hrf() const;
  double max_energy() const;
};

enum class EnergyUnit { ev, mev };

class ModeFileError : public std::runtime_error {
public:
  ModeFileError(const std::string &what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

/// One `<energy> <partial_hrf>` pair per line; `#` starts a comment. Duplicate
/// energies are merged and zero-weight modes dropped.
ModeList load_modes(const std::filesystem::path &path, EnergyUnit unit = EnergyUnit::ev);
ModeList parse_modes(std::istream &in, EnergyUnit unit = EnergyUnit::ev);

struct FrequencyGrid {
  double omega_min = 0.0;
  double omega_max = 1.0;
  std::size_t n_points = 20001;

  double spacing() const { return (omega_max - omega_min) / static_cast<double>(n_points - 1); }
  double operator[](std::size_t i) const { return omega_min + spacing() * static_cast<double>(i); }
  void validate() const;
};

/// [0, max mode + 6 sigma] with 20001 points.
FrequencyGrid default_grid(const ModeList &modes, double sigma);

enum class DensityKind { broadened_modes, effective_width, analytic_test };

/// J(omega) in Huang-Rhys normalisation (integral = total HRF), sampled on a
/// uniform grid and integrated with the trapezoidal rule.
struct SpectralDensity {
  DensityKind kind = DensityKind::analytic_test;
  FrequencyGrid grid;
  std::vector<double> samples;
  double broadening = 0.0; // eV
  double alpha_hrf = 1.0;
  std::vector<std::string> diagnostics;

  /// Trapezoid weight of sample i (includes the grid spacing).
  double weight(std::size_t i) const;

  template <class F> auto integrate(F &&f) const {
    using R = decltype(f(0.0));
    R acc{};
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (samples[i] != 0.0) acc += weight(i) * samples[i] * f(grid[i]);
    return acc;
  }
};

SpectralDensity broaden(const ModeList &modes, double sigma, const FrequencyGrid &grid);
SpectralDensity broaden(const ModeList &modes, double sigma);

/// Gaussian of total weight s_tot centred at `center` with standard deviation `width`.
SpectralDensity gaussian_density(double center, double width, double s_tot, const FrequencyGrid &grid);
/// S * omega^3 / (6 wc^4) exp(-omega / wc): a smooth super-ohmic test density
/// whose integral is S on [0, inf).
SpectralDensity superohmic_density(double cutoff, double s_tot, const FrequencyGrid &grid);
SpectralDensity zero_density(const FrequencyGrid &grid = {0.0, 1.0, 3});

double total_hrf(const SpectralDensity &j);
SpectralDensity scale_hrf(const SpectralDensity &j, double alpha);
double spectral_mean(const SpectralDensity &j);
double spectral_std(const SpectralDensity &j);

/// Moment-matched single Gaussian with the same total Huang-Rhys factor.
SpectralDensity effective_width_sd(const SpectralDensity &j);

/// sum_k S_k nu_k.
double reorganization_energy(const SpectralDensity &j);
double franck_condon(double alpha, double s_tot);

/// C(t) = int domega omega^2 J(omega) [coth(omega / 2kT) cos(omega t) - i sin(omega t)].
Complex correlation_function(const SpectralDensity &j, double temperature, double t);

struct MemoryKernel {
  double dt = 0.0;
  double temperature = 0.0;
  std::vector<Complex> eta; // eta[delta], delta = 0 .. delta_max

  std::size_t delta_max() const { return eta.empty() ? 0 : eta.size() - 1; }
  /// Largest lag with a nonzero coefficient (0 if none).
  std::size_t last_nonzero_lag() const;
  Complex at(std::size_t i, std::size_t j) const { return eta.at(i > j ? i - j : j - i); }
};

/// Discretised double integrals of C over timestep cells (time integrals done
/// analytically, frequency integral by quadrature). The lag-0 entry covers
/// the time-ordered half of the diagonal cell.
MemoryKernel memory_kernel(const SpectralDensity &j, double temperature, double dt, std::size_t delta_max);

} // namespace cqed
