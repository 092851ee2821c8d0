#pragma once

#include "cqed/tempo.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cqed {

enum class DriveKind { dipole, cavity };

struct DriveMode {
  DriveKind kind = DriveKind::dipole;

  /// sigma^dagger + sigma or a^dagger + a on the single-excitation basis.
  Matrix3 mu() const;
  std::string name() const { return kind == DriveKind::dipole ? "dipole" : "cavity"; }
};

struct ResponseSeries {
  std::vector<double> times;
  std::vector<Complex> values; // S(t_k) = tr(mu rho(t_k))
  DriveMode drive;
  EngineConfig cfg;
  bool rotating_frame = true;
  double omega_e = 0.0;
  double residual = 0.0; // |S(t_end)| / |S(0)|
  std::size_t max_bond_dimension = 1;
  double discarded_weight = 0.0;
  std::vector<std::string> warnings;

  double dt() const { return cfg.dt; }
};

inline constexpr double kEquilibrationThreshold = 1e-4;

/// Propagates mu |g,0><g,0| for n_steps and records tr(mu rho(t)).
ResponseSeries response_function(const DriveMode &drive, const EngineConfig &cfg, const SystemParams &sys,
                                 const MemoryKernel &kernel, std::size_t n_steps);

/// Runs until |S(t)| stays below threshold |S(0)| for `window` consecutive
/// steps, or until cfg.max_steps.
ResponseSeries response_until_equilibrium(const DriveMode &drive, const EngineConfig &cfg,
                                          const SystemParams &sys, const MemoryKernel &kernel,
                                          double threshold = kEquilibrationThreshold, std::size_t window = 20);

struct Spectrum {
  std::vector<double> omega; // eV, absolute
  std::vector<double> a_vals;
  std::size_t pad_to = 0;
  double resolution = 0.0; // grid spacing in eV
};

inline constexpr std::size_t kDefaultPad = std::size_t{1} << 15;

/// A(omega) = 2 Re sum_k w_k S(t_k) e^{i omega t_k} dt with w_0 = 1/2.
Spectrum absorption_spectrum(const ResponseSeries &s, std::size_t pad_to = kDefaultPad, bool hann = false);

/// trapezoid over the grid
double integrate_spectrum(const Spectrum &s);

struct Splitting {
  std::pair<double, double> peaks; // ascending
  double splitting = 0.0;
};

class SplittingError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Two most prominent local maxima (prominence >= 2% of the global maximum),
/// refined by three-point quadratic interpolation.
Splitting find_splitting(const Spectrum &spec, std::optional<std::pair<double, double>> window = std::nullopt);

} // namespace cqed
