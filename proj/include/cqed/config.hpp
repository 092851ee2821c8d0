#pragma once

#include "cqed/bath.hpp"
#include "cqed/response.hpp"
#include "cqed/system.hpp"
#include "cqed/tempo.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cqed {

enum class JobKind { dynamics, spectrum, corr, kernel, sweep };

std::string job_name(JobKind k);
std::optional<JobKind> parse_job_name(const std::string &s);

/// Collects every problem found while parsing so they can be reported together.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string> &problems() const { return problems_; }

private:
  std::vector<std::string> problems_;
};

struct AnalyticDensity {
  std::string type; // gaussian | superohmic | none
  double center = 0.0; // eV
  double width = 0.0;  // eV
  double cutoff = 0.0; // eV
  double s_tot = 0.0;
};

struct BathConfig {
  std::optional<std::filesystem::path> mode_file;
  EnergyUnit mode_unit = EnergyUnit::ev;
  std::optional<AnalyticDensity> density;
  double sigma = 2.5e-3; // eV
  double temperature = 4.0;
  std::vector<double> alpha_hrf{1.0};
  bool alpha_is_list = false;
  bool effective_width = false;
  std::optional<double> grid_omega_max; // eV
  std::size_t grid_points = 20001;
};

struct JobConfig {
  SystemParams system;
  bool omega_c_from_bath = false; // omega_c = omega_e - lambda per entry
  BathConfig bath;
  EngineConfig engine;
  bool n_steps_given = false;
  std::optional<JobKind> job;
  DriveMode drive;
  std::size_t pad_to = kDefaultPad;
  bool hann = false;
  std::string initial_state = "e0"; // e0 | g1 | g0 | plus
  std::vector<std::pair<double, double>> g_kappa; // eV, sweep grid
  double corr_t_max = 500.0;                      // eV^-1
  std::size_t corr_points = 1001;
  std::size_t kernel_lags = 100;
  std::filesystem::path output_dir = "out";
  nlohmann::json echo; // normalised copy written to manifests
};

/// dt per coupling strength: 5, 3, 2 eV^-1 for g <= 15, 50 meV and above.
double default_dt(double g_ev);

JobConfig parse_config(const nlohmann::json &j, const std::filesystem::path &base_dir = ".");
JobConfig parse_config_file(const std::filesystem::path &path);

/// Spectral density for one sweep entry (alpha applied).
SpectralDensity build_density(const BathConfig &bath, double alpha);

/// System parameters for one entry, with omega_c resolved from the bath when requested.
SystemParams resolve_system(const JobConfig &cfg, const SpectralDensity &scaled, double g, double kappa);

DensityMatrix3 initial_state(const std::string &name);

} // namespace cqed
