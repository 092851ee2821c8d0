#include "cqed/config.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <set>

namespace cqed {

using nlohmann::json;

std::string job_name(JobKind k) {
  switch (k) {
  case JobKind::dynamics: return "dynamics";
  case JobKind::spectrum: return "spectrum";
  case JobKind::corr: return "corr";
  case JobKind::kernel: return "kernel";
  case JobKind::sweep: return "sweep";
  }
  return "unknown";
}

std::optional<JobKind> parse_job_name(const std::string &s) {
  for (JobKind k : {JobKind::dynamics, JobKind::spectrum, JobKind::corr, JobKind::kernel, JobKind::sweep})
    if (job_name(k) == s) return k;
  return std::nullopt;
}

namespace {

std::string join(const std::vector<std::string> &v) {
  std::string out;
  for (const auto &s : v) out += (out.empty() ? "" : "; ") + s;
  return out;
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("invalid configuration: " + join(problems)), problems_(std::move(problems)) {}

double default_dt(double g_ev) {
  if (g_ev <= 15e-3 + 1e-12) return 5.0;
  if (g_ev <= 50e-3 + 1e-12) return 3.0;
  return 2.0;
}

namespace {

class Reader {
public:
  Reader(const json &root, std::vector<std::string> &problems) : root_(root), problems_(problems) {}

  const json *section(const std::string &name, const std::set<std::string> &allowed) {
    if (!root_.contains(name)) return nullptr;
    const json &s = root_.at(name);
    if (!s.is_object()) {
      problems_.push_back(fmt::format("section '{}' must be an object", name));
      return nullptr;
    }
    for (const auto &[k, v] : s.items())
      if (!allowed.count(k)) problems_.push_back(fmt::format("unknown key '{}.{}'", name, k));
    return &s;
  }

  template <class T>
  std::optional<T> get(const json *s, const std::string &sec, const std::string &key, bool required) {
    if (!s || !s->contains(key)) {
      if (required) problems_.push_back(fmt::format("missing required key '{}.{}'", sec, key));
      return std::nullopt;
    }
    try {
      return s->at(key).get<T>();
    } catch (const json::exception &) {
      problems_.push_back(fmt::format("key '{}.{}' has the wrong type", sec, key));
      return std::nullopt;
    }
  }

  void check(bool ok, std::string msg) {
    if (!ok) problems_.push_back(std::move(msg));
  }

private:
  const json &root_;
  std::vector<std::string> &problems_;
};

} // namespace

JobConfig parse_config(const json &j, const std::filesystem::path &base_dir) {
  std::vector<std::string> problems;
  if (!j.is_object()) throw ConfigError({"configuration root must be an object"});
  for (const auto &[k, v] : j.items())
    if (k != "system" && k != "bath" && k != "engine" && k != "job")
      problems.push_back(fmt::format("unknown section '{}'", k));
  Reader r(j, problems);
  JobConfig cfg;

  // system
  const json *sys = r.section("system", {"omega_e_ev", "g_mev", "omega_c_ev", "gamma_mev", "kappa_mev", "rotating_frame"});
  if (!sys) problems.push_back("missing required section 'system'");
  if (auto v = r.get<double>(sys, "system", "omega_e_ev", true)) cfg.system.omega_e = *v;
  if (auto v = r.get<double>(sys, "system", "g_mev", true)) cfg.system.g = *v * 1e-3;
  if (auto v = r.get<double>(sys, "system", "gamma_mev", true)) cfg.system.gamma = *v * 1e-3;
  if (auto v = r.get<double>(sys, "system", "kappa_mev", true)) cfg.system.kappa = *v * 1e-3;
  if (auto v = r.get<double>(sys, "system", "omega_c_ev", false)) {
    cfg.system.omega_c = *v;
  } else {
    cfg.omega_c_from_bath = true;
    cfg.system.omega_c = cfg.system.omega_e;
  }
  if (auto v = r.get<bool>(sys, "system", "rotating_frame", false)) cfg.system.rotating_frame = *v;
  r.check(cfg.system.g >= 0.0, "system.g_mev must be >= 0");
  r.check(cfg.system.gamma >= 0.0, "system.gamma_mev must be >= 0");
  r.check(cfg.system.kappa >= 0.0, "system.kappa_mev must be >= 0");
  r.check(cfg.system.omega_e > 0.0, "system.omega_e_ev must be > 0");

  // bath
  const json *bath = r.section("bath", {"mode_file", "mode_unit", "density", "sigma_mev", "temperature_k", "alpha_hrf",
                                        "effective_width", "grid_omega_max_ev", "grid_points"});
  if (!bath) problems.push_back("missing required section 'bath'");
  BathConfig &b = cfg.bath;
  if (auto v = r.get<std::string>(bath, "bath", "mode_file", false)) {
    std::filesystem::path p(*v);
    if (p.is_relative()) p = base_dir / p;
    if (!std::filesystem::exists(p)) problems.push_back(fmt::format("mode file '{}' does not exist", p.string()));
    b.mode_file = p;
  }
  if (auto v = r.get<std::string>(bath, "bath", "mode_unit", false)) {
    if (*v == "ev") b.mode_unit = EnergyUnit::ev;
    else if (*v == "mev") b.mode_unit = EnergyUnit::mev;
    else problems.push_back("bath.mode_unit must be 'ev' or 'mev'");
  }
  if (bath && bath->contains("density")) {
    const json &d = bath->at("density");
    if (!d.is_object()) {
      problems.push_back("bath.density must be an object");
    } else {
      for (const auto &[k, v] : d.items())
        if (k != "type" && k != "center_mev" && k != "width_mev" && k != "cutoff_mev" && k != "s_tot")
          problems.push_back(fmt::format("unknown key 'bath.density.{}'", k));
      AnalyticDensity a;
      a.type = r.get<std::string>(&d, "bath.density", "type", true).value_or("");
      if (a.type == "gaussian") {
        a.center = r.get<double>(&d, "bath.density", "center_mev", true).value_or(0.0) * 1e-3;
        a.width = r.get<double>(&d, "bath.density", "width_mev", true).value_or(0.0) * 1e-3;
        a.s_tot = r.get<double>(&d, "bath.density", "s_tot", true).value_or(0.0);
        r.check(a.width > 0.0 && a.center > 0.0, "bath.density: center_mev and width_mev must be > 0");
      } else if (a.type == "superohmic") {
        a.cutoff = r.get<double>(&d, "bath.density", "cutoff_mev", true).value_or(0.0) * 1e-3;
        a.s_tot = r.get<double>(&d, "bath.density", "s_tot", true).value_or(0.0);
        r.check(a.cutoff > 0.0, "bath.density.cutoff_mev must be > 0");
      } else if (a.type != "none") {
        problems.push_back("bath.density.type must be 'gaussian', 'superohmic' or 'none'");
      }
      r.check(a.s_tot >= 0.0, "bath.density.s_tot must be >= 0");
      b.density = a;
    }
  }
  if (bath) r.check(b.mode_file.has_value() != b.density.has_value(), "bath needs exactly one of 'mode_file' or 'density'");
  if (auto v = r.get<double>(bath, "bath", "sigma_mev", false)) b.sigma = *v * 1e-3;
  if (auto v = r.get<double>(bath, "bath", "temperature_k", false)) b.temperature = *v;
  if (bath && bath->contains("alpha_hrf")) {
    const json &a = bath->at("alpha_hrf");
    if (a.is_number()) {
      b.alpha_hrf = {a.get<double>()};
    } else if (a.is_array() && !a.empty() && std::all_of(a.begin(), a.end(), [](const json &x) { return x.is_number(); })) {
      b.alpha_hrf = a.get<std::vector<double>>();
      b.alpha_is_list = true;
    } else {
      problems.push_back("bath.alpha_hrf must be a number or a non-empty list of numbers");
    }
  }
  for (double a : b.alpha_hrf) r.check(a >= 0.0 && a <= 1.0, "bath.alpha_hrf values must lie in [0, 1]");
  if (auto v = r.get<bool>(bath, "bath", "effective_width", false)) b.effective_width = *v;
  if (auto v = r.get<double>(bath, "bath", "grid_omega_max_ev", false)) b.grid_omega_max = *v;
  if (auto v = r.get<std::size_t>(bath, "bath", "grid_points", false)) b.grid_points = *v;
  r.check(b.sigma > 0.0, "bath.sigma_mev must be > 0");
  r.check(b.temperature > 0.0, "bath.temperature_k must be > 0");
  r.check(b.grid_points >= 2, "bath.grid_points must be >= 2");

  // job
  const json *job = r.section("job", {"type", "drive", "pad_to", "hann", "initial_state", "g_kappa_mev",
                                      "corr_t_max_ev_inv", "corr_points", "kernel_lags", "output_dir"});
  if (auto v = r.get<std::string>(job, "job", "type", false)) {
    cfg.job = parse_job_name(*v);
    if (!cfg.job) problems.push_back(fmt::format("job.type '{}' is not a known job", *v));
  }
  if (auto v = r.get<std::string>(job, "job", "drive", false)) {
    if (*v == "dipole") cfg.drive.kind = DriveKind::dipole;
    else if (*v == "cavity") cfg.drive.kind = DriveKind::cavity;
    else problems.push_back("job.drive must be 'dipole' or 'cavity'");
  }
  if (auto v = r.get<std::size_t>(job, "job", "pad_to", false)) cfg.pad_to = *v;
  r.check(cfg.pad_to > 0 && (cfg.pad_to & (cfg.pad_to - 1)) == 0, "job.pad_to must be a power of two");
  if (auto v = r.get<bool>(job, "job", "hann", false)) cfg.hann = *v;
  if (auto v = r.get<std::string>(job, "job", "initial_state", false)) {
    cfg.initial_state = *v;
    r.check(*v == "e0" || *v == "g1" || *v == "g0" || *v == "plus",
            "job.initial_state must be one of e0, g1, g0, plus");
  }
  if (auto v = r.get<std::vector<std::vector<double>>>(job, "job", "g_kappa_mev", false)) {
    r.check(!v->empty(), "job.g_kappa_mev must not be empty");
    for (const auto &p : *v) {
      if (p.size() != 2 || p[0] < 0.0 || p[1] < 0.0) {
        problems.push_back("job.g_kappa_mev entries must be [g_mev, kappa_mev] pairs of non-negative numbers");
        break;
      }
      cfg.g_kappa.emplace_back(p[0] * 1e-3, p[1] * 1e-3);
    }
  }
  if (cfg.g_kappa.empty()) cfg.g_kappa.emplace_back(cfg.system.g, cfg.system.kappa);
  if (auto v = r.get<double>(job, "job", "corr_t_max_ev_inv", false)) cfg.corr_t_max = *v;
  if (auto v = r.get<std::size_t>(job, "job", "corr_points", false)) cfg.corr_points = *v;
  if (auto v = r.get<std::size_t>(job, "job", "kernel_lags", false)) cfg.kernel_lags = *v;
  if (auto v = r.get<std::string>(job, "job", "output_dir", false)) cfg.output_dir = *v;
  r.check(cfg.corr_points >= 2 && cfg.corr_t_max > 0.0, "job.corr_points >= 2 and corr_t_max_ev_inv > 0 required");

  // engine
  const json *eng = r.section("engine", {"dt_ev_inv", "dt_fs", "svd_cutoff", "n_steps", "memory_cutoff",
                                         "max_bond_dimension"});
  EngineConfig &e = cfg.engine;
  const auto dt_inv = r.get<double>(eng, "engine", "dt_ev_inv", false);
  const auto dt_fs = r.get<double>(eng, "engine", "dt_fs", false);
  if (dt_inv && dt_fs) problems.push_back("engine: give only one of 'dt_ev_inv' and 'dt_fs'");
  e.dt = dt_inv ? *dt_inv : dt_fs ? *dt_fs / kFsPerInvEv : default_dt(cfg.system.g);
  if (auto v = r.get<double>(eng, "engine", "svd_cutoff", false)) e.svd_cutoff = *v;
  if (auto v = r.get<std::size_t>(eng, "engine", "memory_cutoff", false)) e.memory_cutoff = *v;
  if (auto v = r.get<std::size_t>(eng, "engine", "max_bond_dimension", false)) e.max_bond_dimension = *v;
  if (auto v = r.get<std::size_t>(eng, "engine", "n_steps", false)) {
    e.max_steps = *v;
    cfg.n_steps_given = true;
  } else {
    const double rate = cfg.system.gamma > 0.0 ? cfg.system.gamma : cfg.system.kappa;
    e.max_steps = rate > 0.0 && e.dt > 0.0 ? static_cast<std::size_t>(std::ceil(5.0 / (rate * e.dt))) : 1000;
  }
  r.check(e.dt > 0.0, "engine dt must be > 0");
  r.check(e.svd_cutoff >= 0.0, "engine.svd_cutoff must be >= 0");
  r.check(e.max_steps >= 1, "engine.n_steps must be >= 1");

  if (!problems.empty()) throw ConfigError(std::move(problems));

  json echo;
  echo["system"] = {{"omega_e_ev", cfg.system.omega_e}, {"g_ev", cfg.system.g},
                    {"omega_c_ev", cfg.omega_c_from_bath ? json("omega_e - lambda") : json(cfg.system.omega_c)},
                    {"gamma_ev", cfg.system.gamma}, {"kappa_ev", cfg.system.kappa},
                    {"rotating_frame", cfg.system.rotating_frame}};
  json bj = {{"sigma_ev", b.sigma}, {"temperature_k", b.temperature}, {"alpha_hrf", b.alpha_hrf},
             {"effective_width", b.effective_width}, {"grid_points", b.grid_points},
             {"mode_unit", b.mode_unit == EnergyUnit::ev ? "ev" : "mev"}};
  if (b.mode_file) bj["mode_file"] = b.mode_file->string();
  if (b.density)
    bj["density"] = {{"type", b.density->type}, {"center_ev", b.density->center}, {"width_ev", b.density->width},
                     {"cutoff_ev", b.density->cutoff}, {"s_tot", b.density->s_tot}};
  if (b.grid_omega_max) bj["grid_omega_max_ev"] = *b.grid_omega_max;
  echo["bath"] = bj;
  json ej = {{"dt_ev_inv", e.dt}, {"svd_cutoff", e.svd_cutoff}, {"n_steps", e.max_steps}};
  if (e.memory_cutoff) ej["memory_cutoff"] = *e.memory_cutoff;
  if (e.max_bond_dimension) ej["max_bond_dimension"] = *e.max_bond_dimension;
  echo["engine"] = ej;
  json gk = json::array();
  for (auto [g, k] : cfg.g_kappa) gk.push_back({g, k});
  echo["job"] = {{"type", cfg.job ? job_name(*cfg.job) : ""}, {"drive", cfg.drive.name()}, {"pad_to", cfg.pad_to},
                 {"hann", cfg.hann}, {"initial_state", cfg.initial_state}, {"g_kappa_ev", gk},
                 {"corr_t_max_ev_inv", cfg.corr_t_max}, {"corr_points", cfg.corr_points},
                 {"kernel_lags", cfg.kernel_lags}, {"output_dir", cfg.output_dir.string()}};
  cfg.echo = std::move(echo);
  return cfg;
}

JobConfig parse_config_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({fmt::format("cannot open config file '{}'", path.string())});
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error &e) {
    throw ConfigError({fmt::format("config file '{}' is not valid JSON: {}", path.string(), e.what())});
  }
  return parse_config(j, path.parent_path());
}

SpectralDensity build_density(const BathConfig &bath, double alpha) {
  SpectralDensity j;
  if (bath.mode_file) {
    const ModeList modes = load_modes(*bath.mode_file, bath.mode_unit);
    FrequencyGrid grid = default_grid(modes, bath.sigma);
    grid.n_points = bath.grid_points;
    if (bath.grid_omega_max) grid.omega_max = *bath.grid_omega_max;
    j = broaden(modes, bath.sigma, grid);
  } else {
    const AnalyticDensity &a = *bath.density;
    FrequencyGrid grid{0.0, 1.0, bath.grid_points};
    if (a.type == "gaussian") grid.omega_max = a.center + 8.0 * a.width;
    else if (a.type == "superohmic") grid.omega_max = 40.0 * a.cutoff;
    if (bath.grid_omega_max) grid.omega_max = *bath.grid_omega_max;
    if (a.type == "gaussian") j = gaussian_density(a.center, a.width, a.s_tot, grid);
    else if (a.type == "superohmic") j = superohmic_density(a.cutoff, a.s_tot, grid);
    else j = zero_density(grid);
  }
  if (bath.effective_width && total_hrf(j) > 0.0) j = effective_width_sd(j);
  return scale_hrf(j, alpha);
}

SystemParams resolve_system(const JobConfig &cfg, const SpectralDensity &scaled, double g, double kappa) {
  SystemParams p = cfg.system;
  p.g = g;
  p.kappa = kappa;
  if (cfg.omega_c_from_bath) p.omega_c = p.omega_e - reorganization_energy(scaled);
  p.validate();
  return p;
}

DensityMatrix3 initial_state(const std::string &name) {
  DensityMatrix3 r = DensityMatrix3::Zero();
  if (name == "e0") r(kE0, kE0) = 1.0;
  else if (name == "g1") r(kG1, kG1) = 1.0;
  else if (name == "g0") r(kG0, kG0) = 1.0;
  else if (name == "plus") r.topLeftCorner<2, 2>().setConstant(0.5);
  else throw std::invalid_argument("unknown initial state '" + name + "'");
  return r;
}

} // namespace cqed
