#include "cqed/jobs.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <thread>

#ifndef CQED_VERSION
#define CQED_VERSION "0.0.0"
#endif

namespace cqed {

using nlohmann::json;
namespace fs = std::filesystem;

const char *tool_version() { return CQED_VERSION; }

void write_json_atomic(const fs::path &path, const json &j) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

std::size_t spectrum_cap(const JobConfig &cfg) { return cfg.n_steps_given ? cfg.engine.max_steps : 4096; }

std::size_t kernel_lags_for(const EngineConfig &e) {
  const std::size_t horizon = e.max_steps > 0 ? e.max_steps - 1 : 0;
  return std::max<std::size_t>(1, e.memory_cutoff ? std::min(*e.memory_cutoff, horizon) : horizon);
}

json entry_json(double alpha, const SystemParams &p) {
  return {{"alpha_hrf", alpha}, {"g_ev", p.g}, {"kappa_ev", p.kappa}, {"gamma_ev", p.gamma},
          {"omega_e_ev", p.omega_e}, {"omega_c_ev", p.omega_c}};
}

void write_spectrum(const fs::path &dir, const Spectrum &s, const ResponseSeries &r, const JobConfig &cfg,
                    double alpha, const SystemParams &p, const SpectralDensity &j) {
  {
    auto out = fmt::output_file((dir / "spectrum.csv").string());
    out.print("omega_ev,A\n");
    for (std::size_t i = 0; i < s.omega.size(); ++i) out.print("{:.17g},{:.17g}\n", s.omega[i], s.a_vals[i]);
  }
  json side = {{"drive", r.drive.name()},
               {"alpha_hrf", alpha},
               {"g_ev", p.g},
               {"kappa_ev", p.kappa},
               {"gamma_ev", p.gamma},
               {"omega_e_ev", p.omega_e},
               {"omega_c_ev", p.omega_c},
               {"temperature_k", cfg.bath.temperature},
               {"dt_ev_inv", r.cfg.dt},
               {"svd_cutoff", r.cfg.svd_cutoff},
               {"pad_to", s.pad_to},
               {"resolution_ev", s.resolution},
               {"n_samples", r.values.size()},
               {"equilibration_residual", r.residual},
               {"s_tot", total_hrf(j)},
               {"warnings", r.warnings}};
  write_json_atomic(dir / "spectrum.json", side);
}

struct SpectrumOutcome {
  json run;
  std::optional<Splitting> split;
  bool ok = false;
};

SpectrumOutcome run_spectrum_entry(const JobConfig &cfg, double alpha, double g, double kappa, const fs::path &dir) {
  SpectrumOutcome o;
  try {
    const SpectralDensity j = build_density(cfg.bath, alpha);
    const SystemParams p = resolve_system(cfg, j, g, kappa);
    o.run = entry_json(alpha, p);
    EngineConfig e = cfg.engine;
    e.max_steps = spectrum_cap(cfg);
    const MemoryKernel k = memory_kernel(j, cfg.bath.temperature, e.dt, kernel_lags_for(e));
    const ResponseSeries r = response_until_equilibrium(cfg.drive, e, p, k);
    std::size_t pad = cfg.pad_to;
    while (pad < r.values.size()) pad *= 2;
    const Spectrum s = absorption_spectrum(r, pad, cfg.hann);
    fs::create_directories(dir);
    write_spectrum(dir, s, r, cfg, alpha, p, j);
    o.run["max_bond_dimension"] = r.max_bond_dimension;
    o.run["discarded_weight"] = r.discarded_weight;
    o.run["equilibration_residual"] = r.residual;
    o.run["n_samples"] = r.values.size();
    o.run["pad_to"] = pad;
    o.run["warnings"] = r.warnings;
    o.run["files"] = {(dir / "spectrum.csv").string(), (dir / "spectrum.json").string()};
    try {
      o.split = find_splitting(s);
      o.run["peaks_ev"] = {o.split->peaks.first, o.split->peaks.second};
      o.run["splitting_ev"] = o.split->splitting;
    } catch (const SplittingError &err) {
      o.run["splitting_ev"] = nullptr;
      o.run["splitting_note"] = err.what();
    }
    o.run["status"] = "ok";
    o.ok = true;
  } catch (const std::exception &err) {
    o.run["status"] = "failed";
    o.run["error"] = err.what();
  }
  return o;
}

} // namespace

JobResult run_job(const JobConfig &cfg, JobKind kind, const RunOptions &opts) {
  const auto t0 = std::chrono::steady_clock::now();
  JobResult res;
  res.out_dir = opts.out_dir.value_or(cfg.output_dir);
  fs::create_directories(res.out_dir);
  json runs = json::array();
  json files = json::array();
  bool failed = false;

  if (kind != JobKind::sweep && cfg.bath.alpha_is_list && cfg.bath.alpha_hrf.size() > 1)
    throw ConfigError({fmt::format("job '{}' takes a single alpha_hrf; use 'sweep' for lists", job_name(kind))});
  const double alpha = cfg.bath.alpha_hrf.front();

  switch (kind) {
  case JobKind::dynamics: {
    const SpectralDensity j = build_density(cfg.bath, alpha);
    const SystemParams p = resolve_system(cfg, j, cfg.system.g, cfg.system.kappa);
    const MemoryKernel k = memory_kernel(j, cfg.bath.temperature, cfg.engine.dt, kernel_lags_for(cfg.engine));
    json run = entry_json(alpha, p);
    try {
      const Trajectory tr = run_dynamics(initial_state(cfg.initial_state), cfg.engine, p, k);
      std::ofstream out(res.out_dir / "dynamics.csv");
      write_trajectory_csv(tr, out);
      files.push_back((res.out_dir / "dynamics.csv").string());
      run["max_bond_dimension"] = *std::max_element(tr.bond_dim.begin(), tr.bond_dim.end());
      run["discarded_weight"] = tr.discarded_weight.back();
      run["n_steps"] = tr.size() - 1;
      run["status"] = "ok";
    } catch (const std::exception &err) {
      run["status"] = "failed";
      run["error"] = err.what();
      failed = true;
    }
    runs.push_back(run);
    break;
  }
  case JobKind::spectrum: {
    SpectrumOutcome o = run_spectrum_entry(cfg, alpha, cfg.system.g, cfg.system.kappa, res.out_dir);
    failed = !o.ok;
    if (o.ok)
      for (const auto &f : o.run["files"]) files.push_back(f);
    runs.push_back(o.run);
    break;
  }
  case JobKind::corr: {
    const SpectralDensity j = build_density(cfg.bath, alpha);
    auto out = fmt::output_file((res.out_dir / "corr.csv").string());
    out.print("t_ev_inv,t_fs,re_C,im_C\n");
    for (std::size_t i = 0; i < cfg.corr_points; ++i) {
      const double t = cfg.corr_t_max * static_cast<double>(i) / static_cast<double>(cfg.corr_points - 1);
      const Complex c = correlation_function(j, cfg.bath.temperature, t);
      out.print("{:.17g},{:.17g},{:.17g},{:.17g}\n", t, t * kFsPerInvEv, c.real(), c.imag());
    }
    out.close();
    files.push_back((res.out_dir / "corr.csv").string());
    runs.push_back({{"alpha_hrf", alpha}, {"s_tot", total_hrf(j)}, {"reorganization_energy_ev", reorganization_energy(j)},
                    {"diagnostics", j.diagnostics}, {"status", "ok"}});
    break;
  }
  case JobKind::kernel: {
    const SpectralDensity j = build_density(cfg.bath, alpha);
    const MemoryKernel k = memory_kernel(j, cfg.bath.temperature, cfg.engine.dt, cfg.kernel_lags);
    {
      auto out = fmt::output_file((res.out_dir / "kernel.csv").string());
      out.print("delta,re_eta,im_eta\n");
      for (std::size_t d = 0; d < k.eta.size(); ++d) out.print("{},{:.17g},{:.17g}\n", d, k.eta[d].real(), k.eta[d].imag());
    }
    {
      auto out = fmt::output_file((res.out_dir / "influence.csv").string());
      out.print("delta,beta_later,beta_earlier,re_b,im_b\n");
      for (std::size_t d = 0; d < k.eta.size(); ++d) {
        const InfluenceTensor b = influence_tensor(k, d);
        for (int i = 0; i < 9; ++i)
          for (int l = 0; l < 9; ++l)
            out.print("{},{},{},{:.17g},{:.17g}\n", d, i, l, b.values(i, l).real(), b.values(i, l).imag());
      }
    }
    files.push_back((res.out_dir / "kernel.csv").string());
    files.push_back((res.out_dir / "influence.csv").string());
    runs.push_back({{"alpha_hrf", alpha}, {"dt_ev_inv", k.dt}, {"temperature_k", k.temperature},
                    {"n_lags", k.eta.size()}, {"status", "ok"}});
    break;
  }
  case JobKind::sweep: {
    struct Entry {
      double alpha, g, kappa;
    };
    std::vector<Entry> entries;
    for (auto [g, kappa] : cfg.g_kappa)
      for (double a : cfg.bath.alpha_hrf) entries.push_back({a, g, kappa});
    std::vector<SpectrumOutcome> out(entries.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < entries.size();) {
        const Entry &e = entries[i];
        out[i] = run_spectrum_entry(cfg, e.alpha, e.g, e.kappa, res.out_dir / fmt::format("entry_{:03d}", i));
        out[i].run["entry"] = i;
      }
    };
    const std::size_t n_workers = std::clamp<std::size_t>(opts.workers, 1, std::max<std::size_t>(1, entries.size()));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto &t : pool) t.join();

    const double s_tot = total_hrf(build_density(cfg.bath, 1.0));
    auto sum = fmt::output_file((res.out_dir / "summary.csv").string());
    sum.print("alpha_hrf,g_mev,kappa_mev,splitting_mev,splitting_ratio,franck_condon,status\n");
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const Entry &e = entries[i];
      std::optional<double> ref;
      for (std::size_t r = 0; r < entries.size(); ++r)
        if (entries[r].alpha == 0.0 && entries[r].g == e.g && entries[r].kappa == e.kappa && out[r].split)
          ref = out[r].split->splitting;
      const bool has = out[i].split.has_value();
      const std::string status = !out[i].ok ? "failed" : has ? "ok" : "no_splitting";
      sum.print("{},{:.17g},{:.17g},{},{},{:.17g},{}\n", e.alpha, e.g * 1e3, e.kappa * 1e3,
                has ? fmt::format("{:.17g}", out[i].split->splitting * 1e3) : "nan",
                has && ref ? fmt::format("{:.17g}", out[i].split->splitting / *ref) : "nan",
                franck_condon(e.alpha, s_tot), status);
      failed = failed || !out[i].ok;
      if (out[i].ok)
        for (const auto &f : out[i].run["files"]) files.push_back(f);
      runs.push_back(out[i].run);
    }
    sum.close();
    files.push_back((res.out_dir / "summary.csv").string());
    break;
  }
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  res.manifest = {{"tool", "cqed-tempo"},
                  {"version", tool_version()},
                  {"job", job_name(kind)},
                  {"config", cfg.echo},
                  {"workers", opts.workers},
                  {"seedless", opts.seedless},
                  {"wall_clock_s", wall},
                  {"runs", runs},
                  {"files", files},
                  {"status", failed ? "failed" : "ok"}};
  write_json_atomic(res.out_dir / "manifest.json", res.manifest);
  res.exit_code = failed ? 1 : 0;
  return res;
}

} // namespace cqed
