// Batch front-end for the TEMPO emitter-cavity engine.

#include "cqed/config.hpp"
#include "cqed/jobs.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>

int main(int argc, char **argv) {
  CLI::App app{"TEMPO simulation of an emitter-cavity system with a phonon bath"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cqed::tool_version());

  std::string config_path;
  std::string out_dir;
  std::size_t workers = 1;
  bool seedless = false;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"dynamics", "reduced dynamics from the configured initial state"},
      {"spectrum", "linear absorption spectrum"},
      {"corr", "bath correlation function C(t)"},
      {"kernel", "discretised memory kernel and influence factors"},
      {"sweep", "spectra over alpha_hrf and (g, kappa) grids"},
      {"validate", "parse and check the configuration only"}};
  for (const auto &[name, help] : commands) {
    CLI::App *sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
    if (name != "validate") {
      sub->add_option("--out", out_dir, "output directory (overrides job.output_dir)");
      sub->add_option("--workers", workers, "concurrent sweep entries")->check(CLI::PositiveNumber);
      sub->add_flag("--seedless", seedless, "assert the run uses no random numbers");
    }
  }
  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const cqed::JobConfig cfg = cqed::parse_config_file(config_path);
    if (name == "validate") {
      std::cout << cfg.echo.dump(2) << '\n';
      return 0;
    }
    const cqed::JobKind kind = *cqed::parse_job_name(name);
    if (cfg.job && *cfg.job != kind) {
      fmt::print(stderr, "config declares job '{}' but '{}' was requested\n", cqed::job_name(*cfg.job), name);
      return 2;
    }
    cqed::RunOptions opts;
    if (!out_dir.empty()) opts.out_dir = out_dir;
    opts.workers = workers;
    opts.seedless = seedless;
    const cqed::JobResult res = cqed::run_job(cfg, kind, opts);
    fmt::print("{}: {} -> {}\n", name, res.manifest["status"].get<std::string>(), res.out_dir.string());
    return res.exit_code;
  } catch (const cqed::ConfigError &e) {
    for (const auto &p : e.problems()) fmt::print(stderr, "config error: {}\n", p);
    return 2;
  } catch (const std::exception &e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
}
