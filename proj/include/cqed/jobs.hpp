#pragma once

#include "cqed/config.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>

namespace cqed {

struct RunOptions {
  std::optional<std::filesystem::path> out_dir; // overrides job.output_dir
  std::size_t workers = 1;
  bool seedless = false;
};

struct JobResult {
  int exit_code = 0;
  std::filesystem::path out_dir;
  nlohmann::json manifest;
};

/// Writes via a temporary file and rename so readers never see a partial manifest.
void write_json_atomic(const std::filesystem::path &path, const nlohmann::json &j);

JobResult run_job(const JobConfig &cfg, JobKind kind, const RunOptions &opts = {});

const char *tool_version();

} // namespace cqed
