#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace exclusim {

inline constexpr const char* sidecar_schema = "exclusim.sidecar/1";

struct RunOptions {
  //! Overrides the file's worker count when set.
  std::optional<int> workers;
  //! Overrides the file's output directory when set.
  std::optional<std::filesystem::path> out_dir;
};

struct RunResult {
  //! 0 ok, 1 a check of the experiment failed.
  int exit_code = 0;
  std::string kind;
  std::filesystem::path csv;
  std::filesystem::path sidecar;
  //! One-line human summary.
  std::string message;
};

/// Runs an experiment file, or re-runs the experiment recorded in a sidecar.
/// Throws ParseError for malformed input and exclusim::Error for failed
/// module preconditions.
RunResult run_experiment(const std::string& text, const std::string& name, const RunOptions& opts = {});
RunResult run_experiment_file(const std::filesystem::path& file, const RunOptions& opts = {});

}  // namespace exclusim
