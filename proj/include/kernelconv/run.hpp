#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kernelconv/config.hpp"

namespace kernelconv {

struct RunOptions {
  std::string out_dir = ".";
  std::optional<int> band;
  std::optional<std::uint64_t> seed;
};

struct RunOutcome {
  int exit_code = 0;  ///< 0 success, 2 negative verdict, 1 error
  std::string report_json;
  std::string report_path;
  std::vector<std::string> artifacts;  ///< files written, report included
};

const std::vector<std::string>& command_names();

/// Executes one command against a loaded config, writing the JSON report and
/// any PGM artifacts under options.out_dir. Errors are captured into an
/// error report with exit code 1 rather than thrown.
RunOutcome run_command(const std::string& command, const RunConfig& config, const RunOptions& options);

/// Convenience wrapper: load_config + run_command, mapping load failures to
/// an error outcome as well.
RunOutcome run_command_on_file(const std::string& command, const std::string& config_path,
                               const RunOptions& options);

}  // namespace kernelconv
