#pragma once

#include <string>
#include <vector>

#include "rdslab/config.hpp"

namespace rdslab {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kBudgetEnvVar = "RDSLAB_ENUM_BUDGET";

struct RunOutcome {
  std::string manifest_path;
  std::vector<std::string> output_files;
  std::string summary;  // one line per experiment verdict
};

// Executes the experiment in `cfg`, writing CSV / violations JSON /
// manifest.json under cfg.out_dir. Partial outputs are removed when the run
// fails. Throws the module errors; the CLI maps them to exit codes.
RunOutcome run(const RunConfig& cfg);

}  // namespace rdslab
