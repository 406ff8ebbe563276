#pragma once

#include <string>

#include "run_config.hpp"

namespace nonloc::cli {

struct Outcome {
  int code = 0;         // 0 pass/holds, 2 fails, 3 inconclusive
  std::string summary;  // one line
};

// Runs one command and writes its artifacts into cfg.output_dir().
Outcome run_command(const std::string& command, const RunConfig& cfg);

}  // namespace nonloc::cli
