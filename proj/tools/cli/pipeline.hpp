#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli/config.hpp"

namespace gapforge::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitChecksFailed = 1;
inline constexpr int kExitError = 2;

struct Report {
  nlohmann::json document;  // always carries "command" and "status"
  std::vector<std::pair<std::string, std::string>> files;  // name -> content
  std::string table_csv;  // primary table for --format csv on stdout
  int exit_code = kExitPass;
};

/// Runs one command. Library errors do not escape: they are recorded in the
/// report with status "error" next to whatever was computed before the
/// failure, and the exit code becomes kExitError.
Report run_pipeline(const RunConfig& cfg);

/// Writes report.json and the auxiliary files into cfg.out_dir, or prints
/// the report (or its primary table) to `out`. Throws Error(Config) when the
/// directory cannot be written.
void emit_report(const RunConfig& cfg, const Report& report, std::ostream& out);

}  // namespace gapforge::cli
