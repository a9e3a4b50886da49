#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "run_config.hpp"

namespace wg::cli {

enum ExitCode { kOk = 0, kUsage = 1, kNumeric = 2, kInadmissible = 3 };

struct CommandResult {
  int exit = kOk;
  nlohmann::json report;
  /// Text for stdout when no output path is configured (CSV or OBJ).
  std::string payload;
  std::string warnings;
};

CommandResult cmd_parse(const RunConfig& c);
CommandResult cmd_integrate(const RunConfig& c);
CommandResult cmd_transform(const RunConfig& c);
CommandResult cmd_classify(const RunConfig& c);
CommandResult cmd_reduce(const RunConfig& c);
CommandResult cmd_variational(const RunConfig& c);
CommandResult cmd_export_mesh(const RunConfig& c);
CommandResult cmd_report(const RunConfig& c);

/// Dispatches on c.command, maps library errors to exit codes and writes the
/// report (to c.report or `out`) and any payload.
int run(const RunConfig& c, std::ostream& out, std::ostream& err);

}  // namespace wg::cli
