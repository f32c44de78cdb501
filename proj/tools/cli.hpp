#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "run_config.hpp"

namespace accelgates::cli {

enum ExitCode : int { kOk = 0, kConfigFailure = 1, kAccuracyFailure = 2, kPlanningFailure = 3 };

inline constexpr const char* kToolName = "accelgates";
const char* tool_version();

// '#'-prefixed lines with tool, version, command and the resolved config.
std::string csv_metadata(const std::string& command, const RunConfig& cfg);
nlohmann::json json_metadata(const std::string& command, const RunConfig& cfg);

void cmd_integrals(const RunConfig& cfg, std::ostream& os);
void cmd_scan(const RunConfig& cfg, std::ostream& os);
// Returns false when only a best-effort plan was found.
bool cmd_synthesize(const RunConfig& cfg, std::ostream& os);
// Returns false when any check fails.
bool cmd_oracle_verify(const RunConfig& cfg, std::ostream& os);
void cmd_units(const RunConfig& cfg, std::ostream& os);

// Full command line: parses, loads the config, dispatches and maps errors to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace accelgates::cli
