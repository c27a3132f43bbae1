#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mrfgraft/config.hpp"

namespace mrfgraft {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitRuntime = 2 };

// Each command writes into config.output.dir and returns normally or throws.
void cmd_generate(const RunConfig& config, std::ostream& log);
void cmd_learn(const RunConfig& config, std::ostream& log);
// Prints the report JSON and writes report.json.
void cmd_evaluate(const RunConfig& config, std::ostream& out);
void cmd_simulate_reservoir(const RunConfig& config, std::ostream& log);

// Full command line (without the program name). Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mrfgraft
