#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"

namespace qwalk::cli {

// Header lines shared by every file a command writes.
std::vector<std::string> provenance(const ExperimentConfig& config);

// Each command writes its files under config.out, a summary to `out` and one
// line per realization to `log`. Returns the paths written, in order.
std::vector<std::string> cmd_fig1(const ExperimentConfig& config, std::ostream& out,
                                  std::ostream& log);
std::vector<std::string> cmd_fig2(const ExperimentConfig& config, std::ostream& out,
                                  std::ostream& log);
std::vector<std::string> cmd_fig3(const ExperimentConfig& config, std::ostream& out,
                                  std::ostream& log);
std::vector<std::string> cmd_run(const ExperimentConfig& config, std::ostream& out,
                                 std::ostream& log);

// Full front end: parse `args` (without the program name), dispatch, and map
// errors to exit codes: 0 success, 1 validation error, 2 numerical failure.
int run_cli(std::span<const std::string> args, const char* seed_env, std::ostream& out,
            std::ostream& err);

}  // namespace qwalk::cli
