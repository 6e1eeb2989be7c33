#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tubeflock {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerdictFail = 1,
  kExitConfig = 2,
  kExitIntegration = 3,
  kExitPrecondition = 4,
  kExitBlowUp = 5,
};

struct CommandInput {
  std::filesystem::path config;
  std::vector<std::string> overrides;   // "section.key=value"
  std::optional<std::string> env_seed;  // value of TUBEFLOCK_SEED, if set
  std::optional<std::string> init;      // simulate: initial snapshot path
};

int cmd_simulate(const CommandInput& in, std::ostream& out, std::ostream& err);
int cmd_partial_converge(const CommandInput& in, std::ostream& out, std::ostream& err);
int cmd_bounds_check(const CommandInput& in, std::ostream& out, std::ostream& err);
int cmd_flock(const CommandInput& in, std::ostream& out, std::ostream& err);
int cmd_sample_init(const CommandInput& in, std::ostream& out, std::ostream& err);

/// Shortest decimal that reads back to the same double.
std::string format_double(double x);

}  // namespace tubeflock
