#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "tubeflock/commands.hpp"

namespace {

struct Subcommand {
  const char* name;
  const char* help;
  int (*fn)(const tubeflock::CommandInput&, std::ostream&, std::ostream&);
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tubeflock: Cucker-Smale flocks with repulsion in an infinite tube"};
  app.require_subcommand(1);

  tubeflock::CommandInput input;
  std::string init;
  const Subcommand table[] = {
      {"simulate", "integrate one configuration and write diagnostics and snapshots", tubeflock::cmd_simulate},
      {"partial-converge", "n-partial ladder convergence study", tubeflock::cmd_partial_converge},
      {"bounds-check", "local energy and speed growth bounds along a ladder", tubeflock::cmd_bounds_check},
      {"flock", "classical free-space model with flocking verdict", tubeflock::cmd_flock},
      {"sample-init", "sample an initial configuration and write a snapshot", tubeflock::cmd_sample_init},
  };
  for (const auto& sc : table) {
    auto* sub = app.add_subcommand(sc.name, sc.help);
    sub->add_option("config", input.config, "config file (JSON) or manifest")->required();
    sub->add_option("--set", input.overrides, "override a key: section.key=value (repeatable)")
        ->allow_extra_args(false);
    if (std::string(sc.name) == "simulate") {
      sub->add_option("--init", init, "initial snapshot (JSONL) instead of sampling");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : tubeflock::kExitConfig;
  }
  if (const char* seed = std::getenv("TUBEFLOCK_SEED")) input.env_seed = seed;
  if (!init.empty()) input.init = init;

  for (const auto& sc : table) {
    if (app.got_subcommand(sc.name)) return sc.fn(input, std::cout, std::cerr);
  }
  return tubeflock::kExitConfig;
}
