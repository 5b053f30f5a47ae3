#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "retrorank/training/config.hpp"

namespace retrorank {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,
  kExitDiverged = 3,
  kExitBadCheckpoint = 4,
};

// Seed used when neither a flag nor a config file gives one:
// RETRORANK_SEED if set, else the builtin default. Throws ConfigError when
// RETRORANK_SEED is not a plain unsigned integer.
std::uint64_t default_seed();

// Entry point of the retrorank binary. Subcommands: augment, train, eval,
// score, gradcheck, synth. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace retrorank
