#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace mtjsnn {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitSimulationFailure = 3,
  kExitBudgetExhausted = 4,
  kExitDiverged = 5,
  kExitCheckFailed = 6,
};

struct CommandOptions {
  std::filesystem::path config;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;  // overrides train.seed
  std::optional<std::string> grid;    // sweep-latency only
};

// Each command writes its files into options.out (created if missing),
// prints a short summary to `log` and diagnostics to `err`, and returns an
// ExitCode.
int cmd_simulate(const CommandOptions& options, std::ostream& log, std::ostream& err);
int cmd_train(const CommandOptions& options, std::ostream& log, std::ostream& err);
int cmd_bench_xor(const CommandOptions& options, std::ostream& log, std::ostream& err);
int cmd_sweep_latency(const CommandOptions& options, std::ostream& log, std::ostream& err);

}  // namespace mtjsnn
