#pragma once

#include <optional>
#include <string>

#include "cachemux/config.hpp"

namespace cachemux {

struct CliCommand {
  // simulate-online | simulate-offline | table | lower-bound | trace-run
  std::string subcommand = "simulate-online";
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed_override;
  std::optional<std::size_t> trials_override;
  bool dump_cache = false;
  bool dump_estimators = false;
  std::string format = "csv";  // csv | json
};

/// Runs the command and writes its artifacts under out_dir:
///   steps_<policy>.csv (or .json) with the first trial's trajectory,
///   summary.json with the effective config and per-policy aggregates,
///   cache.csv / estimators.json when the dump flags are set,
///   and for `table` a grid summary plus a rendered text table on stdout.
/// Returns the process exit status: 0 ok, 1 usage/config error, 2 runtime
/// error. Partially written outputs are removed on failure.
int run_and_emit(const CliCommand& command);

}  // namespace cachemux
