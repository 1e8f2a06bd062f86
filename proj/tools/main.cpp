#include <CLI11.hpp>

#include "cachemux/report.hpp"

int main(int argc, char** argv) {
  CLI::App app{"cachemux: cost-aware caching and model-multiplexing simulator"};
  app.require_subcommand(1);

  cachemux::CliCommand cmd;
  std::uint64_t seed = 0;
  std::size_t trials = 0;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", cmd.config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", cmd.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--trials", trials, "override the config trial count")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--dump-cache", cmd.dump_cache, "write per-step cache contents (first trial)");
    sub->add_flag("--dump-estimators", cmd.dump_estimators,
                  "write the fitted estimator state (first trial)");
    sub->add_option("--format", cmd.format, "step log format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
  };

  add_common(app.add_subcommand("simulate-online", "run the online learning loop"));
  add_common(app.add_subcommand("simulate-offline", "fit offline, then deploy"));
  add_common(app.add_subcommand("table", "sweep (alpha, cost ratio) grids per policy"));
  add_common(app.add_subcommand("lower-bound", "two-instance regret floor experiment"));
  add_common(app.add_subcommand("trace-run", "replay a recorded cost trace"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  cmd.subcommand = sub->get_name();
  if (sub->count("--seed") > 0) cmd.seed_override = seed;
  if (sub->count("--trials") > 0) cmd.trials_override = trials;
  return cachemux::run_and_emit(cmd);
}
