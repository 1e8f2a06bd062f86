#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cachemux/simulate.hpp"

namespace cachemux {

/// Configuration or usage problem; maps to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CatalogSpec {
  enum class Kind { SyntheticFixed, SyntheticBernoulli, Explicit, Trace };

  Kind kind = Kind::SyntheticFixed;
  std::size_t queries = 20;
  std::size_t models = 2;
  double alpha = 0.9;
  double cost_ratio = 100.0;
  double bernoulli_p = 0.5;
  // When set, the same catalog is used for every trial; otherwise each trial
  // redraws the workload from its own seed.
  std::optional<std::uint64_t> seed;
  std::string path;  // trace file
  bool strict_replay = false;
  std::optional<double> b1;
  std::optional<double> b2;
  std::vector<double> weights;
  std::vector<std::vector<double>> costs;

  QueryCatalog build(std::uint64_t trial_seed) const;
};

struct ExperimentConfig {
  bool online = true;
  CatalogSpec catalog;
  std::size_t cache_capacity = 10;
  std::vector<std::string> policies = {"lec+selector"};
  ScoreSource estimate_source = ScoreSource::Lcb;
  double selector_accuracy = 1.0;
  std::vector<std::size_t> cascade_order;
  std::uint64_t horizon = 10000;
  std::uint64_t samples = 10000;  // offline fit size
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  std::optional<double> delta;
  bool record_series = false;
  std::size_t threads = 0;
  // Grids for the `table` subcommand.
  std::vector<double> alphas;
  std::vector<double> cost_ratios;
  std::vector<double> accuracies;
  // `lower-bound` subcommand.
  double delta_gap = 0.1;
};

/// Parses and fully validates a JSON config file. Unknown keys and
/// out-of-range values are rejected with the offending key path.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

/// Resolves a policy token of the form `<cache>+<selector>` where cache is
/// `lfu` or `lec` and selector is `modelK` (1-based), `small`, `large`,
/// `selector`, `oracle`, `noisy`, or `cascade`. `selector` means the learned
/// selector online and the accuracy-limited selector offline.
PolicySpec make_policy(const ExperimentConfig& config, const std::string& token);

/// Effective config (defaults applied) serialized back to JSON text.
std::string effective_config_json(const ExperimentConfig& config);

}  // namespace cachemux
