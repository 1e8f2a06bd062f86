#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cachemux/cache.hpp"
#include "cachemux/catalog.hpp"
#include "cachemux/estimator.hpp"
#include "cachemux/selector.hpp"

namespace cachemux {

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a;
  std::uint64_t k = splitmix64(s);
  s ^= b + 0x9E3779B97F4A7C15ull;
  return k ^ splitmix64(s);
}

/// One cache-policy / selector-policy combination under evaluation.
struct PolicySpec {
  std::string label;
  ScoreFunction::Kind cache_kind = ScoreFunction::Kind::LecJoint;
  ScoreSource cache_source = ScoreSource::Lcb;
  std::size_t cache_model = 0;  // lec-single only
  SelectorPolicy selector;
};

struct StepRecord {
  std::uint64_t t = 0;
  QueryId query = 0;
  bool hit = false;
  int model = -1;  // -1 when the cache answered
  double realized_cost = 0.0;
  double expected_step_cost = 0.0;  // cost of the current (cache, selector) under true means
  double optimal_step_cost = 0.0;   // cost of the population-optimal pair
  double cum_cost = 0.0;
  double cum_regret = 0.0;
};

struct TrialOptions {
  bool record_series = false;
  std::optional<double> delta;  // overrides 1/T (online) or 1/N (offline)
  // Scores caches from the catalog truth instead of fitted estimates
  // (benchmark / sanity configurations).
  bool oracle_estimates = false;
  const CacheState* warm_start = nullptr;
  // Observers; under run_trials only the first trial keeps them.
  std::function<void(const StepRecord&)> step_sink;
  std::function<void(const EstimatorState&, const CacheState&)> post_step_hook;
};

struct RunSummary {
  double cum_cost = 0.0;
  double cum_regret = 0.0;
  std::uint64_t hits = 0;
  // Offline runs: exact expected per-request excess of the fitted
  // (cache, selector) over the optimal pair, computed from true means.
  double exact_suboptimality = 0.0;
  std::vector<double> cost_series;    // cumulative, when recorded
  std::vector<double> regret_series;  // cumulative, when recorded
};

/// Full online loop: arrivals, hit short-circuit with censored cost,
/// selector decision, estimator update, cache replacement. Regret is charged
/// per step as cost(cache_t, selector_t) - cost(optimum) from true means.
RunSummary run_online_trial(const QueryCatalog& catalog, const PolicySpec& policy,
                            std::size_t capacity, std::uint64_t horizon,
                            std::uint64_t trial_seed, const TrialOptions& options = {});

/// Offline pipeline: fit plug-in estimates on `num_samples` draws that
/// observe every model per arrival, build the cache once, then charge
/// `horizon` fresh requests against the frozen cache and selector.
RunSummary run_offline_trial(const QueryCatalog& catalog, const PolicySpec& policy,
                             std::size_t capacity, std::uint64_t num_samples,
                             std::uint64_t horizon, std::uint64_t trial_seed,
                             const TrialOptions& options = {});

struct SeriesStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

struct Aggregate {
  std::size_t trials = 0;
  double mean_cost = 0.0;
  double std_cost = 0.0;
  double mean_regret = 0.0;
  double std_regret = 0.0;
  SeriesStats cost_series;    // populated when every trial recorded series
  SeriesStats regret_series;
};

/// Pointwise mean and sample standard deviation across trials.
/// Trials must share a horizon.
Aggregate aggregate(const std::vector<RunSummary>& trials);

/// Multi-trial driver. Each trial derives its own seed from `seed`; the
/// catalog factory receives that per-trial seed, so workloads are redrawn
/// per trial unless the factory ignores the seed. Trials run in parallel
/// (`threads` = 0 picks the hardware count) and are reduced in trial order,
/// keeping results byte-identical for a given configuration and seed.
struct ExperimentPlan {
  std::function<QueryCatalog(std::uint64_t)> catalog_for_trial;
  std::size_t capacity = 0;
  std::uint64_t horizon = 1;
  std::uint64_t num_samples = 0;  // offline fit size
  bool online = true;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  TrialOptions options;
};

std::vector<RunSummary> run_trials(const ExperimentPlan& plan, const PolicySpec& policy);

struct TwoPointResult {
  double mean_regret[2] = {0.0, 0.0};
  double std_regret[2] = {0.0, 0.0};
  double max_mean_regret = 0.0;
};

/// Runs the single-model online algorithm on the two-instance pair whose
/// per-query costs differ by +/- delta_gap, and reports the worse of the two
/// mean regrets (the quantity the adaptive-adversary argument bounds from
/// below).
TwoPointResult two_point_regret_experiment(double delta_gap, std::uint64_t horizon,
                                           std::size_t trials, std::uint64_t seed,
                                           std::size_t threads = 0);

}  // namespace cachemux
