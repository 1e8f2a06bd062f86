#include "cachemux/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace cachemux {

namespace {

double default_delta(std::uint64_t horizon) {
  return horizon >= 2 ? 1.0 / static_cast<double>(horizon) : 0.5;
}

std::size_t resolve_threads(std::size_t requested, std::size_t jobs) {
  std::size_t n = requested == 0 ? std::thread::hardware_concurrency() : requested;
  if (n == 0) n = 1;
  return std::min(n, std::max<std::size_t>(jobs, 1));
}

void parallel_for(std::size_t jobs, std::size_t threads,
                  const std::function<void(std::size_t)>& body) {
  threads = resolve_threads(threads, jobs);
  if (threads <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= jobs) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// Argmin over fitted per-model cost estimates; ties go to the higher index.
std::size_t learned_choice(const EstimatorState& est, QueryId q, ScoreSource source) {
  const auto value = [&](std::size_t k) {
    const CostEstimate e = est.cost_estimate(q, k);
    return source == ScoreSource::Plugin ? e.plugin : e.lcb;
  };
  std::size_t best = 0;
  for (std::size_t k = 1; k < est.num_models(); ++k)
    if (value(k) <= value(best)) best = k;
  return best;
}

// Argmin over plug-in means with ties to the LOWER index: the offline
// selector sends exact ties to the small model, unlike its online
// counterpart.
std::size_t offline_choice(const EstimatorState& est, QueryId q) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < est.num_models(); ++k)
    if (est.cost_estimate(q, k).plugin < est.cost_estimate(q, best).plugin) best = k;
  return best;
}

struct Benchmark {
  CacheObjective objective;
  double optimal_step_cost = 0.0;
};

Benchmark make_benchmark(const QueryCatalog& catalog, std::size_t capacity) {
  Benchmark b;
  b.objective = CacheObjective{catalog.num_models() > 1, 0};
  const CacheState best = optimal_cache(catalog, capacity, b.objective);
  b.optimal_step_cost = expected_cache_cost(catalog, best, b.objective);
  return b;
}

}  // namespace

RunSummary run_online_trial(const QueryCatalog& catalog, const PolicySpec& policy,
                            std::size_t capacity, std::uint64_t horizon,
                            std::uint64_t trial_seed, const TrialOptions& options) {
  const std::size_t num_queries = catalog.num_queries();
  const std::size_t num_models = catalog.num_models();
  const EstimatorMode mode =
      num_models > 1 ? EstimatorMode::OnlineJoint : EstimatorMode::OnlineSingle;
  const double delta = options.delta.value_or(default_delta(horizon));

  EstimatorState est(num_queries, num_models, catalog.bounds(), mode, horizon, delta);
  RngStream query_rng = derive_stream(trial_seed, kQueryStreamTag);
  RngStream policy_rng = derive_stream(trial_seed, kPolicyStreamTag);
  CostStreamSet cost_streams(catalog, trial_seed);

  SelectorPolicy selector = policy.selector;
  selector.num_models = num_models;
  if (num_models == 1) selector = SelectorPolicy::always(0, 1);
  selector.validate();
  const bool learned = selector.kind == SelectorPolicy::Kind::Learned;

  CacheState cache = options.warm_start != nullptr ? *options.warm_start
                                                   : CacheState(capacity, num_queries);

  ScoreFunction score_fn;
  score_fn.kind = policy.cache_kind;
  score_fn.source = policy.cache_source;
  score_fn.model = policy.cache_model;
  const auto score = [&](QueryId x) {
    if (!options.oracle_estimates) return score_fn(est, x);
    switch (score_fn.kind) {
      case ScoreFunction::Kind::Lfu: return catalog.prob(x);
      case ScoreFunction::Kind::LecSingle:
        return catalog.prob(x) * catalog.true_mean(x, score_fn.model);
      default: return catalog.prob(x) * catalog.min_true_mean(x);
    }
  };

  // Expected per-arrival processing cost of the current selector, per query,
  // from true means. Only the learned selector mutates these.
  std::vector<std::size_t> chosen(num_queries, 0);
  std::vector<double> sel_cost(num_queries, 0.0);
  for (QueryId q = 0; q < num_queries; ++q) {
    if (learned) {
      if (options.oracle_estimates) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < num_models; ++k)
          if (catalog.true_mean(q, k) < catalog.true_mean(q, best)) best = k;
        chosen[q] = best;
      } else {
        chosen[q] = learned_choice(est, q, selector.source);
      }
      sel_cost[q] = catalog.true_mean(q, chosen[q]);
    } else {
      sel_cost[q] = expected_policy_cost(selector, catalog, q);
    }
  }

  const Benchmark bench = make_benchmark(catalog, capacity);
  double uncovered = 0.0;
  for (QueryId q = 0; q < num_queries; ++q)
    if (!cache.contains(q)) uncovered += catalog.prob(q) * sel_cost[q];

  RunSummary out;
  if (options.record_series) {
    out.cost_series.reserve(horizon);
    out.regret_series.reserve(horizon);
  }

  for (std::uint64_t t = 1; t <= horizon; ++t) {
    const QueryId q = catalog.frequency().sample(query_rng);
    const double expected_step_cost = uncovered;
    const bool hit = cache.contains(q);
    est.record_arrival(q);

    double realized = 0.0;
    int model = -1;
    if (hit) {
      ++out.hits;
    } else {
      const Decision decision =
          learned && options.oracle_estimates
              ? Decision{chosen[q], false}
              : select(selector, q, &est, &catalog, policy_rng);
      const Realization real =
          realize_cost(decision, q, catalog, cost_streams, selector.order);
      realized = real.total;
      model = static_cast<int>(decision.model);
      for (const auto& [k, v] : real.observations) est.record_cost(q, k, v);

      if (learned && !options.oracle_estimates) {
        const std::size_t next_choice = learned_choice(est, q, selector.source);
        if (next_choice != chosen[q]) {
          const double next_cost = catalog.true_mean(q, next_choice);
          uncovered += catalog.prob(q) * (next_cost - sel_cost[q]);
          chosen[q] = next_choice;
          sel_cost[q] = next_cost;
        }
      }

      const ConsiderResult consider = online_consider(cache, q, score);
      if (consider.evicted)
        uncovered += catalog.prob(consider.victim) * sel_cost[consider.victim];
      if (consider.inserted) uncovered -= catalog.prob(q) * sel_cost[q];
    }

    out.cum_cost += realized;
    out.cum_regret += expected_step_cost - bench.optimal_step_cost;
    if (options.record_series) {
      out.cost_series.push_back(out.cum_cost);
      out.regret_series.push_back(out.cum_regret);
    }
    if (options.step_sink)
      options.step_sink(StepRecord{t, q, hit, model, realized, expected_step_cost,
                                   bench.optimal_step_cost, out.cum_cost, out.cum_regret});
    if (options.post_step_hook) options.post_step_hook(est, cache);
  }
  return out;
}

RunSummary run_offline_trial(const QueryCatalog& catalog, const PolicySpec& policy,
                             std::size_t capacity, std::uint64_t num_samples,
                             std::uint64_t horizon, std::uint64_t trial_seed,
                             const TrialOptions& options) {
  const std::size_t num_queries = catalog.num_queries();
  const std::size_t num_models = catalog.num_models();
  const EstimatorMode mode = policy.cache_kind == ScoreFunction::Kind::LecJoint
                                 ? EstimatorMode::OfflineJoint
                                 : EstimatorMode::OfflineSingle;
  const double delta = options.delta.value_or(default_delta(num_samples));

  // Fit: every training arrival observes the cost of every model.
  EstimatorState est(num_queries, num_models, catalog.bounds(), mode,
                     std::max<std::uint64_t>(num_samples, 1), delta);
  {
    RngStream fit_query_rng = derive_stream(trial_seed, kFitStreamTag);
    CostStreamSet fit_costs(catalog, mix_seed(trial_seed, kFitStreamTag));
    for (std::uint64_t n = 0; n < num_samples; ++n) {
      const QueryId q = catalog.frequency().sample(fit_query_rng);
      est.record_arrival(q);
      for (std::size_t k = 0; k < num_models; ++k)
        est.record_cost(q, k, catalog.cost_model(q, k).sample(fit_costs.at(q, k)).value);
    }
  }

  SelectorPolicy selector = policy.selector;
  selector.num_models = num_models;
  if (num_models == 1) selector = SelectorPolicy::always(0, 1);
  selector.validate();
  const bool learned = selector.kind == SelectorPolicy::Kind::Learned;

  ScoreFunction score_fn;
  score_fn.kind = policy.cache_kind;
  score_fn.source = policy.cache_source;
  score_fn.model = policy.cache_model;

  const Benchmark bench = make_benchmark(catalog, capacity);
  const CacheState cache = options.oracle_estimates
                               ? optimal_cache(catalog, capacity, bench.objective)
                               : offline_build_cache(est, score_fn, capacity);

  // Frozen deployment selector. The learned variant maps each query to the
  // plug-in argmin, ties to the lower index.
  std::vector<std::size_t> chosen(num_queries, 0);
  std::vector<double> sel_cost(num_queries, 0.0);
  for (QueryId q = 0; q < num_queries; ++q) {
    if (learned) {
      chosen[q] = offline_choice(est, q);
      sel_cost[q] = catalog.true_mean(q, chosen[q]);
    } else {
      sel_cost[q] = expected_policy_cost(selector, catalog, q);
    }
  }

  double deployed_step_cost = 0.0;
  for (QueryId q = 0; q < num_queries; ++q)
    if (!cache.contains(q)) deployed_step_cost += catalog.prob(q) * sel_cost[q];

  RunSummary out;
  out.exact_suboptimality = deployed_step_cost - bench.optimal_step_cost;
  if (options.record_series) {
    out.cost_series.reserve(horizon);
    out.regret_series.reserve(horizon);
  }

  RngStream query_rng = derive_stream(trial_seed, kQueryStreamTag);
  RngStream policy_rng = derive_stream(trial_seed, kPolicyStreamTag);
  CostStreamSet cost_streams(catalog, trial_seed);
  for (std::uint64_t t = 1; t <= horizon; ++t) {
    const QueryId q = catalog.frequency().sample(query_rng);
    const bool hit = cache.contains(q);
    double realized = 0.0;
    int model = -1;
    if (hit) {
      ++out.hits;
    } else {
      const Decision decision = learned
                                    ? Decision{chosen[q], false}
                                    : select(selector, q, &est, &catalog, policy_rng);
      const Realization real =
          realize_cost(decision, q, catalog, cost_streams, selector.order);
      realized = real.total;
      model = static_cast<int>(decision.model);
    }
    out.cum_cost += realized;
    out.cum_regret += out.exact_suboptimality;
    if (options.record_series) {
      out.cost_series.push_back(out.cum_cost);
      out.regret_series.push_back(out.cum_regret);
    }
    if (options.step_sink)
      options.step_sink(StepRecord{t, q, hit, model, realized, deployed_step_cost,
                                   bench.optimal_step_cost, out.cum_cost, out.cum_regret});
  }
  return out;
}

Aggregate aggregate(const std::vector<RunSummary>& trials) {
  if (trials.empty()) throw std::invalid_argument("aggregate: no trials");
  const std::size_t series_len = trials.front().cost_series.size();
  for (const auto& t : trials)
    if (t.cost_series.size() != series_len || t.regret_series.size() != series_len)
      throw std::invalid_argument("aggregate: trials have mismatched horizons");

  Aggregate agg;
  agg.trials = trials.size();
  const double n = static_cast<double>(trials.size());

  const auto mean_std = [&](auto&& get) {
    double mean = 0.0;
    for (const auto& t : trials) mean += get(t);
    mean /= n;
    double var = 0.0;
    if (trials.size() > 1) {
      for (const auto& t : trials) {
        const double d = get(t) - mean;
        var += d * d;
      }
      var /= (n - 1.0);
    }
    return std::pair<double, double>(mean, std::sqrt(var));
  };

  std::tie(agg.mean_cost, agg.std_cost) =
      mean_std([](const RunSummary& t) { return t.cum_cost; });
  std::tie(agg.mean_regret, agg.std_regret) =
      mean_std([](const RunSummary& t) { return t.cum_regret; });

  if (series_len > 0) {
    agg.cost_series.mean.resize(series_len);
    agg.cost_series.stddev.resize(series_len);
    agg.regret_series.mean.resize(series_len);
    agg.regret_series.stddev.resize(series_len);
    for (std::size_t i = 0; i < series_len; ++i) {
      double mc = 0.0, mr = 0.0;
      for (const auto& t : trials) {
        mc += t.cost_series[i];
        mr += t.regret_series[i];
      }
      mc /= n;
      mr /= n;
      double vc = 0.0, vr = 0.0;
      if (trials.size() > 1) {
        for (const auto& t : trials) {
          vc += (t.cost_series[i] - mc) * (t.cost_series[i] - mc);
          vr += (t.regret_series[i] - mr) * (t.regret_series[i] - mr);
        }
        vc /= (n - 1.0);
        vr /= (n - 1.0);
      }
      agg.cost_series.mean[i] = mc;
      agg.cost_series.stddev[i] = std::sqrt(vc);
      agg.regret_series.mean[i] = mr;
      agg.regret_series.stddev[i] = std::sqrt(vr);
    }
  }
  return agg;
}

std::vector<RunSummary> run_trials(const ExperimentPlan& plan, const PolicySpec& policy) {
  if (plan.trials == 0) throw std::invalid_argument("run_trials: trials must be >= 1");
  if (!plan.catalog_for_trial) throw std::invalid_argument("run_trials: missing catalog factory");
  std::vector<RunSummary> results(plan.trials);
  parallel_for(plan.trials, plan.threads, [&](std::size_t i) {
    const std::uint64_t trial_seed = mix_seed(plan.seed, i);
    const QueryCatalog catalog = plan.catalog_for_trial(trial_seed);
    TrialOptions options = plan.options;
    if (i != 0) {
      // Per-step dumps and audits describe the first trial only.
      options.step_sink = nullptr;
      options.post_step_hook = nullptr;
    }
    results[i] = plan.online
                     ? run_online_trial(catalog, policy, plan.capacity, plan.horizon,
                                        trial_seed, options)
                     : run_offline_trial(catalog, policy, plan.capacity, plan.num_samples,
                                         plan.horizon, trial_seed, options);
  });
  return results;
}

TwoPointResult two_point_regret_experiment(double delta_gap, std::uint64_t horizon,
                                           std::size_t trials, std::uint64_t seed,
                                           std::size_t threads) {
  PolicySpec policy;
  policy.label = "lec";
  policy.cache_kind = ScoreFunction::Kind::LecSingle;
  policy.cache_source = ScoreSource::Lcb;
  policy.selector = SelectorPolicy::always(0, 1);

  TwoPointResult result;
  for (int instance = 0; instance < 2; ++instance) {
    ExperimentPlan plan;
    plan.catalog_for_trial = [delta_gap, instance](std::uint64_t) {
      return make_two_point_instance(delta_gap, instance);
    };
    plan.capacity = 1;
    plan.horizon = horizon;
    plan.trials = trials;
    plan.seed = seed;
    plan.threads = threads;
    const Aggregate agg = aggregate(run_trials(plan, policy));
    result.mean_regret[instance] = agg.mean_regret;
    result.std_regret[instance] = agg.std_regret;
  }
  result.max_mean_regret = std::max(result.mean_regret[0], result.mean_regret[1]);
  return result;
}

}  // namespace cachemux
