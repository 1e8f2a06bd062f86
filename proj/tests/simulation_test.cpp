#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "cachemux/config.hpp"
#include "cachemux/simulate.hpp"

using namespace cachemux;

namespace {

PolicySpec lec_policy(ScoreSource source = ScoreSource::Lcb) {
  PolicySpec p;
  p.label = "lec+selector";
  p.cache_kind = ScoreFunction::Kind::LecJoint;
  p.cache_source = source;
  p.selector = SelectorPolicy::learned(source);
  return p;
}

PolicySpec lfu_policy(std::size_t model) {
  PolicySpec p;
  p.label = "lfu+model";
  p.cache_kind = ScoreFunction::Kind::Lfu;
  p.selector = SelectorPolicy::always(model);
  return p;
}

PolicySpec lec_single_policy(std::size_t model, ScoreSource source = ScoreSource::Lcb) {
  PolicySpec p;
  p.label = "lec+model";
  p.cache_kind = ScoreFunction::Kind::LecSingle;
  p.cache_source = source;
  p.cache_model = model;
  p.selector = SelectorPolicy::always(model);
  return p;
}

}  // namespace

TEST_CASE("point-mass workload pays only the first draw") {
  const auto cat = make_explicit_catalog({1.0, 0.0}, {{6.0}, {2.0}});
  const auto summary = run_online_trial(cat, lec_single_policy(0), 1, 500, 42);
  CHECK(summary.cum_cost == 6.0);  // first arrival misses, everything after hits
  CHECK(summary.hits == 499);
}

TEST_CASE("oracle scores with a warm optimal cache never regret") {
  RngStream rng(9);
  const auto cat = make_bernoulli_catalog(10, 0.8, 2, 20.0, rng);
  const auto best = optimal_cache(cat, 4, CacheObjective{true, 0});
  TrialOptions options;
  options.oracle_estimates = true;
  options.warm_start = &best;
  const auto summary = run_online_trial(cat, lec_policy(), 4, 2000, 7, options);
  CHECK(summary.cum_regret == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("cache hits censor cost observations") {
  RngStream rng(10);
  const auto cat = make_bernoulli_catalog(6, 0.5, 1, 10.0, rng);
  std::uint64_t misses = 0, observations = 0;
  TrialOptions options;
  options.step_sink = [&](const StepRecord& r) {
    if (r.hit) {
      CHECK(r.realized_cost == 0.0);
      CHECK(r.model == -1);
    } else {
      ++misses;
    }
  };
  options.post_step_hook = [&](const EstimatorState& est, const CacheState&) {
    observations = 0;
    for (QueryId q = 0; q < est.num_queries(); ++q) observations += est.observations(q, 0);
    CHECK(est.total_steps() >= observations);  // arrivals counted even when censored
  };
  const auto summary = run_online_trial(cat, lec_single_policy(0), 2, 800, 3, options);
  CHECK(observations == misses);
  CHECK(summary.hits + misses == 800);
}

TEST_CASE("expected step costs: cost-aware cache dominates frequency cache under oracle scores") {
  const auto cat = make_explicit_catalog(
      power_law_weights(10, 0.7),
      {{9.0}, {1.5}, {8.0}, {1.0}, {7.5}, {2.0}, {6.0}, {1.0}, {5.0}, {9.5}});
  std::vector<double> lec_expected, lfu_expected;
  TrialOptions options;
  options.oracle_estimates = true;

  options.step_sink = [&](const StepRecord& r) { lec_expected.push_back(r.expected_step_cost); };
  run_online_trial(cat, lec_single_policy(0), 3, 1500, 11, options);
  options.step_sink = [&](const StepRecord& r) { lfu_expected.push_back(r.expected_step_cost); };
  run_online_trial(cat, lfu_policy(0), 3, 1500, 11, options);

  REQUIRE(lec_expected.size() == lfu_expected.size());
  for (std::size_t i = 0; i < lec_expected.size(); ++i)
    CHECK(lec_expected[i] <= lfu_expected[i] + 1e-12);
}

TEST_CASE("after every step the cache minimizes the fitted objective") {
  for (const auto source : {ScoreSource::Lcb, ScoreSource::Plugin}) {
    RngStream rng(21);
    const auto cat = make_bernoulli_catalog(8, 0.6, 1, 8.0, rng);
    const std::size_t capacity = 3;
    TrialOptions options;
    options.post_step_hook = [&](const EstimatorState& est, const CacheState& cache) {
      const auto cost_of = [&](QueryId q) {
        const auto e = est.cost_estimate(q, 0);
        return source == ScoreSource::Plugin ? e.plugin : e.lcb;
      };
      const auto objective = [&](std::uint32_t mask) {
        double total = 0.0;
        for (QueryId q = 0; q < 8; ++q)
          if (!(mask & (1u << q))) total += est.freq_estimate(q) * cost_of(q);
        return total;
      };
      std::uint32_t cache_mask = 0;
      for (QueryId q : cache.entries()) cache_mask |= 1u << q;
      double best = objective(0);
      for (std::uint32_t mask = 0; mask < (1u << 8); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) > capacity) continue;
        best = std::min(best, objective(mask));
      }
      CHECK(objective(cache_mask) <= best + 1e-9);
    };
    run_online_trial(cat, lec_single_policy(0, source), capacity, 400, 5, options);
  }
}

TEST_CASE("forcing the selector to one model reduces the joint loop to the single-model loop") {
  // Constant equal costs across both models make the trajectories comparable
  // draw for draw. Plug-in scores keep the fitted states identical; the
  // pessimistic widths would differ because the joint and single modes use
  // different log constants.
  std::vector<double> weights = power_law_weights(6, 0.8);
  std::vector<std::vector<double>> joint_costs = {{4, 4}, {9, 9}, {2, 2}, {7, 7}, {5, 5}, {3, 3}};
  std::vector<std::vector<double>> single_costs = {{4}, {9}, {2}, {7}, {5}, {3}};
  const auto joint_cat = make_explicit_catalog(weights, joint_costs);
  const auto single_cat = make_explicit_catalog(weights, single_costs);

  PolicySpec joint_pol = lec_single_policy(1, ScoreSource::Plugin);
  joint_pol.cache_model = 1;
  const auto joint = run_online_trial(joint_cat, joint_pol, 2, 3000, 99);
  const auto single =
      run_online_trial(single_cat, lec_single_policy(0, ScoreSource::Plugin), 2, 3000, 99);
  CHECK(joint.cum_cost == single.cum_cost);
  CHECK(joint.cum_regret == doctest::Approx(single.cum_regret).epsilon(1e-12));
  CHECK(joint.hits == single.hits);
}

TEST_CASE("runs are deterministic given configuration and seed") {
  const CatalogSpec spec = [] {
    CatalogSpec s;
    s.kind = CatalogSpec::Kind::SyntheticFixed;
    s.queries = 12;
    s.models = 2;
    s.alpha = 0.7;
    s.cost_ratio = 30.0;
    return s;
  }();
  ExperimentPlan plan;
  plan.catalog_for_trial = [&](std::uint64_t seed) { return spec.build(seed); };
  plan.capacity = 4;
  plan.horizon = 2000;
  plan.trials = 8;
  plan.seed = 31337;
  plan.options.record_series = true;

  const auto a = run_trials(plan, lec_policy());
  const auto b = run_trials(plan, lec_policy());
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].cum_cost == b[i].cum_cost);
    CHECK(a[i].cum_regret == b[i].cum_regret);
    CHECK(a[i].cost_series == b[i].cost_series);
    CHECK(a[i].regret_series == b[i].regret_series);
  }

  // cumulative series are non-decreasing partial sums
  for (const auto& t : a) {
    for (std::size_t i = 1; i < t.cost_series.size(); ++i) {
      REQUIRE(t.cost_series[i] >= t.cost_series[i - 1]);
      REQUIRE(t.regret_series[i] >= t.regret_series[i - 1] - 1e-12);
    }
  }

  plan.seed = 31338;
  const auto c = run_trials(plan, lec_policy());
  bool any_different = false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (c[i].cum_cost != a[i].cum_cost) any_different = true;
  CHECK(any_different);
}

TEST_CASE("aggregate statistics") {
  RunSummary two;
  two.cum_cost = 2.0;
  two.cum_regret = 1.0;
  two.cost_series = {2.0};
  two.regret_series = {1.0};
  RunSummary four = two;
  four.cum_cost = 4.0;
  four.cost_series = {4.0};

  SUBCASE("single trial has zero deviation") {
    const auto agg = aggregate({two});
    CHECK(agg.mean_cost == 2.0);
    CHECK(agg.std_cost == 0.0);
  }
  SUBCASE("hand values for two trials") {
    const auto agg = aggregate({two, four});
    CHECK(agg.mean_cost == doctest::Approx(3.0));
    CHECK(agg.std_cost == doctest::Approx(std::sqrt(2.0)));
    CHECK(agg.cost_series.mean[0] == doctest::Approx(3.0));
    CHECK(agg.cost_series.stddev[0] == doctest::Approx(std::sqrt(2.0)));
  }
  SUBCASE("order of trials does not matter") {
    const auto ab = aggregate({two, four});
    const auto ba = aggregate({four, two});
    CHECK(ab.mean_cost == ba.mean_cost);
    CHECK(ab.std_cost == ba.std_cost);
  }
  SUBCASE("mismatched horizons rejected") {
    RunSummary longer = two;
    longer.cost_series = {2.0, 2.0};
    longer.regret_series = {1.0, 1.0};
    CHECK_THROWS_AS(aggregate({two, longer}), std::invalid_argument);
  }
  SUBCASE("empty input rejected") {
    CHECK_THROWS_AS(aggregate({}), std::invalid_argument);
  }
}

TEST_CASE("two-instance regret experiment") {
  SUBCASE("zero gap makes the instances literally identical") {
    const auto result = two_point_regret_experiment(0.0, 400, 10, 5);
    CHECK(result.mean_regret[0] == result.mean_regret[1]);
  }
  SUBCASE("clearly separated instance accrues positive regret") {
    const auto result = two_point_regret_experiment(0.2, 5000, 100, 7);
    CHECK(result.mean_regret[0] > 0.0);
    CHECK(result.max_mean_regret >= result.mean_regret[0]);
  }
  SUBCASE("gap of one over sqrt(T) still forces positive worst-case regret") {
    const std::uint64_t horizon = 10000;
    const auto result = two_point_regret_experiment(0.01, horizon, 100, 8);
    CHECK(result.max_mean_regret > 0.0);
    MESSAGE("max regret / sqrt(T) = ",
            result.max_mean_regret / std::sqrt(static_cast<double>(horizon)));
  }
  SUBCASE("invalid gap rejected") {
    CHECK_THROWS_AS(make_two_point_instance(0.6, 0), std::invalid_argument);
  }
}

TEST_CASE("offline pipeline") {
  RngStream rng(13);
  const auto cat = make_bernoulli_catalog(20, 0.9, 2, 10.0, rng);

  SUBCASE("suboptimality is nonnegative and shrinks with more data") {
    int improved = 0;
    const int pairs = 50;
    for (int i = 0; i < pairs; ++i) {
      const std::uint64_t seed = mix_seed(777, static_cast<std::uint64_t>(i));
      const auto small = run_offline_trial(cat, lec_policy(), 10, 1000, 1, seed);
      const auto large = run_offline_trial(cat, lec_policy(), 10, 1000000, 1, seed);
      CHECK(small.exact_suboptimality >= -1e-12);
      CHECK(large.exact_suboptimality >= -1e-12);
      if (large.exact_suboptimality <= small.exact_suboptimality + 1e-12) ++improved;
    }
    CHECK(improved >= 45);  // 90% of pairs
  }

  SUBCASE("deployment regret accrues the exact suboptimality per step") {
    const auto result = run_offline_trial(cat, lec_policy(), 10, 5000, 1000, 99);
    CHECK(result.cum_regret ==
          doctest::Approx(1000.0 * result.exact_suboptimality).epsilon(1e-9));
  }
}

TEST_CASE("pessimism excludes a barely-seen expensive tail query") {
  // Head query: 9 arrivals at cost 2. Tail query: one arrival at cost 25.
  // Plug-in scores rank the tail first; the pessimistic bound collapses the
  // single-observation estimate to the floor and keeps the head instead.
  EstimatorState est(2, 1, {1.0, 30.0}, EstimatorMode::OfflineSingle, 10, 0.1);
  for (int i = 0; i < 9; ++i) {
    est.record_arrival(0);
    est.record_cost(0, 0, 2.0);
  }
  est.record_arrival(1);
  est.record_cost(1, 0, 25.0);

  ScoreFunction plugin{ScoreFunction::Kind::LecSingle, ScoreSource::Plugin, 0, {}, nullptr};
  ScoreFunction pessimistic{ScoreFunction::Kind::LecSingle, ScoreSource::Lcb, 0, {}, nullptr};
  CHECK(offline_build_cache(est, plugin, 1).contains(1));
  CHECK(offline_build_cache(est, pessimistic, 1).contains(0));
}
