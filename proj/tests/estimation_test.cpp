#include <doctest.h>

#include <cmath>

#include "cachemux/estimator.hpp"

using namespace cachemux;

namespace {

EstimatorState make_state(std::size_t queries = 2, std::size_t models = 1,
                          CostBounds bounds = {1.0, 11.0},
                          EstimatorMode mode = EstimatorMode::OfflineSingle,
                          std::uint64_t horizon = 10, double delta = 0.1) {
  return EstimatorState(queries, models, bounds, mode, horizon, delta);
}

}  // namespace

TEST_CASE("frequency estimates are plain arrival ratios") {
  auto est = make_state();
  CHECK(est.freq_estimate(0) == 0.0);  // empty state
  est.record_arrival(0);
  CHECK(est.freq_estimate(0) == 1.0);
  est.record_arrival(0);
  est.record_arrival(1);
  CHECK(est.freq_estimate(0) == doctest::Approx(2.0 / 3.0));
  CHECK(est.freq_estimate(1) == doctest::Approx(1.0 / 3.0));
  CHECK(est.freq_estimate(0) + est.freq_estimate(1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cost estimates: plug-in mean and clipped pessimistic bound") {
  // offline-single, N=10, |Q|=2, delta=0.1: the width multiplier is
  // (B2-B1) * sqrt(ln(6*10*2/0.1) / (2n)) = 10 * sqrt(ln(1200) / (2n)).
  SUBCASE("two observations clip to the floor") {
    auto est = make_state();
    est.record_cost(0, 0, 3.0);
    est.record_cost(0, 0, 5.0);
    const auto e = est.cost_estimate(0, 0);
    CHECK(e.plugin == doctest::Approx(4.0));
    CHECK(e.count == 2);
    CHECK(e.lcb == 1.0);  // 4 - 13.31... clips at B1
  }
  SUBCASE("two hundred observations leave a useful bound") {
    auto est = make_state();
    for (int i = 0; i < 100; ++i) {
      est.record_cost(0, 0, 3.0);
      est.record_cost(0, 0, 5.0);
    }
    const auto e = est.cost_estimate(0, 0);
    CHECK(e.plugin == doctest::Approx(4.0));
    CHECK(e.lcb == doctest::Approx(2.66868).epsilon(1e-4));
  }
  SUBCASE("no observations fall back to the floor") {
    auto est = make_state();
    const auto e = est.cost_estimate(1, 0);
    CHECK(e.plugin == 1.0);
    CHECK(e.lcb == 1.0);
    CHECK(e.count == 0);
  }
  SUBCASE("out-of-bounds costs rejected") {
    auto est = make_state();
    CHECK_THROWS_AS(est.record_cost(0, 0, 12.0), std::invalid_argument);
    CHECK_THROWS_AS(est.record_cost(0, 0, 0.5), std::invalid_argument);
  }
}

TEST_CASE("confidence-width log constants per mode") {
  const std::size_t q = 5;
  const std::uint64_t h = 100;
  const double delta = 0.05;
  CHECK(make_state(q, 1, {1, 2}, EstimatorMode::OfflineSingle, h, delta).bonus_log() ==
        doctest::Approx(std::log(6.0 * 100 * 5 / 0.05)).epsilon(1e-12));
  CHECK(make_state(q, 1, {1, 2}, EstimatorMode::OnlineSingle, h, delta).bonus_log() ==
        doctest::Approx(std::log(6.0 * 100 * 5 / 0.05)).epsilon(1e-12));
  CHECK(make_state(q, 2, {1, 2}, EstimatorMode::OfflineJoint, h, delta).bonus_log() ==
        doctest::Approx(std::log(8.0 * 5 / 0.05)).epsilon(1e-12));
  CHECK(make_state(q, 2, {1, 2}, EstimatorMode::OnlineJoint, h, delta).bonus_log() ==
        doctest::Approx(std::log(8.0 * 100 * 5 / 0.05)).epsilon(1e-12));
}

TEST_CASE("pessimistic bound properties") {
  SUBCASE("lcb is clipped below and never above the plug-in") {
    RngStream rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      auto est = make_state(1, 1, {1.0, 11.0}, EstimatorMode::OnlineSingle, 1000, 0.01);
      const int n = 1 + static_cast<int>(rng.next_below(50));
      for (int i = 0; i < n; ++i) est.record_cost(0, 0, 1.0 + 10.0 * rng.next_double());
      const auto e = est.cost_estimate(0, 0);
      CHECK(e.lcb >= 1.0);
      CHECK(e.lcb <= e.plugin);
    }
  }
  SUBCASE("width shrinks as observations accumulate") {
    auto few = make_state();
    auto many = make_state();
    for (int i = 0; i < 4; ++i) few.record_cost(0, 0, 6.0);
    for (int i = 0; i < 64; ++i) many.record_cost(0, 0, 6.0);
    CHECK(few.cost_estimate(0, 0).plugin == many.cost_estimate(0, 0).plugin);
    CHECK(few.cost_estimate(0, 0).lcb <= many.cost_estimate(0, 0).lcb);
  }
  SUBCASE("coverage: the bound rarely exceeds the true mean") {
    // 1000 replications of 50 draws at delta = 0.01; the bound may fail in
    // at most 1% of replications.
    const double ratio = 10.0, p = 0.5;
    const double true_mean = 1.0 + ratio * p;
    int violations = 0;
    for (int rep = 0; rep < 1000; ++rep) {
      auto est = EstimatorState(1, 1, {1.0, 11.0}, EstimatorMode::OfflineJoint, 50, 0.01);
      CostStream stream{derive_stream(2024, 77, rep), 0};
      const auto model = CostModel::scaled_bernoulli(ratio, p);
      for (int i = 0; i < 50; ++i) est.record_cost(0, 0, model.sample(stream).value);
      if (est.cost_estimate(0, 0).lcb > true_mean) ++violations;
    }
    CHECK(violations <= 10);
  }
}

TEST_CASE("estimator snapshot serializes counts") {
  auto est = make_state(2, 1);
  est.record_arrival(0);
  est.record_cost(0, 0, 3.0);
  const std::string snap = est.snapshot_json();
  CHECK(snap.find("\"total_steps\":1") != std::string::npos);
  CHECK(snap.find("\"cost_sum\":3") != std::string::npos);
}

TEST_CASE("invalid estimator parameters rejected") {
  CHECK_THROWS_AS(make_state(2, 1, {1, 2}, EstimatorMode::OnlineSingle, 10, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_state(2, 1, {1, 2}, EstimatorMode::OnlineSingle, 10, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_state(2, 1, {1, 2}, EstimatorMode::OnlineSingle, 0, 0.5),
                  std::invalid_argument);
}
