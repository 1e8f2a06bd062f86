#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "cachemux/catalog.hpp"
#include "cachemux/trace.hpp"

using namespace cachemux;

TEST_CASE("power_law_weights basic shapes") {
  SUBCASE("alpha 0 is uniform") {
    const auto w = power_law_weights(3, 0.0);
    for (double v : w) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("two queries, alpha 1") {
    const auto w = power_law_weights(2, 1.0);
    CHECK(w[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(w[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("monotone decreasing and normalized") {
    const auto w = power_law_weights(20, 0.9);
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      total += w[i];
      if (i > 0) CHECK(w[i] < w[i - 1]);
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
  SUBCASE("empty universe rejected") {
    CHECK_THROWS_AS(power_law_weights(0, 1.0), std::invalid_argument);
  }
}

TEST_CASE("sample_query behavior") {
  SUBCASE("point mass always returns its query") {
    const auto dist = FrequencyDistribution::from_weights({1.0, 0.0, 0.0});
    RngStream rng(7);
    for (int i = 0; i < 100; ++i) CHECK(dist.sample(rng) == 0);
  }
  SUBCASE("uniform empirical frequencies converge") {
    const auto dist = FrequencyDistribution::from_weights({0.25, 0.25, 0.25, 0.25});
    RngStream rng(11);
    std::array<std::uint64_t, 4> counts{};
    const int n = 1000000;
    for (int i = 0; i < n; ++i) ++counts[dist.sample(rng)];
    for (auto c : counts)
      CHECK(std::abs(static_cast<double>(c) / n - 0.25) < 0.01);
  }
  SUBCASE("identical seeds give identical sequences") {
    const auto dist = FrequencyDistribution::from_weights(power_law_weights(10, 0.7));
    RngStream a(99), b(99);
    for (int i = 0; i < 1000; ++i) CHECK(dist.sample(a) == dist.sample(b));
  }
  SUBCASE("weights must sum to one") {
    CHECK_THROWS_AS(FrequencyDistribution::from_weights({0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(FrequencyDistribution::from_weights({-0.5, 1.5}), std::invalid_argument);
  }
}

TEST_CASE("cost model sampling") {
  SUBCASE("scaled bernoulli takes only its two values") {
    const auto model = CostModel::scaled_bernoulli(100.0, 0.5);
    CostStream stream{RngStream(3), 0};
    int high = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const double v = model.sample(stream).value;
      CHECK((v == 1.0 || v == 101.0));
      if (v == 101.0) ++high;
    }
    CHECK(std::abs(static_cast<double>(high) / n - 0.5) < 0.01);
  }
  SUBCASE("constant") {
    const auto model = CostModel::constant(5.0);
    CostStream stream{RngStream(4), 0};
    CHECK(model.sample(stream).value == 5.0);
    CHECK(model.mean() == 5.0);
  }
  SUBCASE("two-phase with zero fail probability never pays the penalty") {
    const auto model = CostModel::two_phase(2.0, 10.0, 0.0);
    CostStream stream{RngStream(5), 0};
    for (int i = 0; i < 1000; ++i) {
      const auto draw = model.sample(stream);
      CHECK(draw.value == 2.0);
      CHECK(!draw.failed);
    }
  }
  SUBCASE("empirical replay cycles by default and errors in strict mode") {
    const auto cycling = CostModel::empirical({3.0, 7.0});
    CostStream s1{RngStream(0), 0};
    CHECK(cycling.sample(s1).value == 3.0);
    CHECK(cycling.sample(s1).value == 7.0);
    CHECK(cycling.sample(s1).value == 3.0);
    const auto strict = CostModel::empirical({3.0, 7.0}, true);
    CostStream s2{RngStream(0), 0};
    strict.sample(s2);
    strict.sample(s2);
    CHECK_THROWS_AS(strict.sample(s2), std::runtime_error);
  }
  SUBCASE("all kinds stay within their support bounds") {
    const CostModel models[] = {
        CostModel::constant(4.0),
        CostModel::scaled_bernoulli(9.0, 0.3),
        CostModel::two_phase(2.0, 5.0, 0.4),
        CostModel::empirical({2.0, 3.0, 4.5}),
    };
    for (const auto& model : models) {
      const CostBounds b = model.support();
      CostStream stream{RngStream(17), 0};
      for (int i = 0; i < 100000; ++i) {
        const double v = model.sample(stream).value;
        CHECK(v >= b.lo);
        CHECK(v <= b.hi);
      }
    }
  }
  SUBCASE("empirical mean of draws matches the analytic mean") {
    const double ratio = 10.0, p = 0.3;
    const auto model = CostModel::scaled_bernoulli(ratio, p);
    CostStream stream{RngStream(23), 0};
    const int n = 1000000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += model.sample(stream).value;
    const double sigma = ratio * std::sqrt(p * (1 - p));
    CHECK(std::abs(sum / n - (1.0 + ratio * p)) < 3.0 * sigma / std::sqrt(double(n)));
  }
}

TEST_CASE("catalog construction") {
  SUBCASE("synthetic workload shape: alpha one is uniform, smaller is head-heavy") {
    RngStream r1(1), r2(2), r3(3);
    const auto flat = make_fixed_cost_catalog(10, 1.0, 1, 10.0, 0.5, r1);
    for (QueryId q = 0; q < 10; ++q) CHECK(flat.prob(q) == doctest::Approx(0.1));
    const auto heavy = make_fixed_cost_catalog(10, 0.2, 1, 10.0, 0.5, r2);
    const auto mild = make_fixed_cost_catalog(10, 0.8, 1, 10.0, 0.5, r3);
    CHECK(heavy.prob(0) > mild.prob(0));
    CHECK(mild.prob(0) > mild.prob(9));
    // matches the plain power-law helper at the complementary exponent
    const auto expected = power_law_weights(10, 0.8);
    for (QueryId q = 0; q < 10; ++q)
      CHECK(heavy.prob(q) == doctest::Approx(expected[q]).epsilon(1e-12));
    RngStream r4(4);
    CHECK_THROWS_AS(make_fixed_cost_catalog(10, 1.5, 1, 10.0, 0.5, r4),
                    std::invalid_argument);
  }
  SUBCASE("fixed-cost catalog freezes per-pair values") {
    RngStream rng(42);
    const auto cat = make_fixed_cost_catalog(20, 0.9, 2, 100.0, 0.5, rng);
    CHECK(cat.num_queries() == 20);
    CHECK(cat.num_models() == 2);
    CHECK(cat.bounds().lo == 1.0);
    CHECK(cat.bounds().hi == 101.0);
    for (QueryId q = 0; q < 20; ++q)
      for (std::size_t k = 0; k < 2; ++k) {
        const double m = cat.true_mean(q, k);
        CHECK((m == 1.0 || m == 101.0));
        CostStream stream{RngStream(1), 0};
        CHECK(cat.cost_model(q, k).sample(stream).value == m);
      }
  }
  SUBCASE("true means match analytic means of the models") {
    RngStream rng(43);
    const auto cat = make_bernoulli_catalog(8, 0.5, 2, 20.0, rng);
    for (QueryId q = 0; q < 8; ++q)
      for (std::size_t k = 0; k < 2; ++k) {
        CHECK(cat.true_mean(q, k) == cat.cost_model(q, k).mean());
        CHECK(cat.true_mean(q, k) >= cat.bounds().lo);
        CHECK(cat.true_mean(q, k) <= cat.bounds().hi);
      }
  }
  SUBCASE("declared bounds must cover the models") {
    CHECK_THROWS_AS(make_explicit_catalog({1.0}, {{5.0}}, CostBounds{1.0, 4.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_explicit_catalog({1.0}, {{0.0}}), std::invalid_argument);
  }
}

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = std::string("/tmp/cachemux_test_") + name;
  std::ofstream out(path, std::ios::trunc);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("trace loading") {
  SUBCASE("two-row trace produces single-query catalog with exact means") {
    const auto path = write_temp("trace_ok.csv",
                                 "query_id,model_index,cost\n"
                                 "0,0,3\n"
                                 "0,1,7\n");
    const auto cat = load_trace(path);
    CHECK(cat.num_queries() == 1);
    CHECK(cat.num_models() == 2);
    CHECK(cat.true_mean(0, 0) == 3.0);
    CHECK(cat.true_mean(0, 1) == 7.0);
    CHECK(cat.prob(0) == 1.0);
  }
  SUBCASE("one hundred rows over one hundred queries") {
    std::string body = "query_id,model_index,cost\n";
    for (int q = 0; q < 100; ++q) body += std::to_string(q) + ",0," + std::to_string(q + 1) + "\n";
    const auto cat = load_trace(write_temp("trace_100.csv", body));
    CHECK(cat.num_queries() == 100);
    CHECK(cat.prob(7) == doctest::Approx(0.01));
  }
  SUBCASE("empty file rejected") {
    const auto path = write_temp("trace_empty.csv", "");
    CHECK_THROWS(load_trace(path));
    const auto header_only = write_temp("trace_header.csv", "query_id,model_index,cost\n");
    CHECK_THROWS_WITH_AS(load_trace(header_only),
                         doctest::Contains("no data rows"), std::runtime_error);
  }
  SUBCASE("malformed row reported with its line number") {
    const auto path = write_temp("trace_bad.csv",
                                 "query_id,model_index,cost\n"
                                 "0,0,3\n"
                                 "0,zero,7\n");
    CHECK_THROWS_WITH_AS(load_trace(path), doctest::Contains(":3:"), std::runtime_error);
  }
  SUBCASE("cost outside declared bounds rejected") {
    const auto path = write_temp("trace_oob.csv",
                                 "query_id,model_index,cost\n"
                                 "0,0,30\n");
    CHECK_THROWS_WITH_AS(load_trace(path, CostBounds{1.0, 10.0}),
                         doctest::Contains("outside declared bounds"), std::runtime_error);
  }
  SUBCASE("missing (query, model) pair rejected") {
    const auto path = write_temp("trace_gap.csv",
                                 "query_id,model_index,cost\n"
                                 "0,0,3\n"
                                 "1,1,7\n");
    CHECK_THROWS(load_trace(path));
  }
}
