#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cachemux/cost_model.hpp"
#include "cachemux/rng.hpp"

namespace cachemux {

using QueryId = std::uint32_t;

/// Zipf-style weights: weight[i] proportional to (i+1)^(-alpha), normalized.
/// alpha = 0 gives the uniform distribution.
std::vector<double> power_law_weights(std::size_t n, double alpha);

/// Normalized query frequency distribution with a precomputed CDF for
/// O(log n) sampling.
class FrequencyDistribution {
 public:
  static FrequencyDistribution from_weights(std::vector<double> weights);

  QueryId sample(RngStream& rng) const;

  double prob(QueryId q) const { return weights_[q]; }
  std::size_t size() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> weights_;
  std::vector<double> cdf_;
};

/// Immutable description of the query universe: frequency distribution,
/// per-(query, model) cost models, and their expected costs. Safe to share
/// across concurrent trials; all mutable draw state lives in CostStreamSet.
class QueryCatalog {
 public:
  QueryCatalog(FrequencyDistribution frequency,
               std::vector<std::vector<CostModel>> cost_models,
               std::optional<CostBounds> bounds = std::nullopt);

  std::size_t num_queries() const { return frequency_.size(); }
  std::size_t num_models() const { return num_models_; }
  const FrequencyDistribution& frequency() const { return frequency_; }
  double prob(QueryId q) const { return frequency_.prob(q); }

  const CostModel& cost_model(QueryId q, std::size_t model) const {
    return cost_models_[q][model];
  }
  double true_mean(QueryId q, std::size_t model) const {
    return true_means_[q * num_models_ + model];
  }
  /// min over models of the expected cost, the quantity a cost-aware cache
  /// protects when a selector is in play.
  double min_true_mean(QueryId q) const;

  CostBounds bounds() const { return bounds_; }

 private:
  FrequencyDistribution frequency_;
  std::vector<std::vector<CostModel>> cost_models_;
  std::vector<double> true_means_;
  std::size_t num_models_ = 1;
  CostBounds bounds_;
};

/// One sampling cursor per (query, model), all derived from a single master
/// seed. Each trial owns one set; identical seeds reproduce identical draws
/// regardless of which models a policy chooses to invoke.
class CostStreamSet {
 public:
  CostStreamSet(const QueryCatalog& catalog, std::uint64_t master_seed);

  CostStream& at(QueryId q, std::size_t model) {
    return streams_[q * num_models_ + model];
  }

 private:
  std::vector<CostStream> streams_;
  std::size_t num_models_;
};

// --- Synthetic catalog generators ---------------------------------------
//
// Both generators draw query frequencies from the discretized power-function
// density: query i gets weight proportional to (i+1)^(shape_alpha - 1), so
// shape_alpha = 1 is uniform and smaller values concentrate mass on the
// low-index queries. This is the shape the synthetic benchmark tables sweep
// with their alpha parameter (larger alpha means a flatter workload and more
// cache misses).

/// Catalog where each (query, model) pair gets a cost frozen at construction
/// time as one draw of ratio*Bernoulli(p) + 1; requests then cost exactly
/// that value. Declared bounds stay [1, ratio+1] so estimators see the full
/// generator range.
QueryCatalog make_fixed_cost_catalog(std::size_t num_queries, double shape_alpha,
                                     std::size_t num_models, double ratio,
                                     double bernoulli_p, RngStream& rng);

/// Catalog with per-request stochastic costs: each (query, model) pair is a
/// scaled-Bernoulli model whose success probability is drawn uniformly at
/// construction, so expected costs are heterogeneous and must be learned
/// from noisy draws.
QueryCatalog make_bernoulli_catalog(std::size_t num_queries, double shape_alpha,
                                    std::size_t num_models, double ratio,
                                    RngStream& rng);

/// Two-query single-model instance pair used by the regret floor experiment:
/// uniform arrivals, costs 1 + Bernoulli(1/2) for the first query and
/// 1 + Bernoulli(1/2 +/- delta_gap) for the second. `instance` selects the
/// sign (0 -> +delta_gap, 1 -> -delta_gap).
QueryCatalog make_two_point_instance(double delta_gap, int instance);

/// Catalog from explicit weights and constant per-(query, model) costs.
QueryCatalog make_explicit_catalog(std::vector<double> weights,
                                   std::vector<std::vector<double>> costs,
                                   std::optional<CostBounds> bounds = std::nullopt);

}  // namespace cachemux
