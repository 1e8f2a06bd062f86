#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cachemux/cache.hpp"
#include "cachemux/catalog.hpp"
#include "cachemux/estimator.hpp"

namespace cachemux {

/// Model-selection policy. Kinds:
///   always(k):  fixed model.
///   oracle:     argmin of true expected costs; ties go to the lower index.
///   learned:    argmin of fitted cost estimates; ties go to the HIGHER
///               index (with two models, equality sends the query to the
///               large model, mirroring the strict comparison in the online
///               update rule).
///   noisy(a):   the true argmin with probability a, otherwise a uniformly
///               random other model; errors are drawn i.i.d. per arrival.
///   cascade:    first model in `order`; on a two-phase failure the next
///               model in order runs as well.
struct SelectorPolicy {
  enum class Kind { Always, Oracle, Learned, Noisy, Cascade };

  Kind kind = Kind::Always;
  std::size_t num_models = 2;
  std::size_t model = 0;                    // always(k)
  double accuracy = 1.0;                    // noisy
  ScoreSource source = ScoreSource::Lcb;    // learned
  std::vector<std::size_t> order;           // cascade

  static SelectorPolicy always(std::size_t k, std::size_t num_models = 2);
  static SelectorPolicy oracle(std::size_t num_models = 2);
  static SelectorPolicy learned(ScoreSource source = ScoreSource::Lcb,
                                std::size_t num_models = 2);
  static SelectorPolicy noisy(double accuracy, std::size_t num_models = 2);
  static SelectorPolicy cascade(std::vector<std::size_t> order);

  void validate() const;
};

struct Decision {
  std::size_t model = 0;
  bool is_cascade_sequence = false;
};

/// Chooses a model for one query. Oracle and noisy kinds need the catalog
/// truth; learned needs fitted estimates; noisy consumes policy randomness.
Decision select(const SelectorPolicy& policy, QueryId q, const EstimatorState* estimates,
                const QueryCatalog* truth, RngStream& policy_rng);

struct Realization {
  double total = 0.0;
  // (model, observed cost) for every model actually invoked.
  std::vector<std::pair<std::size_t, double>> observations;
};

/// Draws the realized cost of a decision. Non-cascade decisions sample the
/// chosen model once. Cascade decisions sample along the order, continuing
/// past each two-phase failure; every invoked model contributes an
/// observation.
Realization realize_cost(const Decision& decision, QueryId q, const QueryCatalog& catalog,
                         CostStreamSet& streams, const std::vector<std::size_t>& cascade_order);

/// Expected per-arrival processing cost of a static policy under the catalog
/// truth (learned policies depend on fitted state and are handled by the
/// simulation loop instead).
double expected_policy_cost(const SelectorPolicy& policy, const QueryCatalog& catalog,
                            QueryId q);

/// Closed-form extra cost of the two always-one-model baselines over the
/// optimal selector at cache size zero:
///   first:  sum_q P(q) * max(0, c_0(q) - c_1(q))   (always model 0)
///   second: sum_q P(q) * max(0, c_1(q) - c_0(q))   (always model 1)
std::pair<double, double> baseline_selector_gaps(const QueryCatalog& catalog);

}  // namespace cachemux
