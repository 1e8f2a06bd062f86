#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cachemux/catalog.hpp"
#include "cachemux/estimator.hpp"

namespace cachemux {

/// Bounded set of cached queries. In entry mode the bound is a maximum entry
/// count; in unit mode (variable response sizes) it is a total size budget.
class CacheState {
 public:
  CacheState(std::size_t capacity, std::size_t num_queries)
      : capacity_(static_cast<double>(capacity)), cached_(num_queries, 0) {}

  static CacheState with_unit_budget(double budget, std::size_t num_queries) {
    CacheState c(0, num_queries);
    c.capacity_ = budget;
    c.unit_mode_ = true;
    return c;
  }

  bool contains(QueryId q) const { return cached_[q] != 0; }
  std::size_t size() const { return entries_.size(); }
  double capacity() const { return capacity_; }
  double used_units() const { return used_; }
  const std::vector<QueryId>& entries() const { return entries_; }

  // Entry-mode insert; capacity must not be exceeded.
  void insert(QueryId q);
  // Unit-mode insert with an explicit size.
  void insert(QueryId q, double size);
  void erase(QueryId q);

 private:
  double capacity_;
  double used_ = 0.0;
  bool unit_mode_ = false;
  std::vector<QueryId> entries_;
  std::vector<char> cached_;
  std::vector<double> entry_sizes_;
};

enum class ScoreSource { Plugin, Lcb };

/// Ranking rule used by cache construction and replacement.
///   lfu:        frequency estimate alone
///   lec-single: frequency x cost estimate of one designated model
///   lec-joint:  frequency x min over models of the cost estimates
///   gdsf-size:  any of the above divided by the per-query size
struct ScoreFunction {
  enum class Kind { Lfu, LecSingle, LecJoint, GdsfSize };

  Kind kind = Kind::LecSingle;
  ScoreSource source = ScoreSource::Lcb;
  std::size_t model = 0;                      // lec-single only
  Kind size_numerator = Kind::LecJoint;       // gdsf-size only
  const std::vector<double>* sizes = nullptr; // gdsf-size only

  double operator()(const EstimatorState& est, QueryId q) const;
};

/// Top-L construction from fitted estimates; ties break toward the lower
/// query id. L larger than the universe caches everything.
CacheState offline_build_cache(const EstimatorState& est, const ScoreFunction& score,
                               std::size_t capacity);

struct ConsiderResult {
  bool inserted = false;
  bool evicted = false;
  QueryId victim = 0;
};

/// One replacement step: insert q when below capacity, otherwise replace the
/// minimum-score entry iff the newcomer scores strictly higher (equal scores
/// leave the cache unchanged). Ties among cached minimizers evict the lowest
/// query id.
template <typename ScoreFn>
ConsiderResult online_consider(CacheState& cache, QueryId q, ScoreFn&& score) {
  if (static_cast<double>(cache.size()) < cache.capacity()) {
    cache.insert(q);
    return {true, false, 0};
  }
  if (cache.size() == 0) return {};  // zero-capacity cache
  QueryId victim = cache.entries().front();
  double victim_score = score(victim);
  for (std::size_t i = 1; i < cache.entries().size(); ++i) {
    const QueryId cand = cache.entries()[i];
    const double s = score(cand);
    if (s < victim_score || (s == victim_score && cand < victim)) {
      victim = cand;
      victim_score = s;
    }
  }
  if (score(q) > victim_score) {
    cache.erase(victim);
    cache.insert(q);
    return {true, true, victim};
  }
  return {};
}

struct CacheObjective {
  bool joint = true;      // min over models vs a single designated model
  std::size_t model = 0;  // used when joint == false
};

// Expected per-request cost of a cache under true means:
// sum over uncached q of P(q) * (min cost | model cost).
double expected_cache_cost(const QueryCatalog& catalog, const CacheState& cache,
                           const CacheObjective& objective);

/// Population-optimal cache: top-L by P(q) times the true (min or single)
/// expected cost, ties toward the lower id.
CacheState optimal_cache(const QueryCatalog& catalog, std::size_t capacity,
                         const CacheObjective& objective);

/// Independent oracle: enumerates every subset of size <= capacity and
/// returns a minimizer of the expected cost. Refuses instances with more
/// than 20 queries.
std::pair<CacheState, double> brute_force_optimal(const QueryCatalog& catalog,
                                                  std::size_t capacity,
                                                  const CacheObjective& objective);

enum class PackMethod { Greedy, Exact };

/// Variable-size cache construction under a total size budget. Greedy ranks
/// by score per size unit and admits whatever still fits; Exact solves the
/// 0/1 knapsack over integer sizes.
CacheState variable_size_build(const std::vector<double>& scores,
                               const std::vector<double>& sizes, double budget,
                               PackMethod method);

}  // namespace cachemux
