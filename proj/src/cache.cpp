#include "cachemux/cache.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cachemux {

void CacheState::insert(QueryId q) {
  if (unit_mode_) throw std::logic_error("unit-mode cache requires insert(q, size)");
  if (cached_[q]) return;
  if (static_cast<double>(entries_.size()) + 1.0 > capacity_)
    throw std::logic_error("cache capacity exceeded");
  entries_.push_back(q);
  cached_[q] = 1;
}

void CacheState::insert(QueryId q, double size) {
  if (!unit_mode_) throw std::logic_error("entry-mode cache requires insert(q)");
  if (cached_[q]) return;
  if (used_ + size > capacity_ + 1e-12) throw std::logic_error("cache size budget exceeded");
  entries_.push_back(q);
  entry_sizes_.push_back(size);
  cached_[q] = 1;
  used_ += size;
}

void CacheState::erase(QueryId q) {
  if (!cached_[q]) return;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i] == q) {
      entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(i));
      if (unit_mode_) {
        used_ -= entry_sizes_[i];
        entry_sizes_.erase(entry_sizes_.begin() + static_cast<std::ptrdiff_t>(i));
      }
      break;
    }
  }
  cached_[q] = 0;
}

double ScoreFunction::operator()(const EstimatorState& est, QueryId q) const {
  const auto cost_of = [&](std::size_t k) {
    const CostEstimate e = est.cost_estimate(q, k);
    return source == ScoreSource::Plugin ? e.plugin : e.lcb;
  };
  switch (kind) {
    case Kind::Lfu:
      return est.freq_estimate(q);
    case Kind::LecSingle:
      return est.freq_estimate(q) * cost_of(model);
    case Kind::LecJoint: {
      double best = cost_of(0);
      for (std::size_t k = 1; k < est.num_models(); ++k) best = std::min(best, cost_of(k));
      return est.freq_estimate(q) * best;
    }
    case Kind::GdsfSize: {
      if (sizes == nullptr) throw std::logic_error("gdsf-size score requires sizes");
      ScoreFunction numerator = *this;
      numerator.kind = size_numerator;
      return numerator(est, q) / (*sizes)[q];
    }
  }
  return 0.0;
}

namespace {

// Indices of the top-L scores, ties toward the lower index.
std::vector<std::size_t> top_by_score(const std::vector<double>& scores, std::size_t capacity) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(std::min(capacity, order.size()));
  return order;
}

}  // namespace

CacheState offline_build_cache(const EstimatorState& est, const ScoreFunction& score,
                               std::size_t capacity) {
  std::vector<double> scores(est.num_queries());
  for (QueryId q = 0; q < scores.size(); ++q) scores[q] = score(est, q);
  CacheState cache(capacity, est.num_queries());
  for (std::size_t idx : top_by_score(scores, capacity))
    cache.insert(static_cast<QueryId>(idx));
  return cache;
}

double expected_cache_cost(const QueryCatalog& catalog, const CacheState& cache,
                           const CacheObjective& objective) {
  double total = 0.0;
  for (QueryId q = 0; q < catalog.num_queries(); ++q) {
    if (cache.contains(q)) continue;
    const double c =
        objective.joint ? catalog.min_true_mean(q) : catalog.true_mean(q, objective.model);
    total += catalog.prob(q) * c;
  }
  return total;
}

CacheState optimal_cache(const QueryCatalog& catalog, std::size_t capacity,
                         const CacheObjective& objective) {
  std::vector<double> scores(catalog.num_queries());
  for (QueryId q = 0; q < scores.size(); ++q) {
    const double c =
        objective.joint ? catalog.min_true_mean(q) : catalog.true_mean(q, objective.model);
    scores[q] = catalog.prob(q) * c;
  }
  CacheState cache(capacity, catalog.num_queries());
  for (std::size_t idx : top_by_score(scores, capacity))
    cache.insert(static_cast<QueryId>(idx));
  return cache;
}

std::pair<CacheState, double> brute_force_optimal(const QueryCatalog& catalog,
                                                  std::size_t capacity,
                                                  const CacheObjective& objective) {
  const std::size_t n = catalog.num_queries();
  if (n > 20) throw std::invalid_argument("brute_force_optimal: instance too large");

  std::uint32_t best_mask = 0;
  double best_cost = expected_cache_cost(catalog, CacheState(capacity, n), objective);
  std::vector<double> item_cost(n);
  for (QueryId q = 0; q < n; ++q) {
    const double c =
        objective.joint ? catalog.min_true_mean(q) : catalog.true_mean(q, objective.model);
    item_cost[q] = catalog.prob(q) * c;
  }
  const double total = std::accumulate(item_cost.begin(), item_cost.end(), 0.0);
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) > capacity) continue;
    double covered = 0.0;
    for (std::uint32_t m = mask; m != 0; m &= m - 1)
      covered += item_cost[static_cast<std::size_t>(__builtin_ctz(m))];
    const double cost = total - covered;
    if (cost < best_cost) {
      best_cost = cost;
      best_mask = mask;
    }
  }
  CacheState cache(capacity, n);
  for (QueryId q = 0; q < n; ++q)
    if (best_mask & (1u << q)) cache.insert(q);
  // Report the cost through the shared evaluator so callers can compare
  // against optimal_cache without floating-point drift.
  const double cost = expected_cache_cost(catalog, cache, objective);
  return {std::move(cache), cost};
}

CacheState variable_size_build(const std::vector<double>& scores,
                               const std::vector<double>& sizes, double budget,
                               PackMethod method) {
  if (scores.size() != sizes.size())
    throw std::invalid_argument("variable_size_build: scores/sizes length mismatch");
  for (double s : sizes)
    if (s <= 0.0) throw std::invalid_argument("variable_size_build: sizes must be positive");
  const std::size_t n = scores.size();
  CacheState cache = CacheState::with_unit_budget(budget, n);

  if (method == PackMethod::Greedy) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores[a] / sizes[a] > scores[b] / sizes[b];
    });
    double left = budget;
    for (std::size_t idx : order) {
      if (sizes[idx] <= left + 1e-12) {
        cache.insert(static_cast<QueryId>(idx), sizes[idx]);
        left -= sizes[idx];
      }
    }
    return cache;
  }

  // Exact 0/1 knapsack over integer sizes.
  if (n > 30) throw std::invalid_argument("variable_size_build: exact method needs <= 30 items");
  std::vector<int> isz(n);
  for (std::size_t i = 0; i < n; ++i) {
    isz[i] = static_cast<int>(std::llround(sizes[i]));
    if (std::abs(sizes[i] - isz[i]) > 1e-9 || isz[i] <= 0)
      throw std::invalid_argument("variable_size_build: exact method needs integer sizes");
  }
  const int b = static_cast<int>(std::floor(budget + 1e-12));
  if (b < 0) throw std::invalid_argument("variable_size_build: negative budget");
  const std::size_t width = static_cast<std::size_t>(b) + 1;
  std::vector<double> value(width, 0.0);
  std::vector<std::uint64_t> pick(width, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int w = b; w >= isz[i]; --w) {
      const double candidate = value[static_cast<std::size_t>(w - isz[i])] + scores[i];
      if (candidate > value[static_cast<std::size_t>(w)]) {
        value[static_cast<std::size_t>(w)] = candidate;
        pick[static_cast<std::size_t>(w)] =
            pick[static_cast<std::size_t>(w - isz[i])] | (1ull << i);
      }
    }
  }
  const std::uint64_t chosen = pick[static_cast<std::size_t>(b)];
  for (std::size_t i = 0; i < n; ++i)
    if (chosen & (1ull << i)) cache.insert(static_cast<QueryId>(i), sizes[i]);
  return cache;
}

}  // namespace cachemux
