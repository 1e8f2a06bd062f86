#include "cachemux/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cachemux {

CostModel CostModel::empirical(std::vector<double> samples, bool strict_replay) {
  if (samples.empty()) throw std::invalid_argument("empirical cost model needs samples");
  CostModel m;
  m.kind_ = Kind::Empirical;
  m.strict_replay_ = strict_replay;
  m.sample_lo_ = samples.front();
  m.sample_hi_ = samples.front();
  double sum = 0.0;
  for (double v : samples) {
    if (v <= 0.0) throw std::invalid_argument("empirical cost samples must be positive");
    m.sample_lo_ = std::min(m.sample_lo_, v);
    m.sample_hi_ = std::max(m.sample_hi_, v);
    sum += v;
  }
  m.sample_mean_ = sum / static_cast<double>(samples.size());
  m.samples_ = std::move(samples);
  return m;
}

double CostModel::mean() const {
  switch (kind_) {
    case Kind::Constant: return a_;
    case Kind::ScaledBernoulli: return 1.0 + a_ * b_;
    case Kind::TwoPhase: return a_ + c_ * b_;
    case Kind::Empirical: return sample_mean_;
  }
  return a_;
}

CostBounds CostModel::support() const {
  switch (kind_) {
    case Kind::Constant: return {a_, a_};
    case Kind::ScaledBernoulli: return {1.0, 1.0 + a_};
    case Kind::TwoPhase: return {a_, a_ + b_};
    case Kind::Empirical: return {sample_lo_, sample_hi_};
  }
  return {a_, a_};
}

CostModel::Draw CostModel::sample(CostStream& stream) const {
  switch (kind_) {
    case Kind::Constant:
      return {a_, false};
    case Kind::ScaledBernoulli:
      return {stream.rng.bernoulli(b_) ? 1.0 + a_ : 1.0, false};
    case Kind::TwoPhase: {
      const bool failed = stream.rng.bernoulli(c_);
      return {failed ? a_ + b_ : a_, failed};
    }
    case Kind::Empirical: {
      if (stream.replay_pos >= samples_.size()) {
        if (strict_replay_)
          throw std::runtime_error("empirical cost trace exhausted (strict replay)");
        stream.replay_pos = 0;
      }
      return {samples_[stream.replay_pos++], false};
    }
  }
  return {a_, false};
}

std::vector<double> power_law_weights(std::size_t n, double alpha) {
  if (n == 0) throw std::invalid_argument("power_law_weights: n must be >= 1");
  if (alpha < 0.0) throw std::invalid_argument("power_law_weights: alpha must be >= 0");
  std::vector<double> w(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::pow(static_cast<double>(i + 1), -alpha);
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

FrequencyDistribution FrequencyDistribution::from_weights(std::vector<double> weights) {
  if (weights.empty()) throw std::invalid_argument("frequency distribution is empty");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w))
      throw std::invalid_argument("frequency weights must be finite and >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("frequency weights must sum to 1 (within 1e-9)");
  FrequencyDistribution dist;
  dist.cdf_.resize(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    dist.cdf_[i] = acc;
  }
  dist.cdf_.back() = 1.0;
  dist.weights_ = std::move(weights);
  return dist;
}

QueryId FrequencyDistribution::sample(RngStream& rng) const {
  const double u = rng.next_double();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const std::size_t idx = it == cdf_.end() ? cdf_.size() - 1
                                           : static_cast<std::size_t>(it - cdf_.begin());
  return static_cast<QueryId>(idx);
}

QueryCatalog::QueryCatalog(FrequencyDistribution frequency,
                           std::vector<std::vector<CostModel>> cost_models,
                           std::optional<CostBounds> bounds)
    : frequency_(std::move(frequency)), cost_models_(std::move(cost_models)) {
  if (cost_models_.size() != frequency_.size())
    throw std::invalid_argument("catalog: one cost-model row per query required");
  num_models_ = cost_models_.front().size();
  if (num_models_ == 0) throw std::invalid_argument("catalog: at least one model required");

  CostBounds hull = cost_models_.front().front().support();
  true_means_.reserve(frequency_.size() * num_models_);
  for (const auto& row : cost_models_) {
    if (row.size() != num_models_)
      throw std::invalid_argument("catalog: ragged cost-model matrix");
    for (const auto& model : row) {
      const CostBounds s = model.support();
      hull.lo = std::min(hull.lo, s.lo);
      hull.hi = std::max(hull.hi, s.hi);
      true_means_.push_back(model.mean());
    }
  }
  bounds_ = bounds.value_or(hull);
  if (bounds_.lo <= 0.0)
    throw std::invalid_argument("catalog: cost lower bound must be positive");
  if (bounds_.hi < bounds_.lo)
    throw std::invalid_argument("catalog: cost upper bound below lower bound");
  if (hull.lo < bounds_.lo - 1e-12 || hull.hi > bounds_.hi + 1e-12)
    throw std::invalid_argument("catalog: cost model support exceeds declared bounds");
}

double QueryCatalog::min_true_mean(QueryId q) const {
  double best = true_mean(q, 0);
  for (std::size_t k = 1; k < num_models_; ++k) best = std::min(best, true_mean(q, k));
  return best;
}

CostStreamSet::CostStreamSet(const QueryCatalog& catalog, std::uint64_t master_seed)
    : num_models_(catalog.num_models()) {
  streams_.reserve(catalog.num_queries() * num_models_);
  for (QueryId q = 0; q < catalog.num_queries(); ++q)
    for (std::size_t k = 0; k < num_models_; ++k)
      streams_.push_back(CostStream{derive_stream(master_seed, kCostStreamTag, q, k), 0});
}

namespace {

std::vector<double> workload_weights(std::size_t num_queries, double shape_alpha) {
  if (shape_alpha < 0.0 || shape_alpha > 1.0)
    throw std::invalid_argument("synthetic catalog: shape alpha must be in [0, 1]");
  return power_law_weights(num_queries, 1.0 - shape_alpha);
}

}  // namespace

QueryCatalog make_fixed_cost_catalog(std::size_t num_queries, double shape_alpha,
                                     std::size_t num_models, double ratio,
                                     double bernoulli_p, RngStream& rng) {
  auto freq = FrequencyDistribution::from_weights(workload_weights(num_queries, shape_alpha));
  std::vector<std::vector<CostModel>> models(num_queries);
  for (auto& row : models) {
    row.reserve(num_models);
    for (std::size_t k = 0; k < num_models; ++k) {
      const double cost = rng.bernoulli(bernoulli_p) ? 1.0 + ratio : 1.0;
      row.push_back(CostModel::constant(cost));
    }
  }
  return QueryCatalog(std::move(freq), std::move(models), CostBounds{1.0, 1.0 + ratio});
}

QueryCatalog make_bernoulli_catalog(std::size_t num_queries, double shape_alpha,
                                    std::size_t num_models, double ratio,
                                    RngStream& rng) {
  auto freq = FrequencyDistribution::from_weights(workload_weights(num_queries, shape_alpha));
  std::vector<std::vector<CostModel>> models(num_queries);
  for (auto& row : models) {
    row.reserve(num_models);
    for (std::size_t k = 0; k < num_models; ++k)
      row.push_back(CostModel::scaled_bernoulli(ratio, rng.next_double()));
  }
  return QueryCatalog(std::move(freq), std::move(models), CostBounds{1.0, 1.0 + ratio});
}

QueryCatalog make_two_point_instance(double delta_gap, int instance) {
  if (delta_gap < 0.0 || delta_gap >= 0.5)
    throw std::invalid_argument("two-point instance: delta_gap must be in [0, 0.5)");
  const double p2 = instance == 0 ? 0.5 + delta_gap : 0.5 - delta_gap;
  auto freq = FrequencyDistribution::from_weights({0.5, 0.5});
  std::vector<std::vector<CostModel>> models;
  models.push_back({CostModel::scaled_bernoulli(1.0, 0.5)});
  models.push_back({CostModel::scaled_bernoulli(1.0, p2)});
  return QueryCatalog(std::move(freq), std::move(models), CostBounds{1.0, 2.0});
}

QueryCatalog make_explicit_catalog(std::vector<double> weights,
                                   std::vector<std::vector<double>> costs,
                                   std::optional<CostBounds> bounds) {
  auto freq = FrequencyDistribution::from_weights(std::move(weights));
  std::vector<std::vector<CostModel>> models(costs.size());
  for (std::size_t q = 0; q < costs.size(); ++q) {
    models[q].reserve(costs[q].size());
    for (double c : costs[q]) models[q].push_back(CostModel::constant(c));
  }
  return QueryCatalog(std::move(freq), std::move(models), bounds);
}

}  // namespace cachemux
