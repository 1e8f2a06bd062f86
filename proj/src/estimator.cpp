#include "cachemux/estimator.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cachemux {

EstimatorState::EstimatorState(std::size_t num_queries, std::size_t num_models,
                               CostBounds bounds, EstimatorMode mode,
                               std::uint64_t horizon, double delta)
    : query_counts_(num_queries, 0),
      obs_counts_(num_queries * num_models, 0),
      cost_sums_(num_queries * num_models, 0.0),
      num_models_(num_models),
      bounds_(bounds),
      mode_(mode),
      horizon_(horizon),
      delta_(delta) {
  if (num_queries == 0 || num_models == 0)
    throw std::invalid_argument("estimator: empty query or model set");
  set_mode(mode, horizon, delta);
}

void EstimatorState::set_mode(EstimatorMode mode, std::uint64_t horizon, double delta) {
  if (delta <= 0.0 || delta >= 1.0)
    throw std::invalid_argument("estimator: delta must be in (0, 1)");
  if (horizon == 0) throw std::invalid_argument("estimator: horizon must be >= 1");
  mode_ = mode;
  horizon_ = horizon;
  delta_ = delta;
  const double nq = static_cast<double>(query_counts_.size());
  const double h = static_cast<double>(horizon_);
  double constant = 0.0;
  switch (mode_) {
    case EstimatorMode::OfflineSingle: constant = 6.0 * h * nq; break;
    case EstimatorMode::OnlineSingle: constant = 6.0 * h * nq; break;
    case EstimatorMode::OfflineJoint: constant = 8.0 * nq; break;
    case EstimatorMode::OnlineJoint: constant = 8.0 * h * nq; break;
  }
  bonus_log_ = std::log(constant / delta_);
}

void EstimatorState::record_arrival(QueryId q) {
  ++query_counts_[q];
  ++total_steps_;
}

void EstimatorState::record_cost(QueryId q, std::size_t model, double cost) {
  if (cost < bounds_.lo - 1e-12 || cost > bounds_.hi + 1e-12)
    throw std::invalid_argument("record_cost: cost outside declared bounds");
  const std::size_t idx = q * num_models_ + model;
  ++obs_counts_[idx];
  cost_sums_[idx] += cost;
}

CostEstimate EstimatorState::cost_estimate(QueryId q, std::size_t model) const {
  const std::size_t idx = q * num_models_ + model;
  const std::uint64_t n = obs_counts_[idx];
  if (n == 0) return {bounds_.lo, bounds_.lo, 0};
  const double plugin = cost_sums_[idx] / static_cast<double>(n);
  const double width =
      (bounds_.hi - bounds_.lo) * std::sqrt(bonus_log_ / (2.0 * static_cast<double>(n)));
  return {plugin, std::max(bounds_.lo, plugin - width), n};
}

std::string EstimatorState::snapshot_json() const {
  std::ostringstream os;
  os << "{\"total_steps\":" << total_steps_ << ",\"queries\":[";
  for (std::size_t q = 0; q < query_counts_.size(); ++q) {
    if (q) os << ",";
    os << "{\"arrivals\":" << query_counts_[q] << ",\"models\":[";
    for (std::size_t k = 0; k < num_models_; ++k) {
      if (k) os << ",";
      const std::size_t idx = q * num_models_ + k;
      os << "{\"observations\":" << obs_counts_[idx] << ",\"cost_sum\":" << cost_sums_[idx]
         << "}";
    }
    os << "]}";
  }
  os << "]}";
  return os.str();
}

}  // namespace cachemux
