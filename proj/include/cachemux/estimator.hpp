#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cachemux/cost_model.hpp"

namespace cachemux {

using QueryId = std::uint32_t;

// Selects the constant inside the confidence-width log term. The four
// settings differ only in that constant:
//   offline-single: log(6*N*|Q| / delta)
//   online-single:  log(6*T*|Q| / delta)
//   offline-joint:  log(8*|Q| / delta)
//   online-joint:   log(8*T*|Q| / delta)
enum class EstimatorMode { OfflineSingle, OnlineSingle, OfflineJoint, OnlineJoint };

struct CostEstimate {
  double plugin = 0.0;  // empirical mean, or the cost floor when unobserved
  double lcb = 0.0;     // pessimistic estimate, clipped below at the cost floor
  std::uint64_t count = 0;
};

/// Tabular frequency and cost statistics with plug-in and pessimistic
/// (lower-confidence-bound) estimates.
///
/// Arrivals are always counted, including rounds where the cost is censored
/// by a cache hit; cost observations are only recorded for models that
/// actually ran. Single-writer: concurrent trials own disjoint states.
class EstimatorState {
 public:
  EstimatorState(std::size_t num_queries, std::size_t num_models, CostBounds bounds,
                 EstimatorMode mode, std::uint64_t horizon, double delta);

  void record_arrival(QueryId q);

  // Requires cost within the declared bounds.
  void record_cost(QueryId q, std::size_t model, double cost);

  // Empirical arrival frequency; 0 before any arrival.
  double freq_estimate(QueryId q) const {
    return total_steps_ == 0
               ? 0.0
               : static_cast<double>(query_counts_[q]) / static_cast<double>(total_steps_);
  }

  CostEstimate cost_estimate(QueryId q, std::size_t model) const;

  // Switches the confidence-width constant without touching the counts, so
  // one fitted dataset can back cache constructions with different widths.
  void set_mode(EstimatorMode mode, std::uint64_t horizon, double delta);

  std::uint64_t total_steps() const { return total_steps_; }
  std::uint64_t arrivals(QueryId q) const { return query_counts_[q]; }
  std::uint64_t observations(QueryId q, std::size_t model) const {
    return obs_counts_[q * num_models_ + model];
  }
  std::size_t num_queries() const { return query_counts_.size(); }
  std::size_t num_models() const { return num_models_; }
  CostBounds bounds() const { return bounds_; }
  EstimatorMode mode() const { return mode_; }
  double delta() const { return delta_; }

  // ln(constant / delta) used inside the confidence width.
  double bonus_log() const { return bonus_log_; }

  // JSON snapshot of counts and sums (for --dump-estimators).
  std::string snapshot_json() const;

 private:
  std::vector<std::uint64_t> query_counts_;
  std::vector<std::uint64_t> obs_counts_;
  std::vector<double> cost_sums_;
  std::uint64_t total_steps_ = 0;
  std::size_t num_models_;
  CostBounds bounds_;
  EstimatorMode mode_;
  std::uint64_t horizon_;
  double delta_;
  double bonus_log_ = 0.0;
};

}  // namespace cachemux
