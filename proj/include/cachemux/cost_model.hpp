#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cachemux/rng.hpp"

namespace cachemux {

/// Inclusive support bounds for per-request costs. The lower bound must be
/// strictly positive.
struct CostBounds {
  double lo = 1.0;
  double hi = 1.0;
};

// Per-trial sampling cursor: a private random stream plus a replay position
// for trace-backed models. Catalogs stay immutable and shareable; all draw
// state lives here.
struct CostStream {
  RngStream rng;
  std::size_t replay_pos = 0;
};

/// Stochastic cost of processing one query with one model.
///
/// Kinds:
///  - constant(v): always v.
///  - scaled_bernoulli(r, p): r*X + 1 with X ~ Bernoulli(p); support {1, r+1}.
///  - two_phase(base, penalty, fail_prob): base + Y*penalty with
///    Y ~ Bernoulli(fail_prob). Y = 1 marks an unsatisfying answer, which a
///    cascade selector uses to fall through to the next model.
///  - empirical(samples): replays recorded costs in order; cycles when
///    exhausted unless strict replay was requested.
class CostModel {
 public:
  enum class Kind { Constant, ScaledBernoulli, TwoPhase, Empirical };

  struct Draw {
    double value = 0.0;
    bool failed = false;  // meaningful for two-phase models only
  };

  static CostModel constant(double value) {
    if (value <= 0.0) throw std::invalid_argument("constant cost must be positive");
    CostModel m;
    m.kind_ = Kind::Constant;
    m.a_ = value;
    return m;
  }

  static CostModel scaled_bernoulli(double ratio, double success_prob) {
    if (ratio < 0.0) throw std::invalid_argument("scaled-bernoulli ratio must be >= 0");
    if (success_prob < 0.0 || success_prob > 1.0)
      throw std::invalid_argument("scaled-bernoulli probability must be in [0, 1]");
    CostModel m;
    m.kind_ = Kind::ScaledBernoulli;
    m.a_ = ratio;
    m.b_ = success_prob;
    return m;
  }

  static CostModel two_phase(double base, double penalty, double fail_prob) {
    if (base <= 0.0) throw std::invalid_argument("two-phase base cost must be positive");
    if (penalty < 0.0) throw std::invalid_argument("two-phase penalty must be >= 0");
    if (fail_prob < 0.0 || fail_prob > 1.0)
      throw std::invalid_argument("two-phase fail probability must be in [0, 1]");
    CostModel m;
    m.kind_ = Kind::TwoPhase;
    m.a_ = base;
    m.b_ = penalty;
    m.c_ = fail_prob;
    return m;
  }

  static CostModel empirical(std::vector<double> samples, bool strict_replay = false);

  Kind kind() const { return kind_; }
  bool is_two_phase() const { return kind_ == Kind::TwoPhase; }
  double fail_prob() const { return kind_ == Kind::TwoPhase ? c_ : 0.0; }

  /// Expected cost: analytic for parametric kinds, sample mean for empirical.
  double mean() const;

  /// Tight support bounds of this model.
  CostBounds support() const;

  Draw sample(CostStream& stream) const;

  const std::vector<double>& samples() const { return samples_; }

 private:
  Kind kind_ = Kind::Constant;
  double a_ = 1.0;  // value | ratio | base
  double b_ = 0.0;  // success_prob | penalty
  double c_ = 0.0;  // fail_prob
  std::vector<double> samples_;
  double sample_mean_ = 0.0;
  double sample_lo_ = 0.0;
  double sample_hi_ = 0.0;
  bool strict_replay_ = false;
};

}  // namespace cachemux
