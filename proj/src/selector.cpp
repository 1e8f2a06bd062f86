#include "cachemux/selector.hpp"

#include <algorithm>
#include <stdexcept>

namespace cachemux {

SelectorPolicy SelectorPolicy::always(std::size_t k, std::size_t num_models) {
  SelectorPolicy p;
  p.kind = Kind::Always;
  p.model = k;
  p.num_models = num_models;
  p.validate();
  return p;
}

SelectorPolicy SelectorPolicy::oracle(std::size_t num_models) {
  SelectorPolicy p;
  p.kind = Kind::Oracle;
  p.num_models = num_models;
  return p;
}

SelectorPolicy SelectorPolicy::learned(ScoreSource source, std::size_t num_models) {
  SelectorPolicy p;
  p.kind = Kind::Learned;
  p.source = source;
  p.num_models = num_models;
  return p;
}

SelectorPolicy SelectorPolicy::noisy(double accuracy, std::size_t num_models) {
  SelectorPolicy p;
  p.kind = Kind::Noisy;
  p.accuracy = accuracy;
  p.num_models = num_models;
  p.validate();
  return p;
}

SelectorPolicy SelectorPolicy::cascade(std::vector<std::size_t> order) {
  SelectorPolicy p;
  p.kind = Kind::Cascade;
  p.num_models = order.size();
  p.order = std::move(order);
  p.validate();
  return p;
}

void SelectorPolicy::validate() const {
  switch (kind) {
    case Kind::Always:
      if (model >= num_models) throw std::invalid_argument("selector: model index out of range");
      break;
    case Kind::Noisy:
      if (accuracy < 0.0 || accuracy > 1.0)
        throw std::invalid_argument("selector: accuracy must be in [0, 1]");
      break;
    case Kind::Cascade: {
      if (order.size() != num_models || order.empty())
        throw std::invalid_argument("selector: cascade order must permute all models");
      std::vector<char> seen(num_models, 0);
      for (std::size_t k : order) {
        if (k >= num_models || seen[k])
          throw std::invalid_argument("selector: cascade order must be a permutation");
        seen[k] = 1;
      }
      break;
    }
    default:
      break;
  }
}

namespace {

// Ties toward the lower index.
std::size_t true_argmin(const QueryCatalog& truth, QueryId q) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < truth.num_models(); ++k)
    if (truth.true_mean(q, k) < truth.true_mean(q, best)) best = k;
  return best;
}

}  // namespace

Decision select(const SelectorPolicy& policy, QueryId q, const EstimatorState* estimates,
                const QueryCatalog* truth, RngStream& policy_rng) {
  switch (policy.kind) {
    case SelectorPolicy::Kind::Always:
      return {policy.model, false};
    case SelectorPolicy::Kind::Oracle: {
      if (truth == nullptr)
        throw std::invalid_argument("oracle selector requires catalog truth");
      return {true_argmin(*truth, q), false};
    }
    case SelectorPolicy::Kind::Learned: {
      if (estimates == nullptr)
        throw std::invalid_argument("learned selector requires estimates");
      const auto value = [&](std::size_t k) {
        const CostEstimate e = estimates->cost_estimate(q, k);
        return policy.source == ScoreSource::Plugin ? e.plugin : e.lcb;
      };
      // "<=" pushes ties toward the higher index: with two models an exact
      // tie selects the large model.
      std::size_t best = 0;
      for (std::size_t k = 1; k < estimates->num_models(); ++k)
        if (value(k) <= value(best)) best = k;
      return {best, false};
    }
    case SelectorPolicy::Kind::Noisy: {
      if (truth == nullptr)
        throw std::invalid_argument("noisy selector requires catalog truth");
      const std::size_t best = true_argmin(*truth, q);
      if (truth->num_models() < 2 || policy_rng.next_double() < policy.accuracy)
        return {best, false};
      std::size_t wrong = static_cast<std::size_t>(
          policy_rng.next_below(truth->num_models() - 1));
      if (wrong >= best) ++wrong;
      return {wrong, false};
    }
    case SelectorPolicy::Kind::Cascade:
      return {policy.order.front(), true};
  }
  return {0, false};
}

Realization realize_cost(const Decision& decision, QueryId q, const QueryCatalog& catalog,
                         CostStreamSet& streams,
                         const std::vector<std::size_t>& cascade_order) {
  Realization out;
  if (!decision.is_cascade_sequence) {
    const auto draw = catalog.cost_model(q, decision.model).sample(streams.at(q, decision.model));
    out.total = draw.value;
    out.observations.emplace_back(decision.model, draw.value);
    return out;
  }
  for (std::size_t i = 0; i < cascade_order.size(); ++i) {
    const std::size_t k = cascade_order[i];
    const CostModel& model = catalog.cost_model(q, k);
    const bool last = i + 1 == cascade_order.size();
    if (!last && !model.is_two_phase())
      throw std::invalid_argument("cascade requires two-phase cost models before the last stage");
    const auto draw = model.sample(streams.at(q, k));
    out.total += draw.value;
    out.observations.emplace_back(k, draw.value);
    if (!draw.failed) break;
  }
  return out;
}

double expected_policy_cost(const SelectorPolicy& policy, const QueryCatalog& catalog,
                            QueryId q) {
  switch (policy.kind) {
    case SelectorPolicy::Kind::Always:
      return catalog.true_mean(q, policy.model);
    case SelectorPolicy::Kind::Oracle:
      return catalog.min_true_mean(q);
    case SelectorPolicy::Kind::Noisy: {
      const std::size_t best = true_argmin(catalog, q);
      if (catalog.num_models() < 2) return catalog.true_mean(q, best);
      double others = 0.0;
      for (std::size_t k = 0; k < catalog.num_models(); ++k)
        if (k != best) others += catalog.true_mean(q, k);
      others /= static_cast<double>(catalog.num_models() - 1);
      return policy.accuracy * catalog.true_mean(q, best) + (1.0 - policy.accuracy) * others;
    }
    case SelectorPolicy::Kind::Cascade: {
      // Walk the order: each stage contributes its mean weighted by the
      // probability that every earlier stage failed.
      double cost = 0.0;
      double reach = 1.0;
      for (std::size_t i = 0; i < policy.order.size(); ++i) {
        const std::size_t k = policy.order[i];
        cost += reach * catalog.true_mean(q, k);
        const CostModel& model = catalog.cost_model(q, k);
        if (!model.is_two_phase()) break;
        reach *= model.fail_prob();
        if (reach == 0.0) break;
      }
      return cost;
    }
    case SelectorPolicy::Kind::Learned:
      throw std::logic_error("learned policy cost depends on fitted state");
  }
  return 0.0;
}

std::pair<double, double> baseline_selector_gaps(const QueryCatalog& catalog) {
  if (catalog.num_models() < 2)
    throw std::invalid_argument("baseline gaps need at least two models");
  double gap_first = 0.0;
  double gap_second = 0.0;
  for (QueryId q = 0; q < catalog.num_queries(); ++q) {
    const double diff = catalog.true_mean(q, 0) - catalog.true_mean(q, 1);
    gap_first += catalog.prob(q) * std::max(0.0, diff);
    gap_second += catalog.prob(q) * std::max(0.0, -diff);
  }
  return {gap_first, gap_second};
}

}  // namespace cachemux
