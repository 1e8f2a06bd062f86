#include "cachemux/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cachemux/trace.hpp"

namespace cachemux {

using nlohmann::json;
using nlohmann::ordered_json;

QueryCatalog CatalogSpec::build(std::uint64_t trial_seed) const {
  const std::uint64_t catalog_seed =
      seed.has_value() ? *seed : mix_seed(trial_seed, kCatalogStreamTag);
  RngStream rng = derive_stream(catalog_seed, kCatalogStreamTag);
  switch (kind) {
    case Kind::SyntheticFixed:
      return make_fixed_cost_catalog(queries, alpha, models, cost_ratio, bernoulli_p, rng);
    case Kind::SyntheticBernoulli:
      return make_bernoulli_catalog(queries, alpha, models, cost_ratio, rng);
    case Kind::Explicit: {
      std::optional<CostBounds> bounds;
      if (b1 && b2) bounds = CostBounds{*b1, *b2};
      return make_explicit_catalog(weights, costs, bounds);
    }
    case Kind::Trace: {
      std::optional<CostBounds> bounds;
      if (b1 && b2) bounds = CostBounds{*b1, *b2};
      return load_trace(path, bounds, strict_replay);
    }
  }
  throw ConfigError("catalog.kind: unsupported kind");
}

namespace {

[[noreturn]] void bad_key(const std::string& path, const std::string& what) {
  throw ConfigError("config error at '" + path + "': " + what);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& prefix) {
  for (const auto& item : obj.items())
    if (!allowed.count(item.key())) bad_key(prefix + item.key(), "unknown key");
}

double get_number(const json& obj, const std::string& key, const std::string& prefix,
                  double lo, double hi, double fallback, bool required = false) {
  if (!obj.contains(key)) {
    if (required) bad_key(prefix + key, "missing required key");
    return fallback;
  }
  if (!obj[key].is_number()) bad_key(prefix + key, "expected a number");
  const double v = obj[key].get<double>();
  if (v < lo || v > hi) {
    std::ostringstream os;
    os << "value " << v << " outside [" << lo << ", " << hi << "]";
    bad_key(prefix + key, os.str());
  }
  return v;
}

std::uint64_t get_count(const json& obj, const std::string& key, const std::string& prefix,
                        std::uint64_t lo, std::uint64_t fallback, bool required = false) {
  if (!obj.contains(key)) {
    if (required) bad_key(prefix + key, "missing required key");
    return fallback;
  }
  if (!obj[key].is_number_integer() || obj[key].get<long long>() < 0)
    bad_key(prefix + key, "expected a non-negative integer");
  const std::uint64_t v = obj[key].get<std::uint64_t>();
  if (v < lo) bad_key(prefix + key, "value too small");
  return v;
}

CatalogSpec parse_catalog(const json& obj) {
  reject_unknown(obj,
                 {"kind", "queries", "models", "alpha", "cost_ratio", "bernoulli_p", "seed",
                  "path", "strict_replay", "b1", "b2", "weights", "costs"},
                 "catalog.");
  CatalogSpec spec;
  const std::string kind = obj.value("kind", std::string("synthetic-fixed"));
  if (kind == "synthetic-fixed") {
    spec.kind = CatalogSpec::Kind::SyntheticFixed;
  } else if (kind == "synthetic-bernoulli") {
    spec.kind = CatalogSpec::Kind::SyntheticBernoulli;
  } else if (kind == "explicit") {
    spec.kind = CatalogSpec::Kind::Explicit;
  } else if (kind == "trace") {
    spec.kind = CatalogSpec::Kind::Trace;
  } else {
    bad_key("catalog.kind", "unknown catalog kind '" + kind + "'");
  }
  spec.queries = get_count(obj, "queries", "catalog.", 1, 20);
  spec.models = get_count(obj, "models", "catalog.", 1, 2);
  spec.alpha = get_number(obj, "alpha", "catalog.", 0.0, 1.0, 0.9);
  spec.cost_ratio = get_number(obj, "cost_ratio", "catalog.", 0.0, 1e12, 100.0);
  spec.bernoulli_p = get_number(obj, "bernoulli_p", "catalog.", 0.0, 1.0, 0.5);
  if (obj.contains("seed")) spec.seed = get_count(obj, "seed", "catalog.", 0, 0);
  if (obj.contains("path")) {
    if (!obj["path"].is_string()) bad_key("catalog.path", "expected a string");
    spec.path = obj["path"].get<std::string>();
  }
  if (obj.contains("strict_replay")) {
    if (!obj["strict_replay"].is_boolean()) bad_key("catalog.strict_replay", "expected a bool");
    spec.strict_replay = obj["strict_replay"].get<bool>();
  }
  if (obj.contains("b1")) spec.b1 = get_number(obj, "b1", "catalog.", 1e-12, 1e18, 1.0);
  if (obj.contains("b2")) spec.b2 = get_number(obj, "b2", "catalog.", 1e-12, 1e18, 1.0);
  if (spec.b1.has_value() != spec.b2.has_value())
    bad_key("catalog.b1", "b1 and b2 must be given together");
  if (spec.kind == CatalogSpec::Kind::Trace && spec.path.empty())
    bad_key("catalog.path", "trace catalogs need a path");
  if (spec.kind == CatalogSpec::Kind::Explicit) {
    if (!obj.contains("weights") || !obj["weights"].is_array())
      bad_key("catalog.weights", "explicit catalogs need a weights array");
    if (!obj.contains("costs") || !obj["costs"].is_array())
      bad_key("catalog.costs", "explicit catalogs need a costs matrix");
    spec.weights = obj["weights"].get<std::vector<double>>();
    spec.costs = obj["costs"].get<std::vector<std::vector<double>>>();
    if (spec.costs.size() != spec.weights.size())
      bad_key("catalog.costs", "one cost row per query required");
    spec.queries = spec.weights.size();
    spec.models = spec.costs.empty() ? 1 : spec.costs.front().size();
  } else if (obj.contains("weights") || obj.contains("costs")) {
    bad_key("catalog.weights", "only explicit catalogs take weights/costs");
  }
  return spec;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": invalid JSON: " + e.what());
  }
  if (!root.is_object()) throw ConfigError(origin + ": top-level JSON object expected");
  reject_unknown(root,
                 {"mode", "catalog", "cache_capacity", "policies", "estimate_source",
                  "selector_accuracy", "cascade_order", "horizon", "samples", "trials", "seed",
                  "delta", "record_series", "threads", "alphas", "cost_ratios", "accuracies",
                  "delta_gap"},
                 "");

  ExperimentConfig cfg;
  const std::string mode = root.value("mode", std::string("online"));
  if (mode == "online") {
    cfg.online = true;
  } else if (mode == "offline") {
    cfg.online = false;
  } else {
    bad_key("mode", "expected 'online' or 'offline'");
  }
  if (root.contains("catalog")) {
    if (!root["catalog"].is_object()) bad_key("catalog", "expected an object");
    cfg.catalog = parse_catalog(root["catalog"]);
  }
  cfg.cache_capacity = static_cast<std::size_t>(get_count(root, "cache_capacity", "", 0, 10));
  if (root.contains("policies")) {
    if (!root["policies"].is_array() || root["policies"].empty())
      bad_key("policies", "expected a non-empty array of policy tokens");
    cfg.policies = root["policies"].get<std::vector<std::string>>();
  }
  const std::string source = root.value("estimate_source", std::string("lcb"));
  if (source == "lcb") {
    cfg.estimate_source = ScoreSource::Lcb;
  } else if (source == "plugin") {
    cfg.estimate_source = ScoreSource::Plugin;
  } else {
    bad_key("estimate_source", "expected 'plugin' or 'lcb'");
  }
  cfg.selector_accuracy = get_number(root, "selector_accuracy", "", 0.0, 1.0, 1.0);
  if (root.contains("cascade_order")) {
    if (!root["cascade_order"].is_array()) bad_key("cascade_order", "expected an array");
    cfg.cascade_order = root["cascade_order"].get<std::vector<std::size_t>>();
  }
  cfg.horizon = get_count(root, "horizon", "", 1, 10000);
  cfg.samples = get_count(root, "samples", "", 1, 10000);
  cfg.trials = static_cast<std::size_t>(get_count(root, "trials", "", 1, 100));
  cfg.seed = get_count(root, "seed", "", 0, 1);
  if (root.contains("delta"))
    cfg.delta = get_number(root, "delta", "", 1e-12, 1.0 - 1e-12, 0.1, true);
  if (root.contains("record_series")) {
    if (!root["record_series"].is_boolean()) bad_key("record_series", "expected a bool");
    cfg.record_series = root["record_series"].get<bool>();
  }
  cfg.threads = static_cast<std::size_t>(get_count(root, "threads", "", 0, 0));
  if (root.contains("alphas")) cfg.alphas = root["alphas"].get<std::vector<double>>();
  if (root.contains("cost_ratios"))
    cfg.cost_ratios = root["cost_ratios"].get<std::vector<double>>();
  if (root.contains("accuracies")) {
    cfg.accuracies = root["accuracies"].get<std::vector<double>>();
    for (double a : cfg.accuracies)
      if (a < 0.0 || a > 1.0) bad_key("accuracies", "accuracy values must be in [0, 1]");
  }
  cfg.delta_gap = get_number(root, "delta_gap", "", 0.0, 0.499999, 0.1);

  // Policy tokens are validated eagerly so config errors surface before any
  // simulation work starts.
  for (const auto& token : cfg.policies) (void)make_policy(cfg, token);
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

PolicySpec make_policy(const ExperimentConfig& config, const std::string& token) {
  const auto plus = token.find('+');
  if (plus == std::string::npos)
    throw ConfigError("policies: token '" + token + "' must look like 'lec+selector'");
  const std::string cache = token.substr(0, plus);
  const std::string sel = token.substr(plus + 1);
  const std::size_t num_models = config.catalog.models;

  PolicySpec spec;
  spec.label = token;
  spec.cache_source = config.estimate_source;

  std::size_t fixed_model = num_models;  // sentinel: not an always-policy
  if (sel.rfind("model", 0) == 0) {
    const std::string digits = sel.substr(5);
    std::size_t idx = 0;
    try {
      idx = std::stoul(digits);
    } catch (const std::exception&) {
      throw ConfigError("policies: bad model index in '" + token + "'");
    }
    if (idx < 1 || idx > num_models)
      throw ConfigError("policies: model index out of range in '" + token + "'");
    fixed_model = idx - 1;
    spec.selector = SelectorPolicy::always(fixed_model, num_models);
  } else if (sel == "small") {
    fixed_model = 0;
    spec.selector = SelectorPolicy::always(0, num_models);
  } else if (sel == "large") {
    fixed_model = num_models - 1;
    spec.selector = SelectorPolicy::always(fixed_model, num_models);
  } else if (sel == "selector") {
    spec.selector = config.online
                        ? SelectorPolicy::learned(config.estimate_source, num_models)
                        : SelectorPolicy::noisy(config.selector_accuracy, num_models);
  } else if (sel == "learned") {
    spec.selector = SelectorPolicy::learned(config.estimate_source, num_models);
  } else if (sel == "oracle") {
    spec.selector = SelectorPolicy::oracle(num_models);
  } else if (sel == "noisy") {
    spec.selector = SelectorPolicy::noisy(config.selector_accuracy, num_models);
  } else if (sel == "cascade") {
    std::vector<std::size_t> order = config.cascade_order;
    if (order.empty()) {
      order.resize(num_models);
      for (std::size_t k = 0; k < num_models; ++k) order[k] = k;
    }
    if (order.size() != num_models)
      throw ConfigError("cascade_order: must permute all " + std::to_string(num_models) +
                        " models");
    spec.selector = SelectorPolicy::cascade(std::move(order));
  } else {
    throw ConfigError("policies: unknown selector '" + sel + "' in '" + token + "'");
  }

  if (cache == "lfu") {
    spec.cache_kind = ScoreFunction::Kind::Lfu;
  } else if (cache == "lec") {
    if (fixed_model < num_models) {
      spec.cache_kind = ScoreFunction::Kind::LecSingle;
      spec.cache_model = fixed_model;
    } else {
      spec.cache_kind = ScoreFunction::Kind::LecJoint;
    }
  } else {
    throw ConfigError("policies: unknown cache policy '" + cache + "' in '" + token + "'");
  }
  return spec;
}

std::string effective_config_json(const ExperimentConfig& config) {
  ordered_json out;
  out["mode"] = config.online ? "online" : "offline";
  ordered_json cat;
  switch (config.catalog.kind) {
    case CatalogSpec::Kind::SyntheticFixed: cat["kind"] = "synthetic-fixed"; break;
    case CatalogSpec::Kind::SyntheticBernoulli: cat["kind"] = "synthetic-bernoulli"; break;
    case CatalogSpec::Kind::Explicit: cat["kind"] = "explicit"; break;
    case CatalogSpec::Kind::Trace: cat["kind"] = "trace"; break;
  }
  cat["queries"] = config.catalog.queries;
  cat["models"] = config.catalog.models;
  if (config.catalog.kind == CatalogSpec::Kind::SyntheticFixed ||
      config.catalog.kind == CatalogSpec::Kind::SyntheticBernoulli) {
    cat["alpha"] = config.catalog.alpha;
    cat["cost_ratio"] = config.catalog.cost_ratio;
    if (config.catalog.kind == CatalogSpec::Kind::SyntheticFixed)
      cat["bernoulli_p"] = config.catalog.bernoulli_p;
  }
  if (config.catalog.seed) cat["seed"] = *config.catalog.seed;
  if (!config.catalog.path.empty()) {
    cat["path"] = config.catalog.path;
    cat["strict_replay"] = config.catalog.strict_replay;
  }
  if (config.catalog.b1) cat["b1"] = *config.catalog.b1;
  if (config.catalog.b2) cat["b2"] = *config.catalog.b2;
  out["catalog"] = cat;
  out["cache_capacity"] = config.cache_capacity;
  out["policies"] = config.policies;
  out["estimate_source"] = config.estimate_source == ScoreSource::Plugin ? "plugin" : "lcb";
  out["selector_accuracy"] = config.selector_accuracy;
  out["horizon"] = config.horizon;
  if (!config.online) out["samples"] = config.samples;
  out["trials"] = config.trials;
  out["seed"] = config.seed;
  if (config.delta) {
    out["delta"] = *config.delta;
  } else {
    out["delta"] = config.online ? "1/horizon" : "1/samples";
  }
  out["record_series"] = config.record_series;
  out["threads"] = config.threads;
  if (!config.alphas.empty()) out["alphas"] = config.alphas;
  if (!config.cost_ratios.empty()) out["cost_ratios"] = config.cost_ratios;
  if (!config.accuracies.empty()) out["accuracies"] = config.accuracies;
  return out.dump(2);
}

}  // namespace cachemux
