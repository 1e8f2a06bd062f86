#include "cachemux/report.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace cachemux {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

int log_level() {
  const char* env = std::getenv("CACHEMUX_LOG");
  if (env == nullptr) return 1;
  const std::string v(env);
  if (v == "quiet") return 0;
  if (v == "debug") return 2;
  return 1;
}

void log_info(const std::string& message) {
  if (log_level() >= 1) std::cerr << "[cachemux] " << message << "\n";
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string sanitize_label(const std::string& label) {
  std::string out;
  for (char c : label) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out;
}

// Tracks files written by one command so a failure can clean them up.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  std::ofstream open(const std::string& name) {
    fs::create_directories(dir_);
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file: " + p.string());
    written_.push_back(p);
    return out;
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  void remove_all_written() {
    for (const auto& p : written_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
};

class StepWriter {
 public:
  StepWriter(std::ofstream stream, bool as_json)
      : stream_(std::move(stream)), json_(as_json) {
    if (json_) {
      stream_ << "[";
    } else {
      stream_ << "t,query,hit,model,realized_cost,cum_cost,cum_regret\n";
    }
  }

  void write(const StepRecord& r) {
    if (json_) {
      stream_ << (first_ ? "\n" : ",\n");
      first_ = false;
      stream_ << "  {\"t\":" << r.t << ",\"query\":" << r.query
              << ",\"hit\":" << (r.hit ? "true" : "false") << ",\"model\":" << r.model
              << ",\"realized_cost\":" << fmt(r.realized_cost)
              << ",\"cum_cost\":" << fmt(r.cum_cost)
              << ",\"cum_regret\":" << fmt(r.cum_regret) << "}";
    } else {
      stream_ << r.t << ',' << r.query << ',' << (r.hit ? 1 : 0) << ',' << r.model << ','
              << fmt(r.realized_cost) << ',' << fmt(r.cum_cost) << ',' << fmt(r.cum_regret)
              << '\n';
    }
  }

  void close() {
    if (json_) stream_ << "\n]\n";
    stream_.close();
  }

 private:
  std::ofstream stream_;
  bool json_ = false;
  bool first_ = true;
};

ordered_json aggregate_json(const Aggregate& agg, bool offline, double subopt_mean) {
  ordered_json out;
  out["trials"] = agg.trials;
  out["mean_cost"] = agg.mean_cost;
  out["std_cost"] = agg.std_cost;
  out["mean_regret"] = agg.mean_regret;
  out["std_regret"] = agg.std_regret;
  if (offline) out["mean_exact_suboptimality"] = subopt_mean;
  return out;
}

ExperimentPlan plan_from_config(const ExperimentConfig& cfg) {
  ExperimentPlan plan;
  const CatalogSpec catalog = cfg.catalog;
  plan.catalog_for_trial = [catalog](std::uint64_t trial_seed) {
    return catalog.build(trial_seed);
  };
  plan.capacity = cfg.cache_capacity;
  plan.horizon = cfg.horizon;
  plan.num_samples = cfg.samples;
  plan.online = cfg.online;
  plan.trials = cfg.trials;
  plan.seed = cfg.seed;
  plan.threads = cfg.threads;
  plan.options.record_series = cfg.record_series;
  plan.options.delta = cfg.delta;
  return plan;
}

void run_simulation_command(const ExperimentConfig& cfg, const CliCommand& cmd,
                            OutputSet& outputs) {
  ordered_json results = ordered_json::array();
  for (const auto& token : cfg.policies) {
    const PolicySpec policy = make_policy(cfg, token);
    ExperimentPlan plan = plan_from_config(cfg);

    const std::string stem = sanitize_label(token);
    StepWriter steps(outputs.open("steps_" + stem + (cmd.format == "json" ? ".json" : ".csv")),
                     cmd.format == "json");
    std::ofstream cache_dump;
    if (cmd.dump_cache) cache_dump = outputs.open("cache_" + stem + ".csv");
    plan.options.step_sink = [&](const StepRecord& r) { steps.write(r); };

    std::uint64_t dump_t = 0;
    std::string estimator_snapshot;
    if (cmd.dump_cache || cmd.dump_estimators) {
      if (cmd.dump_cache) cache_dump << "t,entries\n";
      plan.options.post_step_hook = [&](const EstimatorState& est, const CacheState& cache) {
        ++dump_t;
        if (cmd.dump_cache) {
          cache_dump << dump_t << ",\"";
          for (std::size_t i = 0; i < cache.entries().size(); ++i) {
            if (i) cache_dump << '|';
            cache_dump << cache.entries()[i];
          }
          cache_dump << "\"\n";
        }
        if (cmd.dump_estimators && dump_t == plan.horizon)
          estimator_snapshot = est.snapshot_json();
      };
    }

    const std::vector<RunSummary> trials = run_trials(plan, policy);
    steps.close();
    const Aggregate agg = aggregate(trials);
    double subopt = 0.0;
    for (const auto& t : trials) subopt += t.exact_suboptimality;
    subopt /= static_cast<double>(trials.size());

    if (cfg.record_series && !agg.cost_series.mean.empty()) {
      auto series = outputs.open("series_" + stem + ".csv");
      series << "t,mean_cost,std_cost,mean_regret,std_regret\n";
      for (std::size_t i = 0; i < agg.cost_series.mean.size(); ++i) {
        series << (i + 1) << ',' << fmt(agg.cost_series.mean[i]) << ','
               << fmt(agg.cost_series.stddev[i]) << ',' << fmt(agg.regret_series.mean[i])
               << ',' << fmt(agg.regret_series.stddev[i]) << '\n';
      }
    }

    ordered_json entry;
    entry["policy"] = token;
    entry["aggregate"] = aggregate_json(agg, !cfg.online, subopt);
    results.push_back(entry);
    log_info(token + ": mean cost " + fmt(agg.mean_cost) + " (+/- " + fmt(agg.std_cost) +
             "), mean regret " + fmt(agg.mean_regret));

    if (cmd.dump_estimators && !estimator_snapshot.empty()) {
      auto est_out = outputs.open("estimators_" + stem + ".json");
      est_out << estimator_snapshot << "\n";
    }
  }

  ordered_json summary;
  summary["config"] = ordered_json::parse(effective_config_json(cfg));
  summary["results"] = results;
  auto out = outputs.open("summary.json");
  out << summary.dump(2) << "\n";
}

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void run_table_command(const ExperimentConfig& cfg, OutputSet& outputs) {
  std::vector<double> alphas = cfg.alphas.empty() ? std::vector<double>{cfg.catalog.alpha}
                                                  : cfg.alphas;
  std::vector<double> ratios =
      cfg.cost_ratios.empty() ? std::vector<double>{cfg.catalog.cost_ratio} : cfg.cost_ratios;
  std::vector<double> accuracies = cfg.accuracies;
  if (cfg.online || accuracies.empty()) accuracies = {cfg.selector_accuracy};

  ordered_json rows = ordered_json::array();
  std::ostringstream text;
  text << "alpha  ratio";
  if (!cfg.online) text << "  accuracy";
  for (const auto& token : cfg.policies) text << "  " << token;
  text << "\n";

  for (double accuracy : accuracies) {
    for (double alpha : alphas) {
      for (double ratio : ratios) {
        ExperimentConfig row_cfg = cfg;
        row_cfg.catalog.alpha = alpha;
        row_cfg.catalog.cost_ratio = ratio;
        row_cfg.selector_accuracy = accuracy;
        ordered_json row;
        row["alpha"] = alpha;
        row["cost_ratio"] = ratio;
        if (!cfg.online) row["accuracy"] = accuracy;
        ordered_json cells;
        text << fmt6(alpha) << "  " << fmt6(ratio);
        if (!cfg.online) text << "  " << fmt6(accuracy);
        for (const auto& token : cfg.policies) {
          const PolicySpec policy = make_policy(row_cfg, token);
          ExperimentPlan plan = plan_from_config(row_cfg);
          const Aggregate agg = aggregate(run_trials(plan, policy));
          ordered_json cell;
          cell["mean_cost"] = agg.mean_cost;
          cell["std_cost"] = agg.std_cost;
          cell["mean_regret"] = agg.mean_regret;
          cell["std_regret"] = agg.std_regret;
          cells[token] = cell;
          text << "  " << fmt6(agg.mean_cost);
        }
        text << "\n";
        row["policies"] = cells;
        rows.push_back(row);
        log_info("table row alpha=" + fmt(alpha) + " ratio=" + fmt(ratio) + " done");
      }
    }
  }

  ordered_json summary;
  summary["config"] = ordered_json::parse(effective_config_json(cfg));
  summary["rows"] = rows;
  auto out = outputs.open("summary.json");
  out << summary.dump(2) << "\n";
  std::cout << text.str();
}

void run_lower_bound_command(const ExperimentConfig& cfg, OutputSet& outputs) {
  const TwoPointResult result = two_point_regret_experiment(
      cfg.delta_gap, cfg.horizon, cfg.trials, cfg.seed, cfg.threads);
  ordered_json summary;
  summary["config"] = ordered_json::parse(effective_config_json(cfg));
  summary["delta_gap"] = cfg.delta_gap;
  summary["instance1"] = {{"mean_regret", result.mean_regret[0]},
                          {"std_regret", result.std_regret[0]}};
  summary["instance2"] = {{"mean_regret", result.mean_regret[1]},
                          {"std_regret", result.std_regret[1]}};
  summary["max_mean_regret"] = result.max_mean_regret;
  auto out = outputs.open("summary.json");
  out << summary.dump(2) << "\n";
  log_info("max mean regret " + fmt(result.max_mean_regret));
}

}  // namespace

int run_and_emit(const CliCommand& cmd) {
  ExperimentConfig cfg;
  try {
    cfg = parse_config(cmd.config_path);
    if (cmd.seed_override) cfg.seed = *cmd.seed_override;
    if (cmd.trials_override) cfg.trials = *cmd.trials_override;
    if (cmd.subcommand == "simulate-online" || cmd.subcommand == "trace-run") {
      if (!cfg.online) throw ConfigError("config mode must be 'online' for this subcommand");
    } else if (cmd.subcommand == "simulate-offline") {
      if (cfg.online) throw ConfigError("config mode must be 'offline' for this subcommand");
    }
    if (cmd.subcommand == "trace-run" && cfg.catalog.kind != CatalogSpec::Kind::Trace)
      throw ConfigError("trace-run requires catalog.kind = 'trace'");
    if (cmd.format != "csv" && cmd.format != "json")
      throw ConfigError("--format must be 'csv' or 'json'");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  OutputSet outputs{fs::path(cmd.out_dir)};
  try {
    if (cmd.subcommand == "simulate-online" || cmd.subcommand == "simulate-offline" ||
        cmd.subcommand == "trace-run") {
      run_simulation_command(cfg, cmd, outputs);
    } else if (cmd.subcommand == "table") {
      run_table_command(cfg, outputs);
    } else if (cmd.subcommand == "lower-bound") {
      run_lower_bound_command(cfg, outputs);
    } else {
      std::cerr << "unknown subcommand: " << cmd.subcommand << "\n";
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    outputs.remove_all_written();
    return 2;
  }
  return 0;
}

}  // namespace cachemux
