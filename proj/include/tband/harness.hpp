#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tband/io.hpp"
#include "tband/policies.hpp"

namespace tband {

struct PolicySpec {
  std::string name;  ///< g_lowtestr, glm_ucb or uniform_random
  json params = json::object();
};

/**
 * One experiment: a synthetic instance family, a policy matchup and a
 * replication plan. The JSON form uses these field names verbatim.
 */
struct ExperimentConfig {
  std::size_t d1 = 10;
  std::size_t d2 = 10;
  std::size_t d3 = 3;
  std::size_t r = 1;
  std::size_t n_arms = 100;
  LinkKind family = LinkKind::Linear;
  double noise_sigma = 0.01;
  double eta_clip = 3.0;
  TransformKind transform = TransformKind::Identity;
  std::uint64_t transform_seed = 0;
  bool normalize = true;
  std::vector<PolicySpec> policies;
  std::size_t T = 3000;
  std::size_t replications = 10;
  std::uint64_t base_seed = 0;
  std::string output_dir;
  bool emit_decision_log = false;
  std::size_t threads = 1;

  /// Throws InvalidInput listing the first violated constraint.
  void validate() const;
};

ExperimentConfig config_from_json(const json& j);
json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Instance of replication i, drawn from seed base_seed + i.
BanditInstance make_replication_instance(const ExperimentConfig& config, std::size_t replication);

/// Runs one policy on one instance; unknown parameter keys are rejected.
RegretTrace run_policy(const BanditInstance& instance, const PolicySpec& policy, std::size_t T,
                       std::size_t r, std::uint64_t seed, bool record_decisions = false,
                       json* diagnostics = nullptr);

struct RunRecord {
  std::string policy;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double wall_seconds = 0.0;
  double final_regret = 0.0;
  json diagnostics = json::object();
};

struct PolicyAggregate {
  std::string policy;
  std::vector<double> mean_cum_regret;  ///< index t-1 holds round t
  std::vector<double> std_cum_regret;   ///< sample standard deviation (0 for one run)
  std::size_t n_runs = 0;
  std::size_t n_failures = 0;

  double final_mean() const { return mean_cum_regret.empty() ? 0.0 : mean_cum_regret.back(); }
  double final_std() const { return std_cum_regret.empty() ? 0.0 : std_cum_regret.back(); }
};

struct AggregateSummary {
  std::vector<PolicyAggregate> policies;  ///< config order
  std::vector<RunRecord> runs;            ///< policy-major, replication-minor
  std::vector<RegretTrace> traces;        ///< successful runs, same order as runs
  double wall_seconds = 0.0;

  const PolicyAggregate* find(const std::string& policy) const;
  std::vector<AggregateRow> rows() const;
  json to_json() const;
};

/// Mean and sample standard deviation of cumulative regret, round by round.
PolicyAggregate aggregate_traces(const std::string& policy, std::span<const RegretTrace> traces);

/**
 * Fans the (policy, replication) runs out over config.threads workers and
 * reduces them in a fixed order. When output_dir is set, writes
 * traces/<policy>_seed<seed>.csv, aggregate.csv and summary.json (and
 * decisions/ when emit_decision_log is on).
 */
AggregateSummary run_experiment(const ExperimentConfig& config);

}  // namespace tband
