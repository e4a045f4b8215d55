#include "tband/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <thread>

namespace tband {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kConfigKeys = {
    "d1",       "d2",       "d3",        "r",          "n_arms",         "family",
    "noise_sigma", "eta_clip", "transform", "transform_seed", "normalize",  "policies",
    "T",        "replications", "base_seed", "output_dir", "emit_decision_log", "threads"};

const std::set<std::string> kPolicyNames = {"g_lowtestr", "glm_ucb", "uniform_random"};

const std::set<std::string> kLowTestrKeys = {
    "T1",    "c_T1", "r",  "lambda_T1", "c_lambda",    "lambda",          "lambda_perp", "b_perp",
    "c_b_perp", "delta", "a", "gamma",  "alpha_scale", "oracle_subspace", "max_iters",   "grad_tol"};

const std::set<std::string> kGlmUcbKeys = {"lambda", "delta", "alpha_scale"};

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidInput(where + ": expected a JSON object");
  for (const auto& item : j.items()) {
    if (!allowed.contains(item.key())) {
      throw InvalidInput(where + ": unknown key '" + item.key() + "'");
    }
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

template <typename T>
void read_opt(const json& j, const char* key, std::optional<T>& field) {
  if (j.contains(key) && !j.at(key).is_null()) field = j.at(key).get<T>();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string run_stem(const std::string& policy, std::uint64_t seed) {
  return policy + "_seed" + std::to_string(seed);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (d1 == 0 || d2 == 0 || d3 == 0) throw InvalidInput("config: d1, d2, d3 must be positive");
  if (r == 0 || r > std::min(d1, d2)) throw InvalidInput("config: r must lie in [1, min(d1, d2)]");
  if (n_arms < 2) throw InvalidInput("config: n_arms must be at least 2");
  if (T < 2) throw InvalidInput("config: T must be at least 2");
  if (replications < 1) throw InvalidInput("config: replications must be at least 1");
  if (threads < 1) throw InvalidInput("config: threads must be at least 1");
  if (!(noise_sigma >= 0.0)) throw InvalidInput("config: noise_sigma must be non-negative");
  if (!(eta_clip > 0.0)) throw InvalidInput("config: eta_clip must be positive");
  if (policies.empty()) throw InvalidInput("config: policies must be non-empty");
  std::set<std::string> seen;
  for (const auto& p : policies) {
    if (!kPolicyNames.contains(p.name)) throw InvalidInput("config: unknown policy '" + p.name + "'");
    if (!seen.insert(p.name).second) throw InvalidInput("config: policy '" + p.name + "' listed twice");
    if (p.name == "g_lowtestr") check_keys(p.params, kLowTestrKeys, "g_lowtestr params");
    if (p.name == "glm_ucb") check_keys(p.params, kGlmUcbKeys, "glm_ucb params");
    if (p.name == "uniform_random") check_keys(p.params, {}, "uniform_random params");
  }
}

ExperimentConfig config_from_json(const json& j) {
  check_keys(j, kConfigKeys, "config");
  ExperimentConfig c;
  try {
    read_opt(j, "d1", c.d1);
    read_opt(j, "d2", c.d2);
    read_opt(j, "d3", c.d3);
    read_opt(j, "r", c.r);
    read_opt(j, "n_arms", c.n_arms);
    if (j.contains("family")) c.family = parse_link_kind(j.at("family").get<std::string>());
    read_opt(j, "noise_sigma", c.noise_sigma);
    read_opt(j, "eta_clip", c.eta_clip);
    if (j.contains("transform")) c.transform = parse_transform_kind(j.at("transform").get<std::string>());
    read_opt(j, "transform_seed", c.transform_seed);
    read_opt(j, "normalize", c.normalize);
    read_opt(j, "T", c.T);
    read_opt(j, "replications", c.replications);
    read_opt(j, "base_seed", c.base_seed);
    read_opt(j, "output_dir", c.output_dir);
    read_opt(j, "emit_decision_log", c.emit_decision_log);
    read_opt(j, "threads", c.threads);
    if (j.contains("policies")) {
      for (const auto& p : j.at("policies")) {
        if (p.is_string()) {
          c.policies.push_back({p.get<std::string>(), json::object()});
        } else {
          check_keys(p, {"name", "params"}, "policy entry");
          c.policies.push_back({p.at("name").get<std::string>(), p.value("params", json::object())});
        }
      }
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json policies = json::array();
  for (const auto& p : c.policies) policies.push_back({{"name", p.name}, {"params", p.params}});
  return json{{"d1", c.d1},
              {"d2", c.d2},
              {"d3", c.d3},
              {"r", c.r},
              {"n_arms", c.n_arms},
              {"family", std::string(to_string(c.family))},
              {"noise_sigma", c.noise_sigma},
              {"eta_clip", c.eta_clip},
              {"transform", std::string(to_string(c.transform))},
              {"transform_seed", c.transform_seed},
              {"normalize", c.normalize},
              {"policies", std::move(policies)},
              {"T", c.T},
              {"replications", c.replications},
              {"base_seed", c.base_seed},
              {"output_dir", c.output_dir},
              {"emit_decision_log", c.emit_decision_log},
              {"threads", c.threads}};
}

ExperimentConfig load_config(const fs::path& path) { return config_from_json(read_json_file(path)); }

BanditInstance make_replication_instance(const ExperimentConfig& config, std::size_t replication) {
  const auto spec = TransformSpec::make(config.transform, config.d3, config.transform_seed);
  const auto family = LinkFamily::make(config.family, config.noise_sigma, config.eta_clip);
  return generate_synthetic_instance(config.d1, config.d2, config.d3, config.r, config.n_arms, family,
                                     spec, config.base_seed + replication, config.normalize);
}

RegretTrace run_policy(const BanditInstance& instance, const PolicySpec& policy, std::size_t T,
                       std::size_t r, std::uint64_t seed, bool record_decisions, json* diagnostics) {
  const json& j = policy.params;
  if (policy.name == "g_lowtestr") {
    check_keys(j, kLowTestrKeys, "g_lowtestr params");
    GLowTestrParams p;
    p.r = r;
    read_opt(j, "T1", p.T1);
    read_opt(j, "c_T1", p.c_T1);
    read_opt(j, "r", p.r);
    read_opt(j, "lambda_T1", p.lambda_T1);
    read_opt(j, "c_lambda", p.c_lambda);
    read_opt(j, "lambda", p.lambda);
    read_opt(j, "lambda_perp", p.lambda_perp);
    read_opt(j, "b_perp", p.b_perp);
    read_opt(j, "c_b_perp", p.c_b_perp);
    read_opt(j, "delta", p.delta);
    read_opt(j, "a", p.a);
    read_opt(j, "gamma", p.gamma);
    read_opt(j, "alpha_scale", p.alpha_scale);
    read_opt(j, "oracle_subspace", p.oracle_subspace);
    read_opt(j, "max_iters", p.solver.max_iters);
    read_opt(j, "grad_tol", p.solver.grad_tol);
    p.record_decisions = record_decisions;
    GLowTestrReport report;
    RegretTrace trace = run_g_lowtestr(instance, T, p, seed, &report);
    if (diagnostics != nullptr) {
      *diagnostics = json{{"T1", report.T1},
                          {"lambda_T1", report.lambda_T1},
                          {"lambda_perp", report.lambda_perp},
                          {"b_perp", report.b_perp},
                          {"gamma", report.gamma},
                          {"k", report.k},
                          {"fit_iterations", report.fit.iterations},
                          {"fit_residual", report.fit.residual},
                          {"subspace_distance", report.subspace_distance},
                          {"relative_error", report.relative_error}};
    }
    return trace;
  }
  if (policy.name == "glm_ucb") {
    check_keys(j, kGlmUcbKeys, "glm_ucb params");
    GlmUcbParams p;
    read_opt(j, "lambda", p.lambda);
    read_opt(j, "delta", p.delta);
    read_opt(j, "alpha_scale", p.alpha_scale);
    p.record_decisions = record_decisions;
    return run_glm_ucb_baseline(instance, T, p, seed);
  }
  if (policy.name == "uniform_random") {
    check_keys(j, {}, "uniform_random params");
    return run_uniform_random(instance, T, seed);
  }
  throw InvalidInput("unknown policy '" + policy.name + "'");
}

PolicyAggregate aggregate_traces(const std::string& policy, std::span<const RegretTrace> traces) {
  PolicyAggregate agg;
  agg.policy = policy;
  agg.n_runs = traces.size();
  if (traces.empty()) return agg;
  const std::size_t T = traces.front().rounds();
  for (const auto& t : traces) {
    if (t.rounds() != T) throw InvalidInput("aggregate_traces: traces have different lengths");
  }
  agg.mean_cum_regret.assign(T, 0.0);
  agg.std_cum_regret.assign(T, 0.0);
  const double n = static_cast<double>(traces.size());
  for (std::size_t t = 0; t < T; ++t) {
    double sum = 0.0;
    for (const auto& tr : traces) sum += tr.cumulative[t];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& tr : traces) ss += (tr.cumulative[t] - mean) * (tr.cumulative[t] - mean);
    agg.mean_cum_regret[t] = mean;
    agg.std_cum_regret[t] = traces.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  }
  return agg;
}

const PolicyAggregate* AggregateSummary::find(const std::string& policy) const {
  for (const auto& p : policies) {
    if (p.policy == policy) return &p;
  }
  return nullptr;
}

std::vector<AggregateRow> AggregateSummary::rows() const {
  std::vector<AggregateRow> out;
  for (const auto& p : policies) {
    for (std::size_t t = 0; t < p.mean_cum_regret.size(); ++t) {
      out.push_back({p.policy, t + 1, p.mean_cum_regret[t], p.std_cum_regret[t], p.n_runs});
    }
  }
  return out;
}

json AggregateSummary::to_json() const {
  json table = json::array();
  std::size_t failures = 0;
  for (const auto& p : policies) {
    failures += p.n_failures;
    table.push_back({{"policy", p.policy},
                     {"n_runs", p.n_runs},
                     {"n_failures", p.n_failures},
                     {"final_mean_cum_regret", p.final_mean()},
                     {"final_std_cum_regret", p.final_std()}});
  }
  json runs_json = json::array();
  for (const auto& r : runs) {
    json entry{{"policy", r.policy},     {"replication", r.replication}, {"seed", r.seed},
               {"ok", r.ok},             {"wall_seconds", r.wall_seconds}};
    if (r.ok) {
      entry["final_cum_regret"] = r.final_regret;
      if (!r.diagnostics.empty()) entry["diagnostics"] = r.diagnostics;
    } else {
      entry["error"] = r.error;
    }
    runs_json.push_back(std::move(entry));
  }
  return json{{"final", std::move(table)},
              {"failures", failures},
              {"wall_seconds", wall_seconds},
              {"runs", std::move(runs_json)}};
}

AggregateSummary run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t reps = config.replications;
  const std::size_t n_policies = config.policies.size();

  std::vector<std::optional<BanditInstance>> instances(reps);
  std::vector<std::string> instance_errors(reps);
  std::vector<RunRecord> records(reps * n_policies);
  std::vector<RegretTrace> traces(reps * n_policies);

  const auto pool = [&](std::size_t jobs, const auto& body) {
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
      for (std::size_t job = next++; job < jobs; job = next++) body(job);
    };
    const std::size_t n_threads = std::min(config.threads, jobs);
    std::vector<std::thread> threads;
    for (std::size_t i = 1; i < n_threads; ++i) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
  };

  pool(reps, [&](std::size_t i) {
    try {
      instances[i] = make_replication_instance(config, i);
    } catch (const std::exception& e) {
      instance_errors[i] = std::string("instance generation failed: ") + e.what();
    }
  });

  // Job index = policy * reps + replication, so results land in reporting order.
  pool(reps * n_policies, [&](std::size_t job) {
    const std::size_t pi = job / reps;
    const std::size_t rep = job % reps;
    RunRecord& rec = records[job];
    rec.policy = config.policies[pi].name;
    rec.replication = rep;
    rec.seed = config.base_seed + rep;
    const auto run_start = std::chrono::steady_clock::now();
    if (!instances[rep]) {
      rec.error = instance_errors[rep];
      return;
    }
    try {
      traces[job] = run_policy(*instances[rep], config.policies[pi], config.T, config.r, rec.seed,
                               config.emit_decision_log, &rec.diagnostics);
      rec.ok = true;
      rec.final_regret = traces[job].cumulative.empty() ? 0.0 : traces[job].cumulative.back();
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
    rec.wall_seconds = seconds_since(run_start);
  });

  AggregateSummary summary;
  for (std::size_t pi = 0; pi < n_policies; ++pi) {
    std::vector<RegretTrace> ok;
    std::size_t failures = 0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const std::size_t job = pi * reps + rep;
      if (records[job].ok) {
        ok.push_back(std::move(traces[job]));
      } else {
        ++failures;
      }
    }
    PolicyAggregate agg = aggregate_traces(config.policies[pi].name, ok);
    agg.n_failures = failures;
    summary.policies.push_back(std::move(agg));
    for (auto& t : ok) summary.traces.push_back(std::move(t));
  }
  summary.runs = std::move(records);
  summary.wall_seconds = seconds_since(start);

  if (!config.output_dir.empty()) {
    const fs::path dir(config.output_dir);
    fs::create_directories(dir / "traces");
    for (const auto& t : summary.traces) {
      write_trace_csv(dir / "traces" / (run_stem(t.policy_name, t.seed) + ".csv"), t);
      if (config.emit_decision_log && !t.decisions.empty()) {
        fs::create_directories(dir / "decisions");
        std::ofstream out(dir / "decisions" / (run_stem(t.policy_name, t.seed) + ".csv"),
                          std::ios::binary);
        if (!out) throw IoError("cannot write decision log in " + (dir / "decisions").string());
        write_decision_csv(out, t);
      }
    }
    const auto rows = summary.rows();
    write_aggregate_csv(dir / "aggregate.csv", rows);
    json s = summary.to_json();
    s["config"] = config_to_json(config);
    write_json_file(dir / "summary.json", s);
  }
  return summary;
}

}  // namespace tband
