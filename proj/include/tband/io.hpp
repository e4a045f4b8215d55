#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tband/bandit.hpp"

namespace tband {

using json = nlohmann::json;

/// File could not be opened, written or parsed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON forms. Tensors are {"dims": [d1, d2, d3], "data": [...]} with data in
// canonical (i fastest, then j, then k) order.
json tensor_to_json(const Tensor3& t);
Tensor3 tensor_from_json(const json& j);

json transform_to_json(const TransformSpec& spec);
TransformSpec transform_from_json(const json& j);

json family_to_json(const LinkFamily& family);
LinkFamily family_from_json(const json& j);

json instance_to_json(const BanditInstance& instance);
BanditInstance instance_from_json(const json& j);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

/// Shortest decimal that parses back to exactly the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

// CSV ------------------------------------------------------------------------

struct TraceRow {
  std::string policy;
  std::uint64_t seed = 0;
  std::size_t round = 0;  ///< 1-based
  std::size_t arm_index = 0;
  double instant_regret = 0.0;
  double cum_regret = 0.0;
};

struct AggregateRow {
  std::string policy;
  std::size_t round = 0;
  double mean_cum_regret = 0.0;
  double std_cum_regret = 0.0;
  std::size_t n_runs = 0;
};

inline constexpr const char* kTraceHeader = "policy,seed,round,arm_index,instant_regret,cum_regret";
inline constexpr const char* kAggregateHeader = "policy,round,mean_cum_regret,std_cum_regret,n_runs";
inline constexpr const char* kDecisionHeader = "policy,seed,round,arm_index,bonus,predicted_mean";

void write_trace_csv(std::ostream& out, const RegretTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const RegretTrace& trace);
std::vector<TraceRow> read_trace_csv(std::istream& in);
std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path);

void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows);
void write_aggregate_csv(const std::filesystem::path& path, std::span<const AggregateRow> rows);
std::vector<AggregateRow> read_aggregate_csv(std::istream& in);
std::vector<AggregateRow> read_aggregate_csv(const std::filesystem::path& path);

void write_decision_csv(std::ostream& out, const RegretTrace& trace);

}  // namespace tband
