#include "tband/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace tband {

namespace fs = std::filesystem;

json tensor_to_json(const Tensor3& t) {
  const auto d = t.data();
  return json{{"dims", {t.d1(), t.d2(), t.d3()}}, {"data", std::vector<double>(d.begin(), d.end())}};
}

Tensor3 tensor_from_json(const json& j) {
  const auto dims = j.at("dims").get<std::vector<std::size_t>>();
  if (dims.size() != 3) throw InvalidInput("tensor JSON: dims must have three entries");
  const Dims d{dims[0], dims[1], dims[2]};
  auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != d.size()) {
    throw InvalidInput("tensor JSON: " + std::to_string(data.size()) + " entries for dims " +
                       to_string(d));
  }
  return Tensor3(d, std::move(data));
}

json transform_to_json(const TransformSpec& spec) {
  json j{{"kind", std::string(to_string(spec.kind()))}, {"d3", spec.d3()}};
  if (spec.seed()) j["seed"] = *spec.seed();
  return j;
}

TransformSpec transform_from_json(const json& j) {
  return TransformSpec::make(parse_transform_kind(j.at("kind").get<std::string>()),
                             j.at("d3").get<std::size_t>(), j.value("seed", std::uint64_t{0}));
}

json family_to_json(const LinkFamily& family) {
  return json{{"kind", family.name()}, {"noise_sigma", family.noise_sigma}, {"eta_clip", family.eta_clip}};
}

LinkFamily family_from_json(const json& j) {
  return LinkFamily::make(parse_link_kind(j.at("kind").get<std::string>()),
                          j.value("noise_sigma", 0.01), j.value("eta_clip", 3.0));
}

json instance_to_json(const BanditInstance& instance) {
  json arms = json::array();
  for (const auto& x : instance.arms) arms.push_back(tensor_to_json(x));
  return json{{"family", family_to_json(instance.family)},
              {"transform", transform_to_json(instance.spec)},
              {"r_true", instance.r_true},
              {"seed", instance.seed},
              {"omega_min", instance.omega_min},
              {"best_index", instance.best_index},
              {"W_star", tensor_to_json(instance.W_star)},
              {"arms", std::move(arms)}};
}

BanditInstance instance_from_json(const json& j) {
  std::vector<Tensor3> arms;
  for (const auto& a : j.at("arms")) arms.push_back(tensor_from_json(a));
  return make_instance(tensor_from_json(j.at("W_star")), std::move(arms),
                       family_from_json(j.at("family")), transform_from_json(j.at("transform")),
                       j.at("r_true").get<std::size_t>(), j.value("seed", std::uint64_t{0}));
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw IoError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

namespace {

template <typename T>
T parse_unsigned(std::string_view text) {
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw IoError("not a non-negative integer: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line, std::size_t expected) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.size() != expected) {
    throw IoError("CSV row has " + std::to_string(out.size()) + " fields, expected " +
                  std::to_string(expected) + ": " + std::string(line));
  }
  return out;
}

void expect_header(std::istream& in, const char* header) {
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw IoError("CSV header mismatch: expected '" + std::string(header) + "'");
  }
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

void write_trace_csv(std::ostream& out, const RegretTrace& trace) {
  out << kTraceHeader << '\n';
  for (std::size_t t = 0; t < trace.rounds(); ++t) {
    out << trace.policy_name << ',' << trace.seed << ',' << t + 1 << ',' << trace.arm_indices[t]
        << ',' << format_double(trace.instantaneous[t]) << ','
        << format_double(trace.cumulative[t]) << '\n';
  }
}

void write_trace_csv(const fs::path& path, const RegretTrace& trace) {
  auto out = open_out(path);
  write_trace_csv(out, trace);
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  expect_header(in, kTraceHeader);
  std::vector<TraceRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, 6);
    rows.push_back(TraceRow{std::string(f[0]), parse_unsigned<std::uint64_t>(f[1]),
                            parse_unsigned<std::size_t>(f[2]), parse_unsigned<std::size_t>(f[3]),
                            parse_double(f[4]), parse_double(f[5])});
  }
  return rows;
}

std::vector<TraceRow> read_trace_csv(const fs::path& path) {
  auto in = open_in(path);
  return read_trace_csv(in);
}

void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows) {
  out << kAggregateHeader << '\n';
  for (const auto& r : rows) {
    out << r.policy << ',' << r.round << ',' << format_double(r.mean_cum_regret) << ','
        << format_double(r.std_cum_regret) << ',' << r.n_runs << '\n';
  }
}

void write_aggregate_csv(const fs::path& path, std::span<const AggregateRow> rows) {
  auto out = open_out(path);
  write_aggregate_csv(out, rows);
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<AggregateRow> read_aggregate_csv(std::istream& in) {
  expect_header(in, kAggregateHeader);
  std::vector<AggregateRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, 5);
    rows.push_back(AggregateRow{std::string(f[0]), parse_unsigned<std::size_t>(f[1]),
                                parse_double(f[2]), parse_double(f[3]),
                                parse_unsigned<std::size_t>(f[4])});
  }
  return rows;
}

std::vector<AggregateRow> read_aggregate_csv(const fs::path& path) {
  auto in = open_in(path);
  return read_aggregate_csv(in);
}

void write_decision_csv(std::ostream& out, const RegretTrace& trace) {
  out << kDecisionHeader << '\n';
  for (const auto& d : trace.decisions) {
    out << trace.policy_name << ',' << trace.seed << ',' << d.round << ',' << d.arm_index << ','
        << format_double(d.bonus) << ',' << format_double(d.predicted_mean) << '\n';
  }
}

}  // namespace tband
