#pragma once

// Command implementations behind the neargather executable. Each command
// takes parsed options plus output streams and returns the process exit code:
// 0 when every invariant holds, 2 on an invariant violation, 1 on usage or
// I/O errors (thrown as exceptions and mapped by the executable).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "neargather/analysis.hpp"
#include "neargather/geometry.hpp"
#include "neargather/protocol.hpp"
#include "neargather/scenarios.hpp"
#include "neargather/simulator.hpp"
#include "neargather/trace.hpp"

namespace neargather::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitViolation = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path.string());
  out << content;
  if (!out) throw UsageError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateOptions {
  std::size_t n = 10;
  double visibility = 4.0;
  double strong_threshold = 3.5;
  double epsilon = 0.1;
  std::optional<double> min_sep;  // default 0.01 D
  std::uint64_t seed = 0;
  std::optional<std::string> canned;
  std::size_t canned_count = 3;
  double polygon_radius = 1.0;
  std::filesystem::path out = "scenario.json";
};

inline int cmd_generate(const GenerateOptions& o, std::ostream& out) {
  Scenario s;
  if (o.canned) {
    s = canned_scenario(parse_canned_kind(*o.canned), o.canned_count, o.polygon_radius, o.visibility,
                        o.strong_threshold, o.epsilon);
  } else {
    s = generate_connected(o.n, o.visibility, o.strong_threshold, o.min_sep.value_or(0.01 * o.strong_threshold), o.seed,
                           o.epsilon);
  }
  write_file(o.out, save_scenario(s));
  out << "wrote " << o.out.string() << " (" << s.positions.size() << " robots)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

struct RunOptions {
  std::filesystem::path scenario;
  std::string protocol = "neargather";
  std::string policy = "async";
  std::uint64_t seed = 1;
  std::optional<double> delta;  // default 0.05 rho
  std::size_t max_events = 2'000'000;
  std::filesystem::path out_dir = "out";
  std::size_t batch = 1;
  std::optional<std::filesystem::path> script;
  bool landings_before_looks = false;
};

/// Script file: JSON array of cycles {robot, look_time, compute_duration,
/// move_duration, pause_at?, pause_duration?, stop_at?}.
inline std::vector<ScriptedCycle> parse_script(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(std::string("script is not valid JSON: ") + e.what());
  }
  if (!j.is_array()) throw UsageError("script must be a JSON array of cycles");
  auto point = [](const nlohmann::json& p) {
    if (!p.is_array() || p.size() != 2) throw UsageError("script points must be [x, y]");
    return Point2{p[0].get<double>(), p[1].get<double>()};
  };
  std::vector<ScriptedCycle> out;
  try {
    for (const auto& c : j) {
      ScriptedCycle sc;
      sc.robot = c.at("robot").get<int>();
      sc.look_time = c.at("look_time").get<double>();
      sc.compute_duration = c.value("compute_duration", 0.0);
      sc.move_duration = c.value("move_duration", 1.0);
      if (c.contains("pause_at")) sc.pause_at = point(c["pause_at"]);
      sc.pause_duration = c.value("pause_duration", 0.0);
      if (c.contains("stop_at")) sc.stop_at = point(c["stop_at"]);
      out.push_back(sc);
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed script: ") + e.what());
  }
  return out;
}

inline SimConfig build_config(const Scenario& s, const RunOptions& o, std::uint64_t seed) {
  const ProtocolKind kind = parse_protocol(o.protocol);
  const ProtocolParams params = derive_params(s.visibility, s.strong_threshold, s.epsilon);
  SchedulerPolicy policy;
  switch (parse_policy_kind(o.policy)) {
    case SchedulerPolicy::Kind::FullySync: policy = SchedulerPolicy::fully_sync(); break;
    case SchedulerPolicy::Kind::SemiSync: policy = SchedulerPolicy::semi_sync(); break;
    case SchedulerPolicy::Kind::RandomAsync: policy = SchedulerPolicy::random_async(); break;
    case SchedulerPolicy::Kind::Scripted:
      policy = SchedulerPolicy::scripted(o.script ? parse_script(read_file(*o.script)) : centroid_counterexample_script());
      break;
  }
  SimConfig c = make_config(params, kind, std::move(policy), seed);
  if (o.delta) {
    if (!(*o.delta > 0.0)) throw UsageError("--delta must be positive");
    c.delta = *o.delta;
  }
  if (o.max_events == 0) throw UsageError("--max-events must be positive");
  c.max_events = o.max_events;
  c.landings_before_looks = o.landings_before_looks;
  return c;
}

struct RunOutputs {
  std::string trace_jsonl;
  std::string audit_json;
  std::string metrics_csv;
  std::string manifest_json;
  AuditReport report;
  RunStatus status = RunStatus::MaxEvents;
};

/// One complete run: simulate, audit, serialize. Pure given its inputs.
inline RunOutputs execute_run(const Scenario& scenario, const SimConfig& config, const RunOptions& o) {
  const Trace trace = run(config, scenario.positions);
  RunOutputs r;
  r.status = trace.status;
  r.report = audit_trace(trace, config);
  std::ostringstream t;
  write_jsonl(t, trace.records);
  r.trace_jsonl = t.str();
  nlohmann::ordered_json audit = to_json(r.report);
  r.audit_json = audit.dump(2) + "\n";
  std::ostringstream m;
  write_metrics_csv(m, compute_metrics(trace.records, trace.initial_positions, frame_for(config.protocol, config.params)));
  r.metrics_csv = m.str();
  nlohmann::ordered_json manifest;
  manifest["scenario"] = o.scenario.generic_string();
  manifest["protocol"] = std::string(to_string(config.protocol));
  manifest["policy"] = std::string(to_string(config.policy.kind));
  manifest["seed"] = config.seed;
  manifest["delta"] = config.delta;
  manifest["max_events"] = config.max_events;
  manifest["outputs"] = {{"trace", "trace.jsonl"}, {"audit", "audit.json"}, {"metrics", "metrics.csv"}};
  r.manifest_json = manifest.dump(2) + "\n";
  return r;
}

inline void print_summary(std::ostream& out, const RunOutputs& r, std::uint64_t seed) {
  out << "seed " << seed << ": " << to_string(r.status) << ", " << r.report.event_count << " events, final diameter "
      << format_double(r.report.final_diameter);
  if (r.report.pass()) {
    out << ", all checks pass\n";
    return;
  }
  out << ", FAILED:";
  for (const std::string& name : r.report.failing()) {
    const CheckResult& c = r.report.check(name);
    out << ' ' << name << " (event " << (c.witness_event ? std::to_string(*c.witness_event) : "-") << ": " << c.detail
        << ")";
  }
  out << '\n';
}

inline int cmd_run(const RunOptions& o, std::ostream& out) {
  if (o.batch == 0) throw UsageError("--batch must be at least 1");
  const Scenario scenario = load_scenario(read_file(o.scenario));
  std::vector<SimConfig> configs;
  for (std::size_t k = 0; k < o.batch; ++k) configs.push_back(build_config(scenario, o, o.seed + k));

  std::vector<RunOutputs> results;
  if (configs.size() == 1) {
    results.push_back(execute_run(scenario, configs[0], o));
  } else {
    std::vector<std::future<RunOutputs>> futures;
    for (const SimConfig& c : configs) {
      futures.push_back(std::async(std::launch::async, [&scenario, &o, c] { return execute_run(scenario, c, o); }));
    }
    for (auto& f : futures) results.push_back(f.get());
  }

  bool ok = true;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const std::filesystem::path dir =
        o.batch == 1 ? o.out_dir : o.out_dir / ("seed-" + std::to_string(configs[k].seed));
    write_file(dir / "trace.jsonl", results[k].trace_jsonl);
    write_file(dir / "audit.json", results[k].audit_json);
    write_file(dir / "metrics.csv", results[k].metrics_csv);
    write_file(dir / "run.json", results[k].manifest_json);
    print_summary(out, results[k], configs[k].seed);
    ok = ok && results[k].report.pass();
  }
  return ok ? kExitOk : kExitViolation;
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

struct CheckOptions {
  std::filesystem::path trace;
  std::filesystem::path scenario;
  std::string protocol = "neargather";
  std::optional<double> delta;
  std::optional<std::filesystem::path> out;
};

inline int cmd_check(const CheckOptions& o, std::ostream& out) {
  const Scenario scenario = load_scenario(read_file(o.scenario));
  std::istringstream in(read_file(o.trace));
  const std::vector<TraceRecord> records = read_jsonl(in);
  const ProtocolKind kind = parse_protocol(o.protocol);
  ProtocolParams params = derive_params(scenario.visibility, scenario.strong_threshold, scenario.epsilon);
  if (kind == ProtocolKind::NearGatherOneAxis) params.axis_mode = AxisMode::OneAxisRotated;
  AuditOptions opt{params, kind, o.delta.value_or(0.05 * params.rho), 1e-9 * params.visibility};
  const AuditReport report = audit_trace(records, scenario.positions, opt);
  const std::string text = to_json(report).dump(2) + "\n";
  if (o.out) {
    write_file(*o.out, text);
  } else {
    out << text;
  }
  return report.pass() ? kExitOk : kExitViolation;
}

// ---------------------------------------------------------------------------
// scan-prop1
// ---------------------------------------------------------------------------

struct ScanResult {
  double minimum = 0.0;
  double argmin = 0.0;
  bool monotone = true;
  std::size_t first_decrease = 0;
  bool pass = false;
};

/// Samples the annulus chord gap on a uniform grid over [0, V - rho].
inline ScanResult scan_chord_gap(double visibility, double rho, std::size_t grid) {
  if (grid < 2) throw UsageError("grid needs at least two points");
  if (!(rho > 0.0) || rho > visibility / 4.0) throw UsageError("need 0 < rho <= V/4");
  const double hi = visibility - rho;
  ScanResult r;
  r.minimum = std::numeric_limits<double>::infinity();
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid; ++i) {
    const double x = i + 1 == grid ? hi : hi * static_cast<double>(i) / static_cast<double>(grid - 1);
    const double f = annulus_chord_gap(visibility, rho, x);
    if (f < r.minimum) {
      r.minimum = f;
      r.argmin = x;
    }
    if (f < prev && r.monotone) {
      r.monotone = false;
      r.first_decrease = i;
    }
    prev = f;
  }
  r.pass = r.minimum >= rho / 2.0 - 1e-9 * visibility;
  return r;
}

struct ScanOptions {
  double visibility = 4.0;
  double rho = 0.5;
  std::size_t grid = 10000;
};

inline int cmd_scan_prop1(const ScanOptions& o, std::ostream& out) {
  const ScanResult r = scan_chord_gap(o.visibility, o.rho, o.grid);
  nlohmann::ordered_json j;
  j["V"] = o.visibility;
  j["rho"] = o.rho;
  j["grid"] = o.grid;
  j["minimum"] = r.minimum;
  j["argmin"] = r.argmin;
  j["bound"] = o.rho / 2.0;
  j["monotone"] = r.monotone;
  j["pass"] = r.pass;
  out << j.dump(2) << '\n';
  return r.pass && r.monotone ? kExitOk : kExitViolation;
}

}  // namespace neargather::cli
