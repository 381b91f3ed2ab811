#pragma once

// Trace records produced by the simulator and their JSON Lines encoding.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "neargather/geometry.hpp"

namespace neargather {

enum class TraceEvent { Look, ComputeEnd, MoveStart, MoveEnd, MoveInterrupt, Terminate };

inline std::string_view to_string(TraceEvent e) {
  switch (e) {
    case TraceEvent::Look: return "Look";
    case TraceEvent::ComputeEnd: return "ComputeEnd";
    case TraceEvent::MoveStart: return "MoveStart";
    case TraceEvent::MoveEnd: return "MoveEnd";
    case TraceEvent::MoveInterrupt: return "MoveInterrupt";
    case TraceEvent::Terminate: return "Terminate";
  }
  return "?";
}

class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline TraceEvent parse_trace_event(std::string_view name) {
  for (TraceEvent e : {TraceEvent::Look, TraceEvent::ComputeEnd, TraceEvent::MoveStart,
                       TraceEvent::MoveEnd, TraceEvent::MoveInterrupt, TraceEvent::Terminate}) {
    if (to_string(e) == name) return e;
  }
  throw TraceFormatError("unknown trace event '" + std::string(name) + "'");
}

struct TraceRecord {
  double t = 0.0;
  int robot = 0;
  TraceEvent event = TraceEvent::Look;
  Point2 pos;
  std::optional<Point2> dest;
  /// Smallest pairwise distance over the interval that ends at t; +inf with
  /// fewer than two robots.
  double min_pair_gap_since_last = std::numeric_limits<double>::infinity();

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

enum class RunStatus { AllTerminated, Gathered, MaxEvents, ScriptExhausted };

inline std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::AllTerminated: return "all_terminated";
    case RunStatus::Gathered: return "gathered";
    case RunStatus::MaxEvents: return "max_events";
    case RunStatus::ScriptExhausted: return "script_exhausted";
  }
  return "?";
}

struct Trace {
  std::vector<Point2> initial_positions;
  std::vector<TraceRecord> records;
  RunStatus status = RunStatus::MaxEvents;
};

namespace detail {

inline nlohmann::ordered_json point_json(Point2 p) { return nlohmann::ordered_json::array({p.x, p.y}); }

inline Point2 json_point(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw TraceFormatError(std::string("expected [x, y] for ") + what);
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

inline std::string to_json_line(const TraceRecord& r) {
  nlohmann::ordered_json j;
  j["t"] = r.t;
  j["robot"] = r.robot;
  j["event"] = std::string(to_string(r.event));
  j["pos"] = detail::point_json(r.pos);
  j["dest"] = r.dest ? detail::point_json(*r.dest) : nlohmann::ordered_json(nullptr);
  if (std::isfinite(r.min_pair_gap_since_last)) {
    j["minPairGapSinceLast"] = r.min_pair_gap_since_last;
  } else {
    j["minPairGapSinceLast"] = nullptr;
  }
  return j.dump();
}

inline TraceRecord parse_json_line(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw TraceFormatError(std::string("malformed trace line: ") + e.what());
  }
  if (!j.is_object()) throw TraceFormatError("trace line is not an object");
  for (const char* key : {"t", "robot", "event", "pos", "dest", "minPairGapSinceLast"}) {
    if (!j.contains(key)) throw TraceFormatError(std::string("trace line missing '") + key + "'");
  }
  TraceRecord r;
  if (!j["t"].is_number()) throw TraceFormatError("'t' must be a number");
  if (!j["robot"].is_number_integer()) throw TraceFormatError("'robot' must be an integer");
  if (!j["event"].is_string()) throw TraceFormatError("'event' must be a string");
  r.t = j["t"].get<double>();
  r.robot = j["robot"].get<int>();
  r.event = parse_trace_event(j["event"].get<std::string>());
  r.pos = detail::json_point(j["pos"], "pos");
  if (!j["dest"].is_null()) r.dest = detail::json_point(j["dest"], "dest");
  const auto& gap = j["minPairGapSinceLast"];
  if (gap.is_null()) {
    r.min_pair_gap_since_last = std::numeric_limits<double>::infinity();
  } else if (gap.is_number()) {
    r.min_pair_gap_since_last = gap.get<double>();
  } else {
    throw TraceFormatError("'minPairGapSinceLast' must be a number or null");
  }
  return r;
}

inline void write_jsonl(std::ostream& out, const std::vector<TraceRecord>& records) {
  for (const TraceRecord& r : records) out << to_json_line(r) << '\n';
}

inline std::vector<TraceRecord> read_jsonl(std::istream& in) {
  std::vector<TraceRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      records.push_back(parse_json_line(line));
    } catch (const TraceFormatError& e) {
      throw TraceFormatError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

/// Shortest decimal representation that round-trips.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace neargather
