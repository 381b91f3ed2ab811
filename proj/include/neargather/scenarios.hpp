#pragma once

// Initial configurations: random connected swarms, a few named layouts and
// the JSON scenario file format.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "neargather/analysis.hpp"
#include "neargather/geometry.hpp"
#include "neargather/simulator.hpp"

namespace neargather {

class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Scenario {
  std::string name;
  double visibility = 0.0;
  double strong_threshold = 0.0;
  double epsilon = 0.0;
  std::vector<Point2> positions;
  std::optional<std::uint64_t> seed;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Throws ScenarioError unless the positions are finite, separated by at
/// least min_sep and connected at the strong threshold, and 0 < D < V.
inline void certify(const Scenario& s, double min_sep = 0.0) {
  if (!(s.visibility > 0.0) || !std::isfinite(s.visibility)) throw ScenarioError("scenario: V must be positive");
  if (!(s.strong_threshold > 0.0) || !(s.strong_threshold < s.visibility)) {
    throw ScenarioError("scenario: D must satisfy 0 < D < V");
  }
  if (!(s.epsilon > 0.0) || !std::isfinite(s.epsilon)) throw ScenarioError("scenario: epsilon must be positive");
  if (s.positions.empty()) throw ScenarioError("scenario: no robots");
  for (std::size_t i = 0; i < s.positions.size(); ++i) {
    if (!is_finite(s.positions[i])) throw ScenarioError("scenario: non-finite position");
    for (std::size_t j = i + 1; j < s.positions.size(); ++j) {
      const double d = dist2(s.positions[i], s.positions[j]);
      if (d == 0.0) {
        throw ScenarioError("scenario: robots " + std::to_string(i) + " and " + std::to_string(j) +
                            " share a position");
      }
      if (d < min_sep) throw ScenarioError("scenario: robots closer than the minimum separation");
    }
  }
  if (!is_connected(build_graph(s.positions, s.strong_threshold, GraphLabel::J))) {
    throw ScenarioError(
        "scenario: strong distance graph J is disconnected; initial configurations must be connected at "
        "threshold D");
  }
}

/// Cluster growth: each new point is uniform in the disk of radius D around a
/// uniformly chosen earlier point and is rejected if closer than min_sep to
/// any point.
inline Scenario generate_connected(std::size_t n, double visibility, double strong_threshold, double min_sep,
                                   std::uint64_t seed, double epsilon = 0.1, int max_attempts = 100000) {
  if (n < 1) throw ScenarioError("generate: n must be at least 1");
  if (!(strong_threshold < visibility)) throw ScenarioError("generate: D must be smaller than V");
  if (!(min_sep > 0.0) || !(min_sep < strong_threshold)) throw ScenarioError("generate: need 0 < minSep < D");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Scenario s{"random-" + std::to_string(n) + "-" + std::to_string(seed), visibility, strong_threshold, epsilon, {{0.0, 0.0}},
             seed};
  int attempts = 0;
  while (s.positions.size() < n) {
    if (++attempts > max_attempts) throw ScenarioError("generate: placement failed; parameters too crowded");
    const auto anchor = std::uniform_int_distribution<std::size_t>(0, s.positions.size() - 1)(rng);
    const double r = strong_threshold * std::sqrt(unit(rng));
    const double a = 2.0 * std::numbers::pi * unit(rng);
    const Point2 p = s.positions[anchor] + Point2{r * std::cos(a), r * std::sin(a)};
    bool ok = dist2(s.positions[anchor], p) <= strong_threshold;
    for (const Point2& q : s.positions) ok = ok && dist2(p, q) >= min_sep;
    if (ok) s.positions.push_back(p);
  }
  certify(s, min_sep);
  return s;
}

enum class CannedKind { CentroidPair, VerticalLine, RegularPolygon, Grid };

/// Named layouts. `count` is n for the line and polygon and k for a k x k
/// grid; `radius` is the polygon circumradius. Line and grid spacing is D.
inline Scenario canned_scenario(CannedKind kind, std::size_t count = 0, double radius = 1.0, double visibility = 4.0,
                                double strong_threshold = 3.5, double epsilon = 0.1) {
  Scenario s;
  s.visibility = visibility;
  s.strong_threshold = strong_threshold;
  s.epsilon = epsilon;
  switch (kind) {
    case CannedKind::CentroidPair:
      s.name = "centroid-pair";
      s.visibility = 4000.0;
      s.strong_threshold = 3900.0;
      s.epsilon = 1.0;
      s.positions = {{0.0, 0.0}, {3124.0, 0.0}};
      break;
    case CannedKind::VerticalLine:
      if (count < 1) throw ScenarioError("vertical line needs n >= 1");
      s.name = "vertical-line-" + std::to_string(count);
      for (std::size_t i = 0; i < count; ++i) s.positions.push_back({0.0, static_cast<double>(i) * strong_threshold});
      break;
    case CannedKind::RegularPolygon:
      if (count < 3) throw ScenarioError("regular polygon needs n >= 3");
      if (!(radius > 0.0)) throw ScenarioError("regular polygon needs a positive radius");
      s.name = "polygon-" + std::to_string(count);
      for (std::size_t i = 0; i < count; ++i) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
        s.positions.push_back({radius * std::cos(a), radius * std::sin(a)});
      }
      break;
    case CannedKind::Grid:
      if (count < 1) throw ScenarioError("grid needs k >= 1");
      s.name = "grid-" + std::to_string(count);
      for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = 0; j < count; ++j) {
          s.positions.push_back({static_cast<double>(i) * strong_threshold, static_cast<double>(j) * strong_threshold});
        }
      }
      break;
  }
  certify(s);
  return s;
}

inline CannedKind parse_canned_kind(std::string_view name) {
  if (name == "centroid-pair") return CannedKind::CentroidPair;
  if (name == "vertical-line") return CannedKind::VerticalLine;
  if (name == "polygon") return CannedKind::RegularPolygon;
  if (name == "grid") return CannedKind::Grid;
  throw ScenarioError("unknown canned scenario '" + std::string(name) + "'");
}

/// Schedule that replays the centroid counterexample on CentroidPair: r (robot
/// 0) Looks first and is held at (52, 0) while s (robot 1) completes five
/// full cycles, then r finishes its move.
inline std::vector<ScriptedCycle> centroid_counterexample_script() {
  std::vector<ScriptedCycle> script;
  ScriptedCycle r;
  r.robot = 0;
  r.look_time = 0.0;
  r.compute_duration = 0.0;
  r.move_duration = 2.0;
  r.pause_at = Point2{52.0, 0.0};
  r.pause_duration = 100.0;
  script.push_back(r);
  for (int k = 0; k < 5; ++k) {
    ScriptedCycle s;
    s.robot = 1;
    s.look_time = 2.0 + 3.0 * k;
    s.compute_duration = 1.0;
    s.move_duration = 1.0;
    script.push_back(s);
  }
  return script;
}

inline std::string save_scenario(const Scenario& s) {
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["V"] = s.visibility;
  j["D"] = s.strong_threshold;
  j["epsilon"] = s.epsilon;
  if (s.seed) j["seed"] = *s.seed;
  nlohmann::ordered_json pts = nlohmann::ordered_json::array();
  for (const Point2& p : s.positions) pts.push_back({p.x, p.y});
  j["positions"] = std::move(pts);
  return j.dump(2) + "\n";
}

inline Scenario load_scenario(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(std::string("scenario file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ScenarioError("scenario file must hold a JSON object");
  for (const char* key : {"name", "V", "D", "epsilon", "positions"}) {
    if (!j.contains(key)) throw ScenarioError(std::string("scenario file missing '") + key + "'");
  }
  if (!j["name"].is_string()) throw ScenarioError("scenario 'name' must be a string");
  for (const char* key : {"V", "D", "epsilon"}) {
    if (!j[key].is_number()) throw ScenarioError(std::string("scenario '") + key + "' must be a number");
  }
  if (!j["positions"].is_array()) throw ScenarioError("scenario 'positions' must be an array");
  Scenario s;
  s.name = j["name"].get<std::string>();
  s.visibility = j["V"].get<double>();
  s.strong_threshold = j["D"].get<double>();
  s.epsilon = j["epsilon"].get<double>();
  if (j.contains("seed") && !j["seed"].is_null()) {
    if (!j["seed"].is_number_unsigned()) throw ScenarioError("scenario 'seed' must be a non-negative integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  for (const auto& p : j["positions"]) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ScenarioError("scenario positions must be [x, y] pairs");
    }
    s.positions.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  certify(s);
  return s;
}

}  // namespace neargather
