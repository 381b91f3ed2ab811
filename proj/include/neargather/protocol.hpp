#pragma once

// Compute phase of the near-gathering protocol and its variants.
//
// Every function here is a pure function of a snapshot taken in the observer's
// own frame (observer at the origin) and the shared parameters.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "neargather/geometry.hpp"

namespace neargather {

enum class TieBreak { Horizontal, Vertical };
enum class AxisMode { TwoAxes, OneAxisRotated };

struct ProtocolParams {
  double visibility = 0.0;        // V
  double strong_threshold = 0.0;  // D = V - sigma
  double epsilon = 0.0;
  double rho = 0.0;            // min{V/4, V - D}
  double epsilon_prime = 0.0;  // min{epsilon, rho/2}
  TieBreak tie_break = TieBreak::Horizontal;
  AxisMode axis_mode = AxisMode::TwoAxes;
  ComputeRegions regions;
};

inline ProtocolParams derive_params(double visibility, double strong_threshold, double epsilon,
                                    TieBreak tie_break = TieBreak::Horizontal,
                                    AxisMode axis_mode = AxisMode::TwoAxes) {
  if (!(visibility > 0.0) || !std::isfinite(visibility)) {
    throw std::invalid_argument("derive_params: V must be positive and finite");
  }
  if (!(strong_threshold > 0.0) || !(strong_threshold < visibility)) {
    throw std::invalid_argument("derive_params: D must satisfy 0 < D < V");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("derive_params: epsilon must be positive");
  }
  ProtocolParams p;
  p.visibility = visibility;
  p.strong_threshold = strong_threshold;
  p.epsilon = epsilon;
  p.rho = std::min(visibility / 4.0, visibility - strong_threshold);
  p.epsilon_prime = std::min(epsilon, p.rho / 2.0);
  p.tie_break = tie_break;
  p.axis_mode = axis_mode;
  p.regions = make_regions(visibility, p.rho);
  return p;
}

/// Both |p - q|_2 <= V - rho/2 and |p - q|_inf <= V - rho, i.e. q - p ∈ R.
inline bool aw(Point2 p, Point2 q, const ProtocolParams& params) {
  return in_region(params.regions, Region::R, q - p);
}

struct Snapshot {
  std::vector<Point2> positions;
};

class InvalidSnapshot : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ComputeOutcome {
  enum class Kind { Terminate, Move };

  Kind kind = Kind::Terminate;
  Point2 dp;  // observer frame; meaningful only for Move

  static ComputeOutcome terminate() { return {Kind::Terminate, {}}; }
  static ComputeOutcome move(Point2 dp) { return {Kind::Move, dp}; }

  bool is_move() const { return kind == Kind::Move; }
  bool is_null_move() const { return kind == Kind::Move && dp == Point2{}; }
  friend bool operator==(const ComputeOutcome&, const ComputeOutcome&) = default;
};

/// Compute outcome together with the two components before the final
/// selection and halving. Used by property tests.
struct ComputeDetail {
  ComputeOutcome outcome;
  double raw_x = 0.0;
  double raw_y = 0.0;
};

namespace detail {

inline void validate_snapshot(const Snapshot& s, const ProtocolParams& params) {
  bool has_self = false;
  // Rotated snapshots may exceed V by rounding.
  const double limit = params.visibility * (1.0 + 1e-12);
  for (const Point2& p : s.positions) {
    if (!is_finite(p)) throw InvalidSnapshot("snapshot entry is not finite");
    if (p == Point2{}) has_self = true;
    if (norm2(p) > limit) throw InvalidSnapshot("snapshot entry beyond the visibility radius");
  }
  if (!has_self) throw InvalidSnapshot("snapshot does not contain the observer at the origin");
}

inline bool all_within(const Snapshot& s, double bound) {
  const auto& ps = s.positions;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (std::size_t j = i + 1; j < ps.size(); ++j) {
      if (dist2(ps[i], ps[j]) > bound) return false;
    }
  }
  return true;
}

}  // namespace detail

inline ComputeDetail compute_detailed(const Snapshot& snapshot, const ProtocolParams& params) {
  detail::validate_snapshot(snapshot, params);
  if (detail::all_within(snapshot, params.epsilon_prime)) {
    return {ComputeOutcome::terminate(), 0.0, 0.0};
  }

  const ComputeRegions& g = params.regions;
  constexpr double inf = std::numeric_limits<double>::infinity();
  double min_se_x = inf;
  double min_nw_y = inf;
  double max_x = -inf;
  double max_y = -inf;
  for (const Point2& p : snapshot.positions) {
    if (in_region(g, Region::Q2, p)) min_se_x = std::min(min_se_x, p.x);
    if (in_region(g, Region::Q1, p)) min_nw_y = std::min(min_nw_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  double dx = std::min({min_se_x, max_x, params.rho / 2.0});
  double dy = std::min({min_nw_y, max_y, params.rho / 2.0});

  for (const Point2& p : snapshot.positions) {
    const bool in_r = in_region(g, Region::R, p);
    if (in_region(g, Region::H1, p)) {
      dx = 0.0;
    } else if (in_r) {
      const Point2 s1 = leftmost_in_r_minus_h1(g, p.y);
      dx = std::min(dx, std::max(0.0, p.x - s1.x));
    }
    if (in_region(g, Region::H2, p)) {
      dy = 0.0;
    } else if (in_r) {
      const Point2 s2 = bottommost_in_r_minus_h2(g, p.x);
      dy = std::min(dy, std::max(0.0, p.y - s2.y));
    }
  }

  const bool horizontal =
      dx > dy || (dx == dy && params.tie_break == TieBreak::Horizontal);
  const Point2 dp = horizontal ? Point2{dx / 2.0, 0.0} : Point2{0.0, dy / 2.0};
  return {ComputeOutcome::move(dp), dx, dy};
}

inline ComputeOutcome compute(const Snapshot& snapshot, const ProtocolParams& params) {
  return compute_detailed(snapshot, params).outcome;
}

inline constexpr double kHalfSqrt2 = 0.70710678118654752440;

constexpr Point2 rotate_clockwise_45(Point2 p) {
  return {kHalfSqrt2 * (p.x + p.y), kHalfSqrt2 * (p.y - p.x)};
}

constexpr Point2 rotate_counterclockwise_45(Point2 p) {
  return {kHalfSqrt2 * (p.x - p.y), kHalfSqrt2 * (p.x + p.y)};
}

/// For robots that agree on one axis only: run compute in a frame rotated
/// clockwise by 45 degrees and rotate the destination back.
inline ComputeOutcome compute_one_axis(const Snapshot& snapshot, const ProtocolParams& params) {
  Snapshot rotated;
  rotated.positions.reserve(snapshot.positions.size());
  for (const Point2& p : snapshot.positions) rotated.positions.push_back(rotate_clockwise_45(p));
  ComputeOutcome out = compute(rotated, params);
  if (out.is_move()) out.dp = rotate_counterclockwise_45(out.dp);
  return out;
}

/// Gathering variant: where compute would terminate, move to the top-right
/// corner of the visible set instead.
inline ComputeOutcome gathering_compute(const Snapshot& snapshot, const ProtocolParams& params) {
  ComputeOutcome out = compute(snapshot, params);
  if (out.is_move()) return out;
  Point2 corner{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Point2& p : snapshot.positions) {
    corner.x = std::max(corner.x, p.x);
    corner.y = std::max(corner.y, p.y);
  }
  return ComputeOutcome::move(corner);
}

/// Half-way-to-centroid baseline: dp = centroid / 2. Not collision-free.
inline Point2 centroid_baseline(const Snapshot& snapshot) {
  if (snapshot.positions.empty()) return {};
  Point2 sum;
  for (const Point2& p : snapshot.positions) sum = sum + p;
  const double n = static_cast<double>(snapshot.positions.size());
  return {sum.x / n / 2.0, sum.y / n / 2.0};
}

enum class ProtocolKind { NearGather, NearGatherOneAxis, Gathering, Centroid };

using ProtocolFn = std::function<ComputeOutcome(const Snapshot&, const ProtocolParams&)>;

inline ProtocolFn protocol_function(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::NearGather: return compute;
    case ProtocolKind::NearGatherOneAxis: return compute_one_axis;
    case ProtocolKind::Gathering: return gathering_compute;
    case ProtocolKind::Centroid:
      return [](const Snapshot& s, const ProtocolParams&) {
        return ComputeOutcome::move(centroid_baseline(s));
      };
  }
  throw std::invalid_argument("unknown protocol");
}

inline std::string_view to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::NearGather: return "neargather";
    case ProtocolKind::NearGatherOneAxis: return "neargather-oneaxis";
    case ProtocolKind::Gathering: return "gathering";
    case ProtocolKind::Centroid: return "centroid";
  }
  return "?";
}

inline ProtocolKind parse_protocol(std::string_view name) {
  for (ProtocolKind k : {ProtocolKind::NearGather, ProtocolKind::NearGatherOneAxis,
                         ProtocolKind::Gathering, ProtocolKind::Centroid}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown protocol '" + std::string(name) + "'");
}

}  // namespace neargather
