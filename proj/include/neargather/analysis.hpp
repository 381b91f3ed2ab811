#pragma once

// Omniscient checkers: distance graphs, the mutual-awareness ledger and a
// replay-based audit of complete traces.
//
// The audit reconstructs every robot's trajectory from the trace alone (each
// robot moves linearly between two of its own consecutive records) and never
// looks at simulator internals, so a trace read back from disk audits the
// same as the one in memory.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "neargather/geometry.hpp"
#include "neargather/protocol.hpp"
#include "neargather/simulator.hpp"
#include "neargather/trace.hpp"

namespace neargather {

// ---------------------------------------------------------------------------
// Distance graphs
// ---------------------------------------------------------------------------

enum class GraphLabel { J, G, Visibility };

struct DistanceGraph {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // i < j, lexicographic
  double threshold = 0.0;
  GraphLabel label = GraphLabel::Visibility;
};

/// Edge {i, j} iff dist2 <= threshold (closed ball).
inline DistanceGraph build_graph(const std::vector<Point2>& positions, double threshold, GraphLabel label) {
  DistanceGraph g{positions.size(), {}, threshold, label};
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      if (dist2(positions[i], positions[j]) <= threshold) g.edges.emplace_back(i, j);
    }
  }
  return g;
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), components_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t i) {
    while (parent_[i] != i) i = parent_[i] = parent_[parent_[i]];
    return i;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    parent_[std::max(a, b)] = std::min(a, b);
    --components_;
  }

  std::size_t components() const { return components_; }

 private:
  std::vector<std::size_t> parent_;
  std::size_t components_;
};

inline bool is_connected(const DistanceGraph& g) {
  if (g.n <= 1) return true;
  DisjointSets ds(g.n);
  for (const auto& [a, b] : g.edges) ds.unite(a, b);
  return ds.components() == 1;
}

inline bool threshold_graph_connected(const std::vector<Point2>& positions, double threshold) {
  if (positions.size() <= 1) return true;
  DisjointSets ds(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      if (dist2(positions[i], positions[j]) <= threshold) ds.unite(i, j);
    }
  }
  return ds.components() == 1;
}

class AssumptionViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Refuses configurations whose initial strong distance graph is disconnected.
inline void require_strong_graph_connected(const std::vector<Point2>& positions, double strong_threshold) {
  if (!threshold_graph_connected(positions, strong_threshold)) {
    throw AssumptionViolation(
        "initial strong distance graph J is disconnected: the protocol requires every initial "
        "configuration to be connected at threshold D");
  }
}

inline bool move_space_contains(Point2 owner, Point2 p) { return p.x >= owner.x && p.y >= owner.y; }

/// Componentwise maximum of the initial positions.
inline Point2 ell(const std::vector<Point2>& positions) {
  if (positions.empty()) throw std::invalid_argument("ell: empty configuration");
  Point2 out = positions.front();
  for (const Point2& p : positions) {
    out.x = std::max(out.x, p.x);
    out.y = std::max(out.y, p.y);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

/// Maps world vectors into the frame the protocol reasons in.
struct ProtocolFrame {
  bool rotated = false;
  Point2 operator()(Point2 p) const { return rotated ? rotate_clockwise_45(p) : p; }
};

inline ProtocolFrame frame_for(ProtocolKind kind, const ProtocolParams& params) {
  return {kind == ProtocolKind::NearGatherOneAxis || params.axis_mode == AxisMode::OneAxisRotated};
}

// ---------------------------------------------------------------------------
// Awareness ledger
// ---------------------------------------------------------------------------

/// flag(r, s): AW held between r and s at r's most recent Look. Before any
/// Look the flags reflect the initial positions.
class AwarenessLedger {
 public:
  AwarenessLedger(const std::vector<Point2>& initial, const ProtocolParams& params, ProtocolFrame frame = {})
      : n_(initial.size()), params_(params), frame_(frame), flags_(n_ * n_, 0) {
    for (std::size_t i = 0; i < n_; ++i) recompute(i, initial);
  }

  /// Robot `robot` Looked while the world was at `positions`.
  void update(std::size_t robot, const std::vector<Point2>& positions) { recompute(robot, positions); }

  bool flag(std::size_t r, std::size_t s) const { return flags_[r * n_ + s] != 0; }
  bool mutually_aware(std::size_t r, std::size_t s) const { return r != s && flag(r, s) && flag(s, r); }
  std::size_t size() const { return n_; }

  DistanceGraph awareness_graph() const {
    DistanceGraph g{n_, {}, 0.0, GraphLabel::G};
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) {
        if (mutually_aware(i, j)) g.edges.emplace_back(i, j);
      }
    }
    return g;
  }

 private:
  void recompute(std::size_t r, const std::vector<Point2>& positions) {
    for (std::size_t s = 0; s < n_; ++s) {
      flags_[r * n_ + s] = in_region(params_.regions, Region::R, frame_(positions[s] - positions[r])) ? 1 : 0;
    }
  }

  std::size_t n_;
  ProtocolParams params_;
  ProtocolFrame frame_;
  std::vector<char> flags_;
};

// ---------------------------------------------------------------------------
// Small geometry helpers for summary metrics
// ---------------------------------------------------------------------------

struct Circle {
  Point2 center;
  double radius = 0.0;
};

namespace detail {

inline bool circle_contains(const Circle& c, Point2 p) {
  return dist2(c.center, p) <= c.radius * (1.0 + 1e-12) + 1e-300;
}

inline Circle circle_two(Point2 a, Point2 b) { return {0.5 * (a + b), dist2(a, b) / 2.0}; }

inline Circle circle_three(Point2 a, Point2 b, Point2 c) {
  const Point2 ab = b - a;
  const Point2 ac = c - a;
  const double d = 2.0 * (ab.x * ac.y - ab.y * ac.x);
  if (d == 0.0) {
    Circle best = circle_two(a, b);
    for (const Circle& cand : {circle_two(a, c), circle_two(b, c)}) {
      if (cand.radius > best.radius) best = cand;
    }
    return best;
  }
  const double ab2 = dot(ab, ab);
  const double ac2 = dot(ac, ac);
  const Point2 off{(ac.y * ab2 - ab.y * ac2) / d, (ab.x * ac2 - ac.x * ab2) / d};
  return {a + off, norm2(off)};
}

inline double cross(Point2 o, Point2 a, Point2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

inline double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return dist2(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return dist2(p, a + t * ab);
}

}  // namespace detail

/// Smallest enclosing circle (incremental, deterministic order).
inline Circle min_enclosing_circle(const std::vector<Point2>& pts) {
  if (pts.empty()) return {};
  Circle c{pts[0], 0.0};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (detail::circle_contains(c, pts[i])) continue;
    c = {pts[i], 0.0};
    for (std::size_t j = 0; j < i; ++j) {
      if (detail::circle_contains(c, pts[j])) continue;
      c = detail::circle_two(pts[i], pts[j]);
      for (std::size_t k = 0; k < j; ++k) {
        if (!detail::circle_contains(c, pts[k])) c = detail::circle_three(pts[i], pts[j], pts[k]);
      }
    }
  }
  return c;
}

inline std::vector<Point2> convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && detail::cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && detail::cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

/// Distance from p to the convex hull of pts (0 when inside).
inline double distance_to_hull(const std::vector<Point2>& pts, Point2 p) {
  const std::vector<Point2> hull = convex_hull(pts);
  if (hull.empty()) return std::numeric_limits<double>::infinity();
  if (hull.size() == 1) return dist2(hull[0], p);
  bool inside = hull.size() >= 3;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point2 a = hull[i];
    const Point2 b = hull[(i + 1) % hull.size()];
    if (detail::cross(a, b, p) < 0) inside = false;
    best = std::min(best, detail::point_segment_distance(p, a, b));
    if (hull.size() == 2) break;
  }
  return inside ? 0.0 : best;
}

inline double diameter(const std::vector<Point2>& pts) {
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, dist2(pts[i], pts[j]));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Trace replay
// ---------------------------------------------------------------------------

/// Walks a trace one distinct event time at a time and reconstructs the
/// positions of all robots at that time.
class TraceReplay {
 public:
  TraceReplay(const std::vector<TraceRecord>& records, const std::vector<Point2>& initial)
      : records_(&records), last_pos_(initial), last_t_(initial.size(), 0.0), per_robot_(initial.size()),
        cursor_(initial.size(), 0), positions_(initial) {
    double prev = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const TraceRecord& r = records[i];
      if (r.robot < 0 || static_cast<std::size_t>(r.robot) >= initial.size()) {
        throw TraceFormatError("record " + std::to_string(i) + " references unknown robot");
      }
      if (!(r.t >= prev) || !std::isfinite(r.t)) {
        throw TraceFormatError("record " + std::to_string(i) + " is out of time order");
      }
      if (!is_finite(r.pos)) throw TraceFormatError("record " + std::to_string(i) + " has a non-finite position");
      prev = r.t;
      per_robot_[static_cast<std::size_t>(r.robot)].push_back(i);
    }
  }

  bool done() const { return next_ >= records_->size(); }

  /// Moves to the next event time. Positions are evaluated before any of
  /// the records at that time are consumed.
  void advance() {
    begin_ = next_;
    time_ = (*records_)[begin_].t;
    end_ = begin_;
    while (end_ < records_->size() && (*records_)[end_].t == time_) ++end_;
    next_ = end_;
    previous_ = positions_;
    for (std::size_t k = 0; k < positions_.size(); ++k) positions_[k] = position_at(k, time_);
  }

  /// Marks record i as consumed (call for each i in [begin, end) in order).
  void consume(std::size_t i) {
    const TraceRecord& r = (*records_)[i];
    const auto k = static_cast<std::size_t>(r.robot);
    last_pos_[k] = r.pos;
    last_t_[k] = r.t;
    ++cursor_[k];
    positions_[k] = r.pos;
  }

  double time() const { return time_; }
  std::size_t begin() const { return begin_; }
  std::size_t end() const { return end_; }
  const std::vector<Point2>& positions() const { return positions_; }
  const std::vector<Point2>& previous_positions() const { return previous_; }
  Point2 last_recorded(std::size_t robot) const { return last_pos_[robot]; }

 private:
  Point2 position_at(std::size_t k, double t) const {
    const auto& idx = per_robot_[k];
    if (cursor_[k] >= idx.size()) return last_pos_[k];
    const TraceRecord& nxt = (*records_)[idx[cursor_[k]]];
    if (nxt.t <= t) return nxt.pos;
    const double span = nxt.t - last_t_[k];
    if (span <= 0.0) return nxt.pos;
    return lerp(last_pos_[k], nxt.pos, (t - last_t_[k]) / span);
  }

  const std::vector<TraceRecord>* records_;
  std::vector<Point2> last_pos_;
  std::vector<double> last_t_;
  std::vector<std::vector<std::size_t>> per_robot_;
  std::vector<std::size_t> cursor_;
  std::vector<Point2> positions_;
  std::vector<Point2> previous_;
  std::size_t begin_ = 0, end_ = 0, next_ = 0;
  double time_ = 0.0;
};

// ---------------------------------------------------------------------------
// Audit
// ---------------------------------------------------------------------------

struct CheckResult {
  std::string name;
  bool applicable = true;
  bool pass = true;
  std::optional<std::size_t> witness_event;
  std::string detail;
};

struct AuditReport {
  std::vector<CheckResult> checks;
  RunStatus status = RunStatus::MaxEvents;
  std::size_t event_count = 0;
  std::size_t robot_count = 0;
  double final_diameter = 0.0;
  double final_enclosing_radius = 0.0;
  double hull_distance_to_ell = 0.0;
  double min_gap = std::numeric_limits<double>::infinity();
  double min_gap_time = 0.0;
  Point2 min_gap_location;
  std::vector<Point2> final_positions;

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.applicable || c.pass; });
  }

  const CheckResult& check(const std::string& name) const {
    for (const CheckResult& c : checks) {
      if (c.name == name) return c;
    }
    throw std::out_of_range("no audit check named " + name);
  }

  std::vector<std::string> failing() const {
    std::vector<std::string> out;
    for (const CheckResult& c : checks) {
      if (c.applicable && !c.pass) out.push_back(c.name);
    }
    return out;
  }

  friend bool operator==(const AuditReport&, const AuditReport&) = default;
};

inline bool operator==(const CheckResult& a, const CheckResult& b) {
  return a.name == b.name && a.applicable == b.applicable && a.pass == b.pass &&
         a.witness_event == b.witness_event && a.detail == b.detail;
}

struct AuditOptions {
  ProtocolParams params;
  ProtocolKind protocol = ProtocolKind::NearGather;
  double delta = 0.0;
  double gathering_floor = 0.0;
};

inline AuditOptions audit_options(const SimConfig& c) { return {c.params, c.protocol, c.delta, c.gathering_floor}; }

namespace detail {

class CheckSet {
 public:
  CheckResult& add(std::string name, bool applicable = true) {
    checks_.push_back({std::move(name), applicable, true, std::nullopt, {}});
    return checks_.back();
  }

  static void fail(CheckResult& c, std::size_t event, std::string detail) {
    if (!c.applicable || !c.pass) return;
    c.pass = false;
    c.witness_event = event;
    c.detail = std::move(detail);
  }

  std::vector<CheckResult> take() { return {checks_.begin(), checks_.end()}; }

 private:
  // Callers hold references to earlier checks while adding new ones.
  std::deque<CheckResult> checks_;
};

inline std::string fmt_point(Point2 p) { return "(" + format_double(p.x) + ", " + format_double(p.y) + ")"; }

}  // namespace detail

/// Audits a complete trace against every invariant the protocol guarantees.
/// Throws AssumptionViolation if the initial configuration is outside the
/// protocol's preconditions and TraceFormatError if the trace is malformed.
inline AuditReport audit_trace(const std::vector<TraceRecord>& records, const std::vector<Point2>& initial,
                               const AuditOptions& opt) {
  const std::size_t n = initial.size();
  if (n == 0) throw std::invalid_argument("audit_trace: no robots");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (initial[i] == initial[j]) throw AssumptionViolation("initial positions are not pairwise distinct");
    }
  }
  require_strong_graph_connected(initial, opt.params.strong_threshold);

  const ProtocolParams& params = opt.params;
  const double v = params.visibility;
  const double tau = params.regions.tolerance;
  const double fp = 1e-12 * v;
  const double g_threshold = v - params.rho / 2.0;
  const ProtocolFrame frame = frame_for(opt.protocol, params);
  const bool gathering = opt.protocol == ProtocolKind::Gathering;
  const bool centroid = opt.protocol == ProtocolKind::Centroid;
  const bool neargather = !gathering && !centroid;

  detail::CheckSet set;
  CheckResult& c_collision = set.add("collision_free", !gathering);
  CheckResult& c_motion = set.add("motion_valid");
  CheckResult& c_delta = set.add("delta_contract");
  CheckResult& c_g = set.add("intermediate_graph_connected");
  CheckResult& c_j = set.add("initial_strong_graph_in_awareness");
  CheckResult& c_mono_aw = set.add("awareness_monotone");
  CheckResult& c_aw_conn = set.add("awareness_connected");
  CheckResult& c_aw_in_g = set.add("awareness_within_intermediate_graph");
  CheckResult& c_coords = set.add("coordinates_monotone");
  CheckResult& c_axis = set.add("moves_axis_aligned", !gathering);
  CheckResult& c_len = set.add("move_length_bounded", !gathering);
  CheckResult& c_ext = set.add("extreme_coordinates_constant");
  CheckResult& c_box = set.add("final_within_ell_box");
  CheckResult& c_term = set.add("termination_saw_all", !gathering);
  CheckResult& c_ng = set.add("near_gathering", neargather || centroid);
  CheckResult& c_gath = set.add("gathered", gathering);

  AuditReport report;
  report.robot_count = n;
  report.event_count = records.size();

  // Initial state.
  AwarenessLedger ledger(initial, params, frame);
  std::vector<char> mutual(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) mutual[i * n + j] = ledger.mutually_aware(i, j) ? 1 : 0;
  }
  for (const auto& [a, b] : build_graph(initial, params.strong_threshold, GraphLabel::J).edges) {
    if (!ledger.mutually_aware(a, b)) {
      detail::CheckSet::fail(c_j, 0,
                             "robots " + std::to_string(a) + " and " + std::to_string(b) +
                                 " are within D but not mutually aware at t = 0");
    }
  }
  if (!is_connected(ledger.awareness_graph())) detail::CheckSet::fail(c_aw_conn, 0, "awareness graph disconnected at t = 0");
  if (!threshold_graph_connected(initial, g_threshold)) detail::CheckSet::fail(c_g, 0, "G disconnected at t = 0");

  Point2 extreme{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Point2& p : initial) {
    extreme.x = std::max(extreme.x, frame(p).x);
    extreme.y = std::max(extreme.y, frame(p).y);
  }

  // Per-robot cycle bookkeeping.
  enum class Expect { Look, ComputeOutcome, MoveStart, Landing, AfterInterrupt, Done };
  std::vector<Expect> expect(n, Expect::Look);
  std::vector<Point2> look_pos(initial);
  std::vector<char> has_looked(n, 0);
  std::vector<std::size_t> visible_at_look(n, 0);
  std::vector<Point2> dest(n);
  std::vector<double> planned(n, 0.0);
  std::vector<char> moved_in_cycle(n, 0);

  auto close_cycle = [&](std::size_t k, Point2 pos, std::size_t event, bool interrupted) {
    if (!has_looked[k]) return;
    const Point2 disp = frame(pos - look_pos[k]);
    if (std::min(std::abs(disp.x), std::abs(disp.y)) > fp) {
      detail::CheckSet::fail(c_axis, event, "robot " + std::to_string(k) + " moved diagonally by " + detail::fmt_point(disp));
    }
    if (norm2(disp) > params.rho / 4.0 + tau) {
      detail::CheckSet::fail(c_len, event,
                             "robot " + std::to_string(k) + " moved " + format_double(norm2(disp)) + " > rho/4");
    }
    if (interrupted) {
      const double travelled = dist2(look_pos[k], pos);
      if (planned[k] <= opt.delta || travelled + fp < std::min(opt.delta, planned[k])) {
        detail::CheckSet::fail(c_delta, event,
                               "robot " + std::to_string(k) + " interrupted after " + format_double(travelled));
      }
    }
  };

  TraceReplay replay(records, initial);
  std::vector<Point2> frame_pos(n);
  while (!replay.done()) {
    replay.advance();
    const std::vector<Point2>& prev = replay.previous_positions();
    const std::vector<Point2> now_pos = replay.positions();
    const std::size_t first = replay.begin();

    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const ClosestApproach ca = interval_gap(prev[i], now_pos[i], prev[j], now_pos[j]);
        if (ca.distance < report.min_gap) {
          report.min_gap = ca.distance;
          const Point2 a = lerp(prev[i], now_pos[i], ca.time);
          const Point2 b = lerp(prev[j], now_pos[j], ca.time);
          report.min_gap_location = 0.5 * (a + b);
          report.min_gap_time = replay.time();
          if (ca.distance <= 0.0) {
            detail::CheckSet::fail(c_collision, first,
                                   "robots " + std::to_string(i) + " and " + std::to_string(j) + " collide at " +
                                       detail::fmt_point(report.min_gap_location));
          }
        }
      }
    }

    bool looked = false;
    for (std::size_t idx = replay.begin(); idx < replay.end(); ++idx) {
      const TraceRecord& rec = records[idx];
      const auto k = static_cast<std::size_t>(rec.robot);
      const Point2 before = replay.last_recorded(k);
      if (!(rec.pos == now_pos[k])) {
        detail::CheckSet::fail(c_motion, idx, "robot " + std::to_string(k) + " jumps to " + detail::fmt_point(rec.pos));
      }
      const Point2 step = frame(rec.pos - before);
      if (step.x < -fp || step.y < -fp) {
        detail::CheckSet::fail(c_coords, idx,
                               "robot " + std::to_string(k) + " moves backwards by " + detail::fmt_point(step));
      }
      const auto bad_sequence = [&] {
        throw TraceFormatError("record " + std::to_string(idx) + ": unexpected " + std::string(to_string(rec.event)) +
                               " for robot " + std::to_string(k));
      };
      switch (rec.event) {
        case TraceEvent::Look:
          if (expect[k] != Expect::Look && expect[k] != Expect::AfterInterrupt) bad_sequence();
          close_cycle(k, rec.pos, idx, expect[k] == Expect::AfterInterrupt);
          if (!(rec.pos == before)) detail::CheckSet::fail(c_motion, idx, "robot " + std::to_string(k) + " moved while idle");
          ledger.update(k, now_pos);
          looked = true;
          has_looked[k] = 1;
          look_pos[k] = rec.pos;
          visible_at_look[k] = 0;
          for (std::size_t s = 0; s < n; ++s) {
            if (norm2(now_pos[s] - now_pos[k]) <= v) ++visible_at_look[k];
          }
          moved_in_cycle[k] = 0;
          expect[k] = Expect::ComputeOutcome;
          break;
        case TraceEvent::Terminate:
          if (expect[k] != Expect::ComputeOutcome) bad_sequence();
          if (visible_at_look[k] != n) {
            detail::CheckSet::fail(c_term, idx,
                                   "robot " + std::to_string(k) + " terminated after seeing " +
                                       std::to_string(visible_at_look[k]) + " of " + std::to_string(n) + " robots");
          }
          expect[k] = Expect::Done;
          break;
        case TraceEvent::ComputeEnd:
          if (expect[k] != Expect::ComputeOutcome || !rec.dest) bad_sequence();
          dest[k] = *rec.dest;
          planned[k] = dist2(rec.pos, dest[k]);
          expect[k] = dest[k] == rec.pos ? Expect::Look : Expect::MoveStart;
          break;
        case TraceEvent::MoveStart:
          if (expect[k] != Expect::MoveStart && expect[k] != Expect::AfterInterrupt) bad_sequence();
          if (!rec.dest || !(*rec.dest == dest[k])) {
            detail::CheckSet::fail(c_motion, idx, "robot " + std::to_string(k) + " changed destination mid-cycle");
          }
          expect[k] = Expect::Landing;
          break;
        case TraceEvent::MoveEnd:
          if (expect[k] != Expect::Landing) bad_sequence();
          if (!(rec.pos == dest[k])) {
            detail::CheckSet::fail(c_motion, idx, "robot " + std::to_string(k) + " MoveEnd away from its destination");
          }
          moved_in_cycle[k] = 1;
          expect[k] = Expect::Look;
          break;
        case TraceEvent::MoveInterrupt: {
          if (expect[k] != Expect::Landing) bad_sequence();
          const double along = dist2(look_pos[k], rec.pos) + dist2(rec.pos, dest[k]);
          if (std::abs(along - planned[k]) > fp) {
            detail::CheckSet::fail(c_motion, idx,
                                   "robot " + std::to_string(k) + " interrupted off its segment at " + detail::fmt_point(rec.pos));
          }
          moved_in_cycle[k] = 1;
          expect[k] = Expect::AfterInterrupt;
          break;
        }
      }
      replay.consume(idx);
    }

    // Event-time graph checks.
    const std::vector<Point2>& pos = replay.positions();
    if (looked) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const bool m = ledger.mutually_aware(i, j);
          if (mutual[i * n + j] && !m) {
            detail::CheckSet::fail(c_mono_aw, first,
                                   "robots " + std::to_string(i) + " and " + std::to_string(j) + " lost mutual awareness");
          }
          mutual[i * n + j] = mutual[j * n + i] = m ? 1 : 0;
        }
      }
    }
    bool aware_in_g = true;
    DisjointSets aware_sets(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!mutual[i * n + j]) continue;
        aware_sets.unite(i, j);
        if (dist2(pos[i], pos[j]) > g_threshold) {
          aware_in_g = false;
          detail::CheckSet::fail(c_aw_in_g, first,
                                 "mutually aware robots " + std::to_string(i) + " and " + std::to_string(j) +
                                     " are farther than V - rho/2");
        }
      }
    }
    const bool aware_connected = aware_sets.components() <= 1;
    if (!aware_connected) detail::CheckSet::fail(c_aw_conn, first, "awareness graph disconnected");
    // A connected awareness graph inside G already proves G connected.
    if (!(aware_connected && aware_in_g) && !threshold_graph_connected(pos, g_threshold)) {
      detail::CheckSet::fail(c_g, first, "G disconnected at t = " + format_double(replay.time()));
    }

    Point2 ext{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < n; ++i) {
      frame_pos[i] = frame(pos[i]);
      ext.x = std::max(ext.x, frame_pos[i].x);
      ext.y = std::max(ext.y, frame_pos[i].y);
    }
    if (std::abs(ext.x - extreme.x) > tau || std::abs(ext.y - extreme.y) > tau) {
      detail::CheckSet::fail(c_ext, first, "swarm extremes changed to " + detail::fmt_point(ext));
    }
  }

  const std::vector<Point2> final_pos = replay.positions();
  const std::size_t last = records.empty() ? 0 : records.size() - 1;
  for (std::size_t k = 0; k < n; ++k) {
    if (expect[k] == Expect::Look || expect[k] == Expect::AfterInterrupt) {
      close_cycle(k, final_pos[k], last, expect[k] == Expect::AfterInterrupt);
    }
  }

  bool all_terminated = true;
  for (std::size_t k = 0; k < n; ++k) all_terminated = all_terminated && expect[k] == Expect::Done;

  report.final_positions = final_pos;
  report.final_diameter = diameter(final_pos);
  report.final_enclosing_radius = min_enclosing_circle(final_pos).radius;
  std::vector<Point2> final_frame(n);
  for (std::size_t k = 0; k < n; ++k) final_frame[k] = frame(final_pos[k]);
  const Point2 ell_point = ell([&] {
    std::vector<Point2> f(n);
    for (std::size_t k = 0; k < n; ++k) f[k] = frame(initial[k]);
    return f;
  }());
  report.hull_distance_to_ell = distance_to_hull(final_frame, ell_point);
  for (std::size_t k = 0; k < n; ++k) {
    if (final_frame[k].x > ell_point.x + tau || final_frame[k].y > ell_point.y + tau) {
      detail::CheckSet::fail(c_box, last, "robot " + std::to_string(k) + " ends beyond ell");
    }
  }

  double final_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) final_gap = std::min(final_gap, dist2(final_pos[i], final_pos[j]));
  }
  if (!all_terminated) {
    detail::CheckSet::fail(c_ng, last, "not every robot terminated");
  } else if (!(final_gap > 0.0)) {
    detail::CheckSet::fail(c_ng, last, "final positions are not pairwise distinct");
  } else if (report.final_enclosing_radius > params.epsilon * (1.0 + 1e-12)) {
    detail::CheckSet::fail(c_ng, last, "final enclosing radius " + format_double(report.final_enclosing_radius) + " exceeds epsilon");
  }
  if (!(report.final_diameter < opt.gathering_floor)) {
    detail::CheckSet::fail(c_gath, last, "final diameter " + format_double(report.final_diameter) + " above floor");
  }

  if (all_terminated) {
    report.status = RunStatus::AllTerminated;
  } else if (gathering && report.final_diameter < opt.gathering_floor) {
    report.status = RunStatus::Gathered;
  } else {
    report.status = RunStatus::MaxEvents;
  }
  report.checks = set.take();
  return report;
}

inline AuditReport audit_trace(const Trace& trace, const SimConfig& config) {
  AuditReport r = audit_trace(trace.records, trace.initial_positions, audit_options(config));
  r.status = trace.status;
  // A gathering run cut off by the event budget is reported, not failed.
  if (trace.status == RunStatus::MaxEvents) {
    for (CheckResult& c : r.checks) {
      if (c.name == "gathered" && c.applicable && !c.pass) {
        c.applicable = false;
        c.detail += " (event budget exhausted)";
      }
    }
  }
  return r;
}

inline nlohmann::ordered_json to_json(const AuditReport& r) {
  nlohmann::ordered_json j;
  j["pass"] = r.pass();
  j["status"] = std::string(to_string(r.status));
  nlohmann::ordered_json checks = nlohmann::ordered_json::object();
  for (const CheckResult& c : r.checks) {
    nlohmann::ordered_json cj;
    cj["pass"] = c.applicable ? nlohmann::ordered_json(c.pass) : nlohmann::ordered_json(nullptr);
    cj["applicable"] = c.applicable;
    cj["witness_event"] = c.witness_event ? nlohmann::ordered_json(*c.witness_event) : nlohmann::ordered_json(nullptr);
    cj["detail"] = c.detail;
    checks[c.name] = std::move(cj);
  }
  j["checks"] = std::move(checks);
  nlohmann::ordered_json m;
  m["event_count"] = r.event_count;
  m["robot_count"] = r.robot_count;
  m["final_diameter"] = r.final_diameter;
  m["final_enclosing_radius"] = r.final_enclosing_radius;
  m["hull_distance_to_ell"] = r.hull_distance_to_ell;
  if (std::isfinite(r.min_gap)) {
    m["min_gap"] = r.min_gap;
    m["min_gap_time"] = r.min_gap_time;
    m["min_gap_location"] = nlohmann::ordered_json::array({r.min_gap_location.x, r.min_gap_location.y});
  } else {
    m["min_gap"] = nullptr;
    m["min_gap_time"] = nullptr;
    m["min_gap_location"] = nullptr;
  }
  j["metrics"] = std::move(m);
  return j;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct MetricsRow {
  double t = 0.0;
  double diameter = 0.0;
  double max_x = 0.0;  // protocol frame
  double max_y = 0.0;
  std::size_t active_robots = 0;
};

/// One row per trace record, taken after the record is applied.
inline std::vector<MetricsRow> compute_metrics(const std::vector<TraceRecord>& records,
                                               const std::vector<Point2>& initial, ProtocolFrame frame = {}) {
  std::vector<MetricsRow> rows;
  rows.reserve(records.size());
  std::size_t active = initial.size();
  TraceReplay replay(records, initial);
  while (!replay.done()) {
    replay.advance();
    for (std::size_t idx = replay.begin(); idx < replay.end(); ++idx) replay.consume(idx);
    const auto& pos = replay.positions();
    const double d = diameter(pos);
    Point2 ext{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const Point2& p : pos) {
      ext.x = std::max(ext.x, frame(p).x);
      ext.y = std::max(ext.y, frame(p).y);
    }
    for (std::size_t idx = replay.begin(); idx < replay.end(); ++idx) {
      if (records[idx].event == TraceEvent::Terminate) --active;
      rows.push_back({records[idx].t, d, ext.x, ext.y, active});
    }
  }
  return rows;
}

inline void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << "t,diameter,max_x,max_y,active_robots\n";
  for (const MetricsRow& r : rows) {
    out << format_double(r.t) << ',' << format_double(r.diameter) << ',' << format_double(r.max_x) << ','
        << format_double(r.max_y) << ',' << r.active_robots << '\n';
  }
}

}  // namespace neargather
