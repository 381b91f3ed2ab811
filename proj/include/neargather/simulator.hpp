#pragma once

// Event-driven execution of asynchronous Look-Compute-Move cycles.
//
// Time is continuous. Looks are instantaneous and read true positions; the
// scheduler picks compute durations, move durations, pauses and interruptions
// subject to the minimum-progress constant delta. Between two consecutive
// events every robot moves along a straight segment at constant speed, so the
// closest approach of every pair over each interval is exact.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <future>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "neargather/geometry.hpp"
#include "neargather/protocol.hpp"
#include "neargather/trace.hpp"

namespace neargather {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Scheduler policies
// ---------------------------------------------------------------------------

/// Log-uniform duration ranges and adversary knobs for the asynchronous
/// scheduler.
struct AsyncTiming {
  double idle_min = 1e-3;
  double idle_max = 5.0;
  double compute_min = 1e-3;
  double compute_max = 5.0;
  double move_min = 0.05;
  double move_max = 5.0;
  double interrupt_probability = 0.3;
  double pause_probability = 0.2;
  double pause_max = 5.0;
};

/// Round structure shared by FSYNC and SSYNC: Look at 3k, compute ends at
/// 3k + 1, move ends at 3k + 2, next Look no earlier than 3k + 3.
struct SyncTiming {
  double activation_probability = 0.5;  // SSYNC only
  int max_skipped_rounds = 4;           // SSYNC fairness
};

/// One scripted LCM cycle. Times are absolute for the Look, relative for the
/// rest. `pause_at` and `stop_at` must lie on the move segment.
struct ScriptedCycle {
  int robot = 0;
  double look_time = 0.0;
  double compute_duration = 0.0;
  double move_duration = 1.0;
  std::optional<Point2> pause_at;
  double pause_duration = 0.0;
  std::optional<Point2> stop_at;
};

struct SchedulerPolicy {
  enum class Kind { FullySync, SemiSync, RandomAsync, Scripted };

  Kind kind = Kind::RandomAsync;
  AsyncTiming async;
  SyncTiming sync;
  std::vector<ScriptedCycle> script;

  static SchedulerPolicy fully_sync() { return {Kind::FullySync, {}, {}, {}}; }
  static SchedulerPolicy semi_sync() { return {Kind::SemiSync, {}, {}, {}}; }
  static SchedulerPolicy random_async() { return {Kind::RandomAsync, {}, {}, {}}; }
  static SchedulerPolicy scripted(std::vector<ScriptedCycle> cycles) {
    return {Kind::Scripted, {}, {}, std::move(cycles)};
  }
};

inline std::string_view to_string(SchedulerPolicy::Kind k) {
  switch (k) {
    case SchedulerPolicy::Kind::FullySync: return "fsync";
    case SchedulerPolicy::Kind::SemiSync: return "ssync";
    case SchedulerPolicy::Kind::RandomAsync: return "async";
    case SchedulerPolicy::Kind::Scripted: return "scripted";
  }
  return "?";
}

inline SchedulerPolicy::Kind parse_policy_kind(std::string_view name) {
  using K = SchedulerPolicy::Kind;
  for (K k : {K::FullySync, K::SemiSync, K::RandomAsync, K::Scripted}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

struct SimConfig {
  ProtocolParams params;
  ProtocolKind protocol = ProtocolKind::NearGather;
  double delta = 0.0;
  SchedulerPolicy policy;
  std::uint64_t seed = 0;
  std::size_t max_events = 2'000'000;
  double fairness_bound = 10.0;
  /// Reverse the same-instant ordering (landings before Looks).
  bool landings_before_looks = false;
  /// Gathering runs stop once the swarm diameter drops below this.
  double gathering_floor = 0.0;
};

/// Config with the documented defaults: delta = 0.05 rho, a fairness bound
/// that covers the chosen policy, gathering floor 1e-9 V.
inline SimConfig make_config(const ProtocolParams& params, ProtocolKind protocol,
                             SchedulerPolicy policy, std::uint64_t seed) {
  SimConfig c;
  c.params = params;
  if (protocol == ProtocolKind::NearGatherOneAxis) c.params.axis_mode = AxisMode::OneAxisRotated;
  c.protocol = protocol;
  c.delta = 0.05 * params.rho;
  c.policy = std::move(policy);
  c.seed = seed;
  switch (c.policy.kind) {
    case SchedulerPolicy::Kind::RandomAsync: c.fairness_bound = 2.0 * c.policy.async.idle_max; break;
    case SchedulerPolicy::Kind::FullySync:
    case SchedulerPolicy::Kind::SemiSync:
      c.fairness_bound = 3.0 * (c.policy.sync.max_skipped_rounds + 2);
      break;
    case SchedulerPolicy::Kind::Scripted: c.fairness_bound = 1e9; break;
  }
  c.gathering_floor = 1e-9 * params.visibility;
  return c;
}

/// One straight piece of a Move: travel from the previous knot to `end`,
/// arriving at `t_end`, then emit `event`. A pause is a piece whose end equals
/// its start.
struct MoveLeg {
  double t_end = 0.0;
  Point2 end;
  TraceEvent event = TraceEvent::MoveEnd;
};

class Scheduler {
 public:
  Scheduler(const SimConfig& config, std::size_t robot_count)
      : config_(config), rng_(config.seed), cursor_(robot_count, 0), script_(robot_count) {
    if (config.policy.kind == SchedulerPolicy::Kind::Scripted) {
      for (const ScriptedCycle& c : config.policy.script) {
        if (c.robot < 0 || static_cast<std::size_t>(c.robot) >= robot_count) {
          throw SimulationError("script references unknown robot " + std::to_string(c.robot));
        }
        script_[static_cast<std::size_t>(c.robot)].push_back(c);
      }
    }
  }

  static constexpr double kNever = std::numeric_limits<double>::infinity();

  double first_look(int robot) {
    using K = SchedulerPolicy::Kind;
    switch (config_.policy.kind) {
      case K::FullySync: return 0.0;
      case K::SemiSync: return 3.0 * skipped_rounds();
      case K::RandomAsync: return log_uniform(config_.policy.async.idle_min, config_.policy.async.idle_max);
      case K::Scripted: return scripted_look(robot);
    }
    return kNever;
  }

  /// Time of the next Look for a robot that became idle at `now`.
  double next_look(int robot, double now) {
    using K = SchedulerPolicy::Kind;
    switch (config_.policy.kind) {
      case K::FullySync: return next_round(now);
      case K::SemiSync: return next_round(now) + 3.0 * skipped_rounds();
      case K::RandomAsync:
        return now + log_uniform(config_.policy.async.idle_min, config_.policy.async.idle_max);
      case K::Scripted: return scripted_look(robot);
    }
    return kNever;
  }

  /// Called at each Look; advances the scripted cursor.
  void on_look(int robot) {
    if (config_.policy.kind == SchedulerPolicy::Kind::Scripted) ++cursor_[static_cast<std::size_t>(robot)];
  }

  double compute_duration(int robot) {
    using K = SchedulerPolicy::Kind;
    switch (config_.policy.kind) {
      case K::FullySync:
      case K::SemiSync: return 1.0;
      case K::RandomAsync:
        return log_uniform(config_.policy.async.compute_min, config_.policy.async.compute_max);
      case K::Scripted: return current_cycle(robot).compute_duration;
    }
    return 0.0;
  }

  std::vector<MoveLeg> plan_move(int robot, double now, Point2 from, Point2 dest) {
    using K = SchedulerPolicy::Kind;
    switch (config_.policy.kind) {
      case K::FullySync:
      case K::SemiSync: return {{now + 1.0, dest, TraceEvent::MoveEnd}};
      case K::RandomAsync: return plan_random(now, from, dest);
      case K::Scripted: return plan_scripted(current_cycle(robot), now, dest);
    }
    return {};
  }

 private:
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  bool chance(double p) { return p > 0.0 && uniform(0.0, 1.0) < p; }

  static double next_round(double now) { return 3.0 * (std::floor(now / 3.0) + 1.0); }

  int skipped_rounds() {
    int k = 0;
    while (k < config_.policy.sync.max_skipped_rounds && !chance(config_.policy.sync.activation_probability)) ++k;
    return k;
  }

  std::vector<MoveLeg> plan_random(double now, Point2 from, Point2 dest) {
    const AsyncTiming& a = config_.policy.async;
    const double length = dist2(from, dest);
    const double duration = log_uniform(a.move_min, a.move_max);
    Point2 end = dest;
    double fraction = 1.0;
    if (length > config_.delta && chance(a.interrupt_probability)) {
      fraction = uniform(config_.delta / length, 1.0);
      end = lerp(from, dest, fraction);
      while (dist2(from, end) < config_.delta) {
        fraction = std::nextafter(fraction, 2.0);
        end = lerp(from, dest, fraction);
      }
    }
    const TraceEvent last = fraction < 1.0 ? TraceEvent::MoveInterrupt : TraceEvent::MoveEnd;
    if (chance(a.pause_probability)) {
      const double g = uniform(0.0, fraction);
      const Point2 mid = lerp(from, dest, g);
      const double t1 = now + duration * g;
      const double t2 = t1 + log_uniform(1e-3, a.pause_max);
      const double t3 = t2 + duration * (fraction - g);
      if (t1 > now && t3 > t2 && mid != from && mid != end) {
        return {{t1, mid, TraceEvent::MoveInterrupt}, {t2, mid, TraceEvent::MoveStart}, {t3, end, last}};
      }
    }
    return {{now + duration * fraction, end, last}};
  }

  std::vector<MoveLeg> plan_scripted(const ScriptedCycle& c, double now, Point2 dest) const {
    const Point2 end = c.stop_at.value_or(dest);
    const TraceEvent last = end == dest ? TraceEvent::MoveEnd : TraceEvent::MoveInterrupt;
    if (!c.pause_at) return {{now + c.move_duration, end, last}};
    const double t1 = now + c.move_duration / 2.0;
    const double t2 = t1 + c.pause_duration;
    return {{t1, *c.pause_at, TraceEvent::MoveInterrupt},
            {t2, *c.pause_at, TraceEvent::MoveStart},
            {t2 + c.move_duration / 2.0, end, last}};
  }

  double scripted_look(int robot) const {
    const auto& cycles = script_[static_cast<std::size_t>(robot)];
    const std::size_t k = cursor_[static_cast<std::size_t>(robot)];
    return k < cycles.size() ? cycles[k].look_time : kNever;
  }

  const ScriptedCycle& current_cycle(int robot) const {
    const auto& cycles = script_[static_cast<std::size_t>(robot)];
    const std::size_t k = cursor_[static_cast<std::size_t>(robot)];
    if (k == 0 || k > cycles.size()) throw SimulationError("scripted robot has no current cycle");
    return cycles[k - 1];
  }

  SimConfig config_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> cursor_;
  std::vector<std::vector<ScriptedCycle>> script_;
};

// ---------------------------------------------------------------------------
// World state
// ---------------------------------------------------------------------------

enum class Phase { Idle, Computing, MoveReady, Moving, Terminated };

struct RobotState {
  int id = 0;
  Point2 pos;
  Phase phase = Phase::Idle;
  /// Idle: time of the next Look. Computing: time the computation ends.
  double wake_time = 0.0;
  double idle_since = 0.0;

  Point2 dest;
  Point2 leg_start;
  double leg_start_time = 0.0;
  std::vector<MoveLeg> legs;
  std::size_t leg_index = 0;

  double last_look_time = 0.0;
  std::vector<std::pair<int, Point2>> last_look_world;
  std::optional<ComputeOutcome> pending_outcome;
};

/// Snapshot of `observer` from absolute positions: every robot within the
/// closed visibility disk, translated so the observer sits at the origin.
inline Snapshot snapshot_from(const std::vector<Point2>& world, std::size_t observer, double visibility) {
  if (observer >= world.size()) throw std::out_of_range("snapshot: unknown robot id");
  Snapshot s;
  const Point2 self = world[observer];
  for (std::size_t j = 0; j < world.size(); ++j) {
    const Point2 rel = world[j] - self;
    if (j == observer || norm2(rel) <= visibility) s.positions.push_back(j == observer ? Point2{} : rel);
  }
  return s;
}

/// Closest approach of two robots whose positions move linearly from
/// (a0, b0) to (a1, b1) over one interval.
inline ClosestApproach interval_gap(Point2 a0, Point2 a1, Point2 b0, Point2 b1) {
  const double end_gap = dist2(a1, b1);
  if (a0 == a1 && b0 == b1) return {end_gap, 1.0};
  ClosestApproach ca = min_dist_linear_motions(a0, a1 - a0, b0, b1 - b0, 1.0);
  const double start_gap = dist2(a0, b0);
  if (end_gap <= ca.distance) ca = {end_gap, 1.0};
  if (start_gap < ca.distance) ca = {start_gap, 0.0};
  return ca;
}

/// World-frame destination pos + dp, rounded toward pos in each coordinate so
/// the realized step never exceeds the computed one. Without this, a step of
/// half an ulp towards a neighbour can round onto the neighbour itself.
inline Point2 translate_destination(Point2 pos, Point2 dp) {
  auto axis = [](double from, double step) {
    double to = from + step;
    while (std::abs(to - from) > std::abs(step)) to = std::nextafter(to, from);
    return to;
  };
  return {axis(pos.x, dp.x), axis(pos.y, dp.y)};
}

/// In the rotated frame a step that should run along one axis is diagonal in
/// world coordinates. Near the resolution of a double that diagonal cannot be
/// represented, and rounding turns it into a step along a world axis instead.
/// Such a step is replaced by staying put.
inline Point2 translate_rotated_destination(Point2 pos, Point2 dp) {
  const Point2 dest = translate_destination(pos, dp);
  const Point2 step = rotate_clockwise_45(dest - pos);
  const Point2 want = rotate_clockwise_45(dp);
  const bool along_x = std::abs(want.x) >= std::abs(want.y);
  const double par = along_x ? step.x : step.y;
  const double perp = along_x ? step.y : step.x;
  if (!(par > 0.0) || std::abs(perp) > 1e-3 * par) return pos;
  return dest;
}

class Simulator {
 public:
  Simulator(SimConfig config, std::vector<Point2> initial, ProtocolFn protocol = {})
      : config_(std::move(config)),
        protocol_(protocol ? std::move(protocol) : protocol_function(config_.protocol)),
        scheduler_(config_, initial.size()),
        initial_(initial) {
    validate(initial);
    robots_.resize(initial.size());
    for (std::size_t i = 0; i < initial.size(); ++i) {
      RobotState& r = robots_[i];
      r.id = static_cast<int>(i);
      r.pos = initial[i];
      r.phase = Phase::Idle;
      r.wake_time = scheduler_.first_look(r.id);
      check_idle_gap(r, 0.0);
    }
  }

  double now() const { return now_; }
  const std::vector<RobotState>& robots() const { return robots_; }
  const SimConfig& config() const { return config_; }

  std::vector<Point2> positions() const {
    std::vector<Point2> out;
    out.reserve(robots_.size());
    for (const RobotState& r : robots_) out.push_back(r.pos);
    return out;
  }

  Snapshot snapshot_of(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= robots_.size()) {
      throw std::out_of_range("snapshot_of: unknown robot id");
    }
    if (robots_[static_cast<std::size_t>(id)].phase == Phase::Terminated) {
      throw SimulationError("snapshot_of: robot has terminated");
    }
    return snapshot_from(positions(), static_cast<std::size_t>(id), config_.params.visibility);
  }

  bool all_terminated() const {
    return std::all_of(robots_.begin(), robots_.end(),
                       [](const RobotState& r) { return r.phase == Phase::Terminated; });
  }

  /// Advance to the next event and process it. Returns nothing when no event
  /// is pending (everyone terminated, or a script ran out).
  std::optional<TraceRecord> step() {
    const auto next = next_event();
    if (!next) return std::nullopt;
    const std::size_t id = next->robot;
    const double t = std::max(now_, next->time);
    const double gap = advance_to(t);
    check_fairness(t);

    RobotState& r = robots_[id];
    TraceRecord rec;
    rec.t = t;
    rec.robot = r.id;
    rec.min_pair_gap_since_last = gap;

    switch (r.phase) {
      case Phase::Idle: handle_look(r, rec); break;
      case Phase::Computing: handle_compute_end(r, rec); break;
      case Phase::MoveReady: handle_move_start(r, rec); break;
      case Phase::Moving: handle_leg_end(r, rec); break;
      case Phase::Terminated: throw SimulationError("event scheduled for a terminated robot");
    }
    return rec;
  }

  Trace run() {
    Trace trace;
    trace.initial_positions = initial_;
    trace.status = RunStatus::MaxEvents;
    while (trace.records.size() < config_.max_events) {
      auto rec = step();
      if (!rec) {
        trace.status = all_terminated() ? RunStatus::AllTerminated : RunStatus::ScriptExhausted;
        break;
      }
      trace.records.push_back(*rec);
      if (config_.protocol == ProtocolKind::Gathering && diameter() < config_.gathering_floor) {
        trace.status = RunStatus::Gathered;
        break;
      }
      if (all_terminated()) {
        trace.status = RunStatus::AllTerminated;
        break;
      }
    }
    return trace;
  }

  double diameter() const {
    double d = 0.0;
    for (std::size_t i = 0; i < robots_.size(); ++i) {
      for (std::size_t j = i + 1; j < robots_.size(); ++j) d = std::max(d, dist2(robots_[i].pos, robots_[j].pos));
    }
    return d;
  }

 private:
  struct Pending {
    double time;
    int priority;
    std::size_t robot;
  };

  static void validate(const std::vector<Point2>& initial) {
    if (initial.empty()) throw std::invalid_argument("simulation needs at least one robot");
    for (std::size_t i = 0; i < initial.size(); ++i) {
      if (!is_finite(initial[i])) throw std::invalid_argument("initial position is not finite");
      for (std::size_t j = i + 1; j < initial.size(); ++j) {
        if (initial[i] == initial[j]) {
          throw std::invalid_argument("initial positions must be pairwise distinct (robots " +
                                      std::to_string(i) + " and " + std::to_string(j) + ")");
        }
      }
    }
  }

  int priority(Phase p) const {
    // Looks, then compute ends, then move starts, then landings.
    int base = 0;
    switch (p) {
      case Phase::Idle: base = 0; break;
      case Phase::Computing: base = 1; break;
      case Phase::MoveReady: base = 2; break;
      case Phase::Moving: base = 3; break;
      case Phase::Terminated: base = 4; break;
    }
    return config_.landings_before_looks ? 3 - base : base;
  }

  std::optional<Pending> next_event() const {
    std::optional<Pending> best;
    for (std::size_t i = 0; i < robots_.size(); ++i) {
      const RobotState& r = robots_[i];
      double t = Scheduler::kNever;
      switch (r.phase) {
        case Phase::Idle:
        case Phase::Computing: t = r.wake_time; break;
        case Phase::MoveReady: t = now_; break;
        case Phase::Moving: t = r.legs[r.leg_index].t_end; break;
        case Phase::Terminated: continue;
      }
      if (!std::isfinite(t)) continue;
      const Pending cand{t, priority(r.phase), i};
      if (!best || cand.time < best->time || (cand.time == best->time && cand.priority < best->priority)) {
        best = cand;
      }
    }
    return best;
  }

  Point2 position_at(const RobotState& r, double t) const {
    if (r.phase != Phase::Moving) return r.pos;
    const MoveLeg& leg = r.legs[r.leg_index];
    if (t >= leg.t_end) return leg.end;
    const double span = leg.t_end - r.leg_start_time;
    if (span <= 0.0) return leg.end;
    return lerp(r.leg_start, leg.end, (t - r.leg_start_time) / span);
  }

  // Moves every robot to time t; returns the minimum pairwise distance over
  // [now, t].
  double advance_to(double t) {
    std::vector<Point2> next(robots_.size());
    for (std::size_t i = 0; i < robots_.size(); ++i) next[i] = position_at(robots_[i], t);
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < robots_.size(); ++i) {
      for (std::size_t j = i + 1; j < robots_.size(); ++j) {
        gap = std::min(gap, interval_gap(robots_[i].pos, next[i], robots_[j].pos, next[j]).distance);
      }
    }
    for (std::size_t i = 0; i < robots_.size(); ++i) robots_[i].pos = next[i];
    now_ = t;
    return gap;
  }

  void check_idle_gap(const RobotState& r, double now) const {
    if (std::isfinite(r.wake_time) && r.wake_time - now > config_.fairness_bound) {
      throw SimulationError("policy violates fairness: robot " + std::to_string(r.id) + " idle for " +
                            std::to_string(r.wake_time - now));
    }
    if (r.wake_time < now) {
      throw SimulationError("policy schedules a Look in the past for robot " + std::to_string(r.id));
    }
  }

  void check_fairness(double t) const {
    for (const RobotState& r : robots_) {
      if (r.phase == Phase::Idle && !std::isfinite(r.wake_time) && t - r.idle_since > config_.fairness_bound) {
        throw SimulationError("policy violates fairness: robot " + std::to_string(r.id) +
                              " never activated again");
      }
    }
  }

  void become_idle(RobotState& r) {
    r.phase = Phase::Idle;
    r.idle_since = now_;
    r.wake_time = scheduler_.next_look(r.id, now_);
    check_idle_gap(r, now_);
  }

  void handle_look(RobotState& r, TraceRecord& rec) {
    const Snapshot snap = snapshot_of(r.id);
    r.last_look_time = now_;
    r.last_look_world.clear();
    const double v = config_.params.visibility;
    for (const RobotState& other : robots_) {
      if (other.id == r.id || norm2(other.pos - r.pos) <= v) r.last_look_world.emplace_back(other.id, other.pos);
    }
    r.pending_outcome = protocol_(snap, config_.params);
    scheduler_.on_look(r.id);
    const double duration = scheduler_.compute_duration(r.id);
    if (!(duration >= 0.0)) throw SimulationError("policy produced a negative compute duration");
    r.phase = Phase::Computing;
    r.wake_time = now_ + duration;
    rec.event = TraceEvent::Look;
    rec.pos = r.pos;
  }

  void handle_compute_end(RobotState& r, TraceRecord& rec) {
    const ComputeOutcome out = r.pending_outcome.value();
    r.pending_outcome.reset();
    rec.pos = r.pos;
    if (!out.is_move()) {
      r.phase = Phase::Terminated;
      rec.event = TraceEvent::Terminate;
      return;
    }
    rec.event = TraceEvent::ComputeEnd;
    r.dest = config_.protocol == ProtocolKind::NearGatherOneAxis ? translate_rotated_destination(r.pos, out.dp)
                                                                  : translate_destination(r.pos, out.dp);
    rec.dest = r.dest;
    if (r.dest == r.pos) {
      become_idle(r);
    } else {
      r.phase = Phase::MoveReady;
    }
  }

  void handle_move_start(RobotState& r, TraceRecord& rec) {
    std::vector<MoveLeg> legs = scheduler_.plan_move(r.id, now_, r.pos, r.dest);
    validate_plan(r, legs);
    r.legs = std::move(legs);
    r.leg_index = 0;
    r.leg_start = r.pos;
    r.leg_start_time = now_;
    r.phase = Phase::Moving;
    rec.event = TraceEvent::MoveStart;
    rec.pos = r.pos;
    rec.dest = r.dest;
  }

  void handle_leg_end(RobotState& r, TraceRecord& rec) {
    const MoveLeg leg = r.legs[r.leg_index];
    r.pos = leg.end;
    rec.event = leg.event;
    rec.pos = r.pos;
    rec.dest = r.dest;
    r.leg_start = r.pos;
    r.leg_start_time = now_;
    ++r.leg_index;
    if (r.leg_index == r.legs.size()) {
      r.legs.clear();
      r.leg_index = 0;
      become_idle(r);
    }
  }

  // delta contract and geometric sanity of a planned move.
  void validate_plan(const RobotState& r, const std::vector<MoveLeg>& legs) const {
    if (legs.empty()) throw SimulationError("policy produced an empty move plan");
    const Point2 from = r.pos;
    const double length = dist2(from, r.dest);
    const double slack = 1e-12 * config_.params.visibility;
    double t = now_;
    double travelled = 0.0;
    Point2 prev = from;
    for (const MoveLeg& leg : legs) {
      if (!(leg.t_end >= t)) throw SimulationError("move plan goes back in time");
      const double step = dist2(prev, leg.end);
      if (step > 0.0 && !(leg.t_end > t)) throw SimulationError("move plan has a zero-duration motion");
      travelled += step;
      const double along = dist2(from, leg.end);
      if (std::abs(along + dist2(leg.end, r.dest) - length) > slack) {
        throw SimulationError("move plan leaves the segment towards the destination");
      }
      if (along + slack < dist2(from, prev)) throw SimulationError("move plan is not monotone");
      t = leg.t_end;
      prev = leg.end;
    }
    if (legs.back().end != r.dest) {
      const double required = std::min(config_.delta, length);
      if (travelled < required || length <= config_.delta) {
        throw SimulationError("policy violates delta: robot " + std::to_string(r.id) + " stopped after " +
                              std::to_string(travelled) + " of " + std::to_string(length));
      }
    }
  }

  SimConfig config_;
  ProtocolFn protocol_;
  Scheduler scheduler_;
  std::vector<Point2> initial_;
  std::vector<RobotState> robots_;
  double now_ = 0.0;
};

inline Trace run(const SimConfig& config, const std::vector<Point2>& initial, ProtocolFn protocol = {}) {
  Simulator sim(config, initial, std::move(protocol));
  return sim.run();
}

/// Independent runs executed concurrently; results in input order.
inline std::vector<Trace> run_batch(const std::vector<SimConfig>& configs,
                                    const std::vector<std::vector<Point2>>& initial) {
  if (configs.size() != initial.size()) throw std::invalid_argument("run_batch: size mismatch");
  std::vector<std::future<Trace>> futures;
  futures.reserve(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    futures.push_back(std::async(std::launch::async, [&, i] { return run(configs[i], initial[i]); }));
  }
  std::vector<Trace> out;
  out.reserve(futures.size());
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

}  // namespace neargather
