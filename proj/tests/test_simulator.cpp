#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <sstream>

#include "neargather/analysis.hpp"
#include "neargather/scenarios.hpp"
#include "neargather/simulator.hpp"

using namespace neargather;
using Catch::Approx;

namespace {

SimConfig config(SchedulerPolicy policy, std::uint64_t seed = 1, ProtocolKind kind = ProtocolKind::NearGather) {
  return make_config(derive_params(4.0, 3.5, 0.1), kind, std::move(policy), seed);
}

}  // namespace

TEST_CASE("snapshots use the closed visibility disk and the observer frame", "[simulator]") {
  auto s = snapshot_from({{0, 0}, {4, 0}}, 0, 4.0);
  CHECK(s.positions.size() == 2);
  s = snapshot_from({{0, 0}, {4 + 4e-9, 0}}, 0, 4.0);
  CHECK(s.positions.size() == 1);
  s = snapshot_from({{10, 10}, {11, 10}}, 0, 4.0);
  CHECK(s.positions == std::vector<Point2>{{0, 0}, {1, 0}});
  CHECK_THROWS_AS(snapshot_from({{0, 0}}, 3, 4.0), std::out_of_range);
}

TEST_CASE("a lone robot looks and terminates", "[simulator]") {
  for (auto policy : {SchedulerPolicy::fully_sync(), SchedulerPolicy::semi_sync(), SchedulerPolicy::random_async()}) {
    const Trace t = run(config(policy), {{1, 2}});
    REQUIRE(t.records.size() == 2);
    CHECK(t.records[0].event == TraceEvent::Look);
    CHECK(t.records[1].event == TraceEvent::Terminate);
    CHECK(t.status == RunStatus::AllTerminated);
  }
}

TEST_CASE("two close robots terminate without moving", "[simulator]") {
  const Trace t = run(config(SchedulerPolicy::random_async(), 5), {{0, 0}, {0.05, 0}});
  CHECK(t.status == RunStatus::AllTerminated);
  CHECK(t.records.size() == 4);
  for (const auto& r : t.records) CHECK((r.event == TraceEvent::Look || r.event == TraceEvent::Terminate));
}

TEST_CASE("fully synchronous runs proceed in rounds", "[simulator]") {
  const Scenario s = canned_scenario(CannedKind::VerticalLine, 3);
  const Trace t = run(config(SchedulerPolicy::fully_sync()), s.positions);
  REQUIRE(t.status == RunStatus::AllTerminated);
  std::map<double, std::vector<TraceEvent>> by_time;
  for (const auto& r : t.records) by_time[r.t].push_back(r.event);
  for (const auto& [time, events] : by_time) {
    const double phase = std::fmod(time, 3.0);
    for (TraceEvent e : events) {
      if (e == TraceEvent::Look) CHECK(phase == 0.0);
      if (e == TraceEvent::ComputeEnd || e == TraceEvent::Terminate) CHECK(phase == 1.0);
      if (e == TraceEvent::MoveStart) CHECK(phase == 1.0);
      if (e == TraceEvent::MoveEnd) CHECK(phase == 2.0);
      CHECK(e != TraceEvent::MoveInterrupt);
    }
  }
  // Every robot looks in round zero.
  CHECK(std::count(by_time[0.0].begin(), by_time[0.0].end(), TraceEvent::Look) == 3);
}

TEST_CASE("records are ordered by time then phase then robot", "[simulator]") {
  const Scenario s = generate_connected(8, 4.0, 3.5, 0.035, 17);
  const Trace t = run(config(SchedulerPolicy::random_async(), 3), s.positions);
  for (std::size_t i = 1; i < t.records.size(); ++i) CHECK(t.records[i - 1].t <= t.records[i].t);
}

TEST_CASE("identical configurations give identical traces", "[simulator]") {
  const Scenario s = generate_connected(10, 4.0, 3.5, 0.035, 21);
  const Trace a = run(config(SchedulerPolicy::random_async(), 9), s.positions);
  const Trace b = run(config(SchedulerPolicy::random_async(), 9), s.positions);
  CHECK(a.records == b.records);
  std::ostringstream sa, sb;
  write_jsonl(sa, a.records);
  write_jsonl(sb, b.records);
  CHECK(sa.str() == sb.str());
  const Trace c = run(config(SchedulerPolicy::random_async(), 10), s.positions);
  CHECK(c.records != a.records);
}

TEST_CASE("random interruptions respect delta", "[simulator]") {
  const Scenario s = generate_connected(12, 4.0, 3.5, 0.035, 4);
  const SimConfig c = config(SchedulerPolicy::random_async(), 77);
  const Trace t = run(c, s.positions);
  std::vector<Point2> look_pos(s.positions);
  std::vector<Point2> dest(s.positions.size());
  std::size_t interrupts = 0;
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const auto& r = t.records[i];
    const auto k = static_cast<std::size_t>(r.robot);
    if (r.event == TraceEvent::Look) look_pos[k] = r.pos;
    if (r.event == TraceEvent::ComputeEnd) dest[k] = *r.dest;
    if (r.event == TraceEvent::MoveInterrupt) {
      const auto next = std::find_if(t.records.begin() + static_cast<std::ptrdiff_t>(i) + 1, t.records.end(),
                                     [&](const TraceRecord& n) { return n.robot == r.robot; });
      const bool resumed = next != t.records.end() && next->event == TraceEvent::MoveStart;
      if (resumed) continue;
      ++interrupts;
      CHECK(dist2(look_pos[k], r.pos) >= c.delta);
      CHECK(dist2(look_pos[k], dest[k]) > c.delta);
    }
  }
  CHECK(interrupts > 0);
}

TEST_CASE("centroid counterexample replays exactly", "[simulator]") {
  const Scenario s = canned_scenario(CannedKind::CentroidPair);
  const ProtocolParams params = derive_params(s.visibility, s.strong_threshold, s.epsilon);
  const SimConfig c =
      make_config(params, ProtocolKind::Centroid, SchedulerPolicy::scripted(centroid_counterexample_script()), 0);
  const Trace t = run(c, s.positions);
  CHECK(t.status == RunStatus::ScriptExhausted);

  std::vector<double> s_ends;
  double first_r_stop = NAN;
  double min_gap = INFINITY;
  for (const auto& r : t.records) {
    if (r.robot == 1 && r.event == TraceEvent::MoveEnd) s_ends.push_back(r.pos.x);
    if (r.robot == 0 && r.event == TraceEvent::MoveInterrupt && std::isnan(first_r_stop)) first_r_stop = r.pos.x;
    min_gap = std::min(min_gap, r.min_pair_gap_since_last);
  }
  REQUIRE(s_ends.size() == 5);
  const double expected[] = {2356, 1780, 1348, 1024, 781};
  for (int i = 0; i < 5; ++i) CHECK(s_ends[i] == Approx(expected[i]).margin(1e-9));
  CHECK(first_r_stop == 52.0);
  CHECK(min_gap < 1e-12 * s.visibility);
  CHECK(t.records.back().robot == 0);
  CHECK(t.records.back().pos == Point2{781, 0});
}

TEST_CASE("scripted schedules that stop too early are rejected", "[simulator]") {
  const ProtocolParams params = derive_params(4.0, 3.5, 0.1);
  ScriptedCycle cyc;
  cyc.robot = 0;
  cyc.look_time = 0.0;
  cyc.move_duration = 1.0;
  cyc.stop_at = Point2{1e-6, 0.0};
  SimConfig c = make_config(params, ProtocolKind::NearGather, SchedulerPolicy::scripted({cyc}), 0);
  CHECK_THROWS_AS(run(c, {{0, 0}, {1, 0}}), SimulationError);
}

TEST_CASE("fairness bound is enforced", "[simulator]") {
  const ProtocolParams params = derive_params(4.0, 3.5, 0.1);
  ScriptedCycle late;
  late.robot = 0;
  late.look_time = 50.0;
  SimConfig c = make_config(params, ProtocolKind::NearGather, SchedulerPolicy::scripted({late}), 0);
  c.fairness_bound = 10.0;
  CHECK_THROWS_AS(run(c, {{0, 0}}), SimulationError);
}

TEST_CASE("invalid initial positions are refused", "[simulator]") {
  CHECK_THROWS_AS(run(config(SchedulerPolicy::fully_sync()), {{0, 0}, {0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(run(config(SchedulerPolicy::fully_sync()), {}), std::invalid_argument);
}

TEST_CASE("reversed same-instant ordering still yields valid runs", "[simulator]") {
  const Scenario s = generate_connected(6, 4.0, 3.5, 0.035, 8);
  for (auto policy : {SchedulerPolicy::fully_sync(), SchedulerPolicy::semi_sync()}) {
    SimConfig c = config(policy, 2);
    c.landings_before_looks = true;
    const Trace t = run(c, s.positions);
    CHECK(t.status == RunStatus::AllTerminated);
    CHECK(audit_trace(t, c).pass());
  }
}

TEST_CASE("batch runs match sequential runs", "[simulator]") {
  const Scenario s = generate_connected(5, 4.0, 3.5, 0.035, 2);
  std::vector<SimConfig> cs{config(SchedulerPolicy::random_async(), 1), config(SchedulerPolicy::random_async(), 2)};
  const auto traces = run_batch(cs, {s.positions, s.positions});
  CHECK(traces[0].records == run(cs[0], s.positions).records);
  CHECK(traces[1].records == run(cs[1], s.positions).records);
}
