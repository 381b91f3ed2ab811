#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <sys/wait.h>

#include "neargather/cli.hpp"

using namespace neargather;
using namespace neargather::cli;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("neargather-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_scenario(const fs::path& dir, const Scenario& s) {
  const fs::path p = dir / "scenario.json";
  write_file(p, save_scenario(s));
  return p;
}

int run_binary(const std::string& args) {
  const char* bin = std::getenv("NEARGATHER_BIN");
  if (!bin) return -1;
  const int status = std::system((std::string(bin) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("generate writes a certified scenario", "[cli]") {
  const fs::path dir = fresh_dir("generate");
  GenerateOptions o;
  o.n = 20;
  o.seed = 7;
  o.out = dir / "s.json";
  std::ostringstream log;
  CHECK(cmd_generate(o, log) == kExitOk);
  const Scenario s = load_scenario(read_file(o.out));
  CHECK(s.positions.size() == 20);
  CHECK(is_connected(build_graph(s.positions, 3.5, GraphLabel::J)));

  o.n = 1;
  CHECK(cmd_generate(o, log) == kExitOk);
  CHECK(load_scenario(read_file(o.out)).positions.size() == 1);

  o.strong_threshold = 4.0;
  CHECK_THROWS(cmd_generate(o, log));

  GenerateOptions canned;
  canned.canned = "grid";
  canned.canned_count = 2;
  canned.out = dir / "grid.json";
  CHECK(cmd_generate(canned, log) == kExitOk);
  CHECK(load_scenario(read_file(canned.out)).positions.size() == 4);
}

TEST_CASE("run succeeds for the protocol and writes all outputs", "[cli]") {
  const fs::path dir = fresh_dir("run");
  RunOptions o;
  o.scenario = write_scenario(dir, generate_connected(8, 4.0, 3.5, 0.035, 3));
  o.out_dir = dir / "out";
  std::ostringstream log;
  CHECK(cmd_run(o, log) == kExitOk);
  for (const char* f : {"trace.jsonl", "audit.json", "metrics.csv", "run.json"}) CHECK(fs::exists(o.out_dir / f));
  const auto audit = nlohmann::json::parse(read_file(o.out_dir / "audit.json"));
  CHECK(audit["pass"] == true);
  CHECK(audit["status"] == "all_terminated");
  CHECK(audit["metrics"]["final_diameter"].get<double>() <= 0.2);
  CHECK(log.str().find("all checks pass") != std::string::npos);
}

TEST_CASE("the centroid counterexample exits with a violation", "[cli]") {
  const fs::path dir = fresh_dir("centroid");
  RunOptions o;
  o.scenario = write_scenario(dir, canned_scenario(CannedKind::CentroidPair));
  o.protocol = "centroid";
  o.policy = "scripted";
  o.out_dir = dir / "out";
  std::ostringstream log;
  CHECK(cmd_run(o, log) == kExitViolation);
  CHECK(log.str().find("collision_free") != std::string::npos);
  CHECK(log.str().find("(781, 0)") != std::string::npos);

  // Re-auditing the written trace reaches the same verdict.
  CheckOptions c;
  c.trace = o.out_dir / "trace.jsonl";
  c.scenario = o.scenario;
  c.protocol = "centroid";
  c.out = dir / "recheck.json";
  CHECK(cmd_check(c, log) == kExitViolation);
  const auto audit = nlohmann::json::parse(read_file(*c.out));
  CHECK(audit["checks"]["collision_free"]["pass"] == false);
}

TEST_CASE("gathering mode reports its final diameter", "[cli]") {
  const fs::path dir = fresh_dir("gathering");
  RunOptions o;
  o.scenario = write_scenario(dir, generate_connected(5, 4.0, 3.5, 0.035, 6));
  o.protocol = "gathering";
  o.out_dir = dir / "out";
  std::ostringstream log;
  CHECK(cmd_run(o, log) == kExitOk);
  const auto audit = nlohmann::json::parse(read_file(o.out_dir / "audit.json"));
  CHECK(audit["metrics"]["final_diameter"].is_number());
}

TEST_CASE("check re-audits traces and catches corruption", "[cli]") {
  const fs::path dir = fresh_dir("check");
  RunOptions o;
  o.scenario = write_scenario(dir, generate_connected(6, 4.0, 3.5, 0.035, 11));
  o.out_dir = dir / "out";
  std::ostringstream log;
  REQUIRE(cmd_run(o, log) == kExitOk);

  CheckOptions c;
  c.trace = o.out_dir / "trace.jsonl";
  c.scenario = o.scenario;
  std::ostringstream report;
  CHECK(cmd_check(c, report) == kExitOk);
  CHECK(report.str() == read_file(o.out_dir / "audit.json"));

  // Move one landing to the left of where its move started.
  std::istringstream in(read_file(c.trace));
  std::vector<TraceRecord> records = read_jsonl(in);
  std::vector<Point2> start = load_scenario(read_file(o.scenario)).positions;
  bool corrupted = false;
  for (TraceRecord& r : records) {
    const auto k = static_cast<std::size_t>(r.robot);
    if (r.event == TraceEvent::MoveStart) start[k] = r.pos;
    if (r.event == TraceEvent::MoveEnd && r.pos.x > start[k].x) {
      r.pos.x = start[k].x - 0.05;
      corrupted = true;
      break;
    }
  }
  REQUIRE(corrupted);
  std::ostringstream bad;
  write_jsonl(bad, records);
  c.trace = dir / "corrupt.jsonl";
  write_file(c.trace, bad.str());
  std::ostringstream out;
  CHECK(cmd_check(c, out) == kExitViolation);
  CHECK(nlohmann::json::parse(out.str())["checks"]["coordinates_monotone"]["pass"] == false);
}

TEST_CASE("reruns are byte-identical", "[cli]") {
  const fs::path dir = fresh_dir("rerun");
  RunOptions o;
  o.scenario = write_scenario(dir, generate_connected(10, 4.0, 3.5, 0.035, 21));
  o.seed = 5;
  std::ostringstream log;
  o.out_dir = dir / "a";
  REQUIRE(cmd_run(o, log) == kExitOk);
  o.out_dir = dir / "b";
  REQUIRE(cmd_run(o, log) == kExitOk);
  for (const char* f : {"trace.jsonl", "audit.json", "metrics.csv"}) {
    CHECK(read_file(dir / "a" / f) == read_file(dir / "b" / f));
  }
}

TEST_CASE("batch runs write one directory per seed", "[cli]") {
  const fs::path dir = fresh_dir("batch");
  RunOptions o;
  o.scenario = write_scenario(dir, generate_connected(6, 4.0, 3.5, 0.035, 2));
  o.seed = 10;
  o.batch = 3;
  o.out_dir = dir / "out";
  std::ostringstream log;
  CHECK(cmd_run(o, log) == kExitOk);
  for (int s = 10; s < 13; ++s) CHECK(fs::exists(o.out_dir / ("seed-" + std::to_string(s)) / "audit.json"));

  // Each batch member matches the corresponding single run.
  RunOptions single = o;
  single.batch = 1;
  single.seed = 11;
  single.out_dir = dir / "single";
  CHECK(cmd_run(single, log) == kExitOk);
  CHECK(read_file(dir / "single" / "trace.jsonl") == read_file(o.out_dir / "seed-11" / "trace.jsonl"));

  o.batch = 0;
  CHECK_THROWS_AS(cmd_run(o, log), UsageError);
}

TEST_CASE("scan of the chord gap", "[cli]") {
  const ScanResult a = scan_chord_gap(4.0, 0.5, 10000);
  CHECK(a.minimum == Catch::Approx(0.25).margin(1e-12));
  CHECK(a.argmin == 0.0);
  CHECK(a.monotone);
  CHECK(a.pass);
  const ScanResult b = scan_chord_gap(16.0, 1.0, 10000);
  CHECK(b.minimum == Catch::Approx(0.5).margin(1e-12));
  CHECK(b.argmin == 0.0);
  CHECK(b.monotone);
  std::ostringstream out;
  CHECK(cmd_scan_prop1({4.0, 0.5, 1000}, out) == kExitOk);
  CHECK(nlohmann::json::parse(out.str())["pass"] == true);
  CHECK_THROWS_AS(scan_chord_gap(4.0, 2.0, 100), UsageError);
  CHECK_THROWS_AS(scan_chord_gap(4.0, 0.5, 1), UsageError);
}

TEST_CASE("the executable follows the exit-code contract", "[cli]") {
  if (!std::getenv("NEARGATHER_BIN")) SKIP("NEARGATHER_BIN not set");
  const fs::path dir = fresh_dir("binary");
  const std::string s = (dir / "s.json").string();
  CHECK(run_binary("generate --n 5 --seed 3 --out " + s) == kExitOk);
  CHECK(run_binary("generate --n 5 --d 4 --v 4 --out " + (dir / "bad.json").string()) == kExitUsage);
  CHECK(run_binary("run --scenario " + s + " --out-dir " + (dir / "out").string()) == kExitOk);
  CHECK(run_binary("check --trace " + (dir / "out" / "trace.jsonl").string() + " --scenario " + s) == kExitOk);
  CHECK(run_binary("run --scenario " + (dir / "missing.json").string()) == kExitUsage);
  CHECK(run_binary("run --scenario " + s + " --protocol magic") == kExitUsage);
  CHECK(run_binary("bogus") == kExitUsage);

  const std::string pair = (dir / "pair.json").string();
  CHECK(run_binary("generate --canned centroid-pair --out " + pair) == kExitOk);
  CHECK(run_binary("run --scenario " + pair + " --protocol centroid --policy scripted --out-dir " +
                   (dir / "c").string()) == kExitViolation);
  CHECK(run_binary("scan-prop1 --v 4 --rho 0.5 --grid 100") == kExitOk);
}
