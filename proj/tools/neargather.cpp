#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "neargather/cli.hpp"

namespace cli = neargather::cli;

int main(int argc, char** argv) {
  CLI::App app{"Near-gathering simulator and invariant auditor"};
  app.require_subcommand(1);

  cli::GenerateOptions gen;
  std::string gen_out = gen.out.string();
  double gen_min_sep = 0.0;
  auto* generate = app.add_subcommand("generate", "Write a certified scenario file");
  generate->add_option("--n", gen.n, "Number of robots")->check(CLI::PositiveNumber);
  generate->add_option("--v", gen.visibility, "Visibility radius V");
  generate->add_option("--d", gen.strong_threshold, "Strong distance threshold D (< V)");
  generate->add_option("--epsilon", gen.epsilon, "Target disk radius");
  auto* min_sep_opt = generate->add_option("--min-sep", gen_min_sep, "Minimum separation (default 0.01 D)");
  generate->add_option("--seed", gen.seed, "Generator seed");
  generate->add_option("--canned", gen.canned, "Named layout: centroid-pair, vertical-line, polygon, grid");
  generate->add_option("--count", gen.canned_count, "n for vertical-line/polygon, k for grid");
  generate->add_option("--radius", gen.polygon_radius, "Polygon circumradius");
  generate->add_option("--out", gen_out, "Output path");

  cli::RunOptions run;
  std::string run_scenario, run_out = run.out_dir.string(), run_script;
  double run_delta = 0.0;
  auto* runc = app.add_subcommand("run", "Simulate, audit and write trace, audit and metrics");
  runc->add_option("--scenario", run_scenario, "Scenario file")->required();
  runc->add_option("--protocol", run.protocol, "neargather, neargather-oneaxis, gathering, centroid");
  runc->add_option("--policy", run.policy, "fsync, ssync, async, scripted");
  runc->add_option("--seed", run.seed, "Scheduler seed");
  auto* delta_opt = runc->add_option("--delta", run_delta, "Minimum progress per move (default 0.05 rho)");
  runc->add_option("--max-events", run.max_events, "Event budget");
  runc->add_option("--out-dir", run_out, "Output directory");
  runc->add_option("--batch", run.batch, "Independent runs with seeds seed, seed+1, ...");
  auto* script_opt = runc->add_option("--script", run_script, "Scripted schedule (JSON); default replays the centroid pair");
  runc->add_flag("--landings-first", run.landings_before_looks, "Process landings before Looks at equal times");

  cli::CheckOptions chk;
  std::string chk_trace, chk_scenario, chk_out;
  double chk_delta = 0.0;
  auto* check = app.add_subcommand("check", "Re-audit an existing trace");
  check->add_option("--trace", chk_trace, "Trace JSONL")->required();
  check->add_option("--scenario", chk_scenario, "Scenario file the trace started from")->required();
  check->add_option("--protocol", chk.protocol, "Protocol that produced the trace");
  auto* chk_delta_opt = check->add_option("--delta", chk_delta, "Minimum progress per move (default 0.05 rho)");
  auto* chk_out_opt = check->add_option("--out", chk_out, "Write the audit here instead of stdout");

  cli::ScanOptions scan;
  auto* scanc = app.add_subcommand("scan-prop1", "Grid scan of the annulus chord gap");
  scanc->add_option("--v", scan.visibility, "Visibility radius V");
  scanc->add_option("--rho", scan.rho, "rho");
  scanc->add_option("--grid", scan.grid, "Grid size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : cli::kExitUsage;
  }

  try {
    if (generate->parsed()) {
      gen.out = gen_out;
      if (*min_sep_opt) gen.min_sep = gen_min_sep;
      return cli::cmd_generate(gen, std::cout);
    }
    if (runc->parsed()) {
      run.scenario = run_scenario;
      run.out_dir = run_out;
      if (*delta_opt) run.delta = run_delta;
      if (*script_opt) run.script = run_script;
      return cli::cmd_run(run, std::cout);
    }
    if (check->parsed()) {
      chk.trace = chk_trace;
      chk.scenario = chk_scenario;
      if (*chk_delta_opt) chk.delta = chk_delta;
      if (*chk_out_opt) chk.out = chk_out;
      return cli::cmd_check(chk, std::cout);
    }
    if (scanc->parsed()) return cli::cmd_scan_prop1(scan, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitUsage;
  }
  return cli::kExitUsage;
}
