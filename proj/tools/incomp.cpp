#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "incomp/capacity.hpp"
#include "incomp/errors.hpp"
#include "incomp/scenario.hpp"
#include "incomp/simulation.hpp"
#include "incomp/sweep.hpp"

namespace {

using namespace incomp;

enum Exit : int { kOk = 0, kParse = 1, kConstraint = 2, kOverflow = 3, kDegenerate = 4, kMismatch = 5 };

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> horizon;
  std::optional<std::uint64_t> stride;
  std::string assert_mode = "on";
  unsigned workers = 1;
};

RunOptions options_from(const Globals& g, std::uint64_t default_stride = 100) {
  RunOptions o;
  o.stride = g.stride.value_or(default_stride);
  o.assert_mode = g.assert_mode == "on";
  return o;
}

Scenario load_with_overrides(const std::string& path, const Globals& g) {
  Scenario s = load_scenario(path);
  if (g.seed) s.seed = *g.seed;
  if (g.horizon) s.horizon = *g.horizon;
  return s;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  return f;
}

const char* kSchema = R"(run CSV (one row per sampled slot):
  slot            slots completed
  total_backlog   q_backlog + x_backlog + y_backlog + h_backlog
  q_backlog       packets in all routing queues
  x_backlog       raw packets waiting at computation nodes
  y_backlog       processed packets waiting to be released
  h_backlog       sum of virtual load-balancing queues
  delivered_cum   useful sums delivered so far
  dummy_cum       dummy packets dropped at the destination so far
  atilde_<n>      cumulative queries assigned to computation node n
  z_<n>           cumulative computations made at node n
run summary (<output>.summary.json): lambda, policy, seed, horizon, slots_run,
  statistics_window, window_start, mean_backlog, backlog_slope, delivered_rate,
  delivered, dummy_dropped, shortfall, overflow, stable, digest, assigned_rate
sweep CSV (one row per lambda and seed):
  lambda,seed,policy,mean_backlog,backlog_slope,delivered_rate,stable,overflow,error
sweep aggregate (<output>.agg.csv, one row per lambda):
  lambda,policy,runs,failed,mean_backlog,delivered_rate,stable_fraction
plotdata CSV:
  x,y,series
)";

int cmd_run(const std::string& scenario_path, const std::string& output, const Globals& g) {
  const Scenario s = load_with_overrides(scenario_path, g);
  RunResult r;
  try {
    r = run(s, options_from(g));
  } catch (const ConstraintViolation& e) {
    std::cerr << "constraint violation: " << e.what() << '\n';
    return kConstraint;
  }
  {
    auto f = open_out(output);
    write_csv(f, r);
  }
  const auto summary = summary_json(r);
  {
    auto f = open_out(output + ".summary.json");
    f << summary.dump(2) << '\n';
  }
  std::cout << summary.dump(2) << '\n';
  return r.overflow ? kOverflow : kOk;
}

int cmd_sweep(const std::string& sweep_path, const std::string& output, const Globals& g) {
  std::ifstream in(sweep_path);
  if (!in) throw ParseError("cannot read '" + sweep_path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  SweepSpec spec = parse_sweep(ss.str(), std::filesystem::path(sweep_path).parent_path().string());
  if (g.seed) spec.base.seed = *g.seed;
  if (g.horizon) spec.horizon = *g.horizon;
  const auto rows = run_sweep(spec, options_from(g), g.workers);
  {
    auto f = open_out(output);
    write_sweep_csv(f, rows);
  }
  const auto agg = aggregate_sweep(rows);
  {
    auto f = open_out(output + ".agg.csv");
    write_aggregate_csv(f, agg);
  }
  write_aggregate_csv(std::cout, agg);
  return kOk;
}

int cmd_bound(const std::string& scenario_path, const std::string& mode, bool certificate, bool directed) {
  const Scenario s = load_scenario(scenario_path);
  CapacityProblem p = CapacityProblem::multi(s.topology, directed);
  if (mode.rfind("single:", 0) == 0) {
    const auto node = static_cast<NodeId>(std::stoull(mode.substr(7)));
    const auto c = s.topology.computation_index(node);
    if (!c) throw ParseError("node " + std::to_string(node) + " is not a computation node");
    p = CapacityProblem::single(s.topology, *c, directed);
  } else if (mode != "multi") {
    throw ParseError("mode must be 'multi' or 'single:<node>'");
  }
  const LambdaStar sol = solve_lambda_star(p, certificate);
  std::printf("%.6f\n", sol.value);
  if (certificate) {
    const auto& comp = s.topology.computation_nodes();
    std::printf("node,rate\n");
    for (std::size_t i = 0; i < sol.comps.size(); ++i)
      std::printf("%zu,%.6f\n", comp[sol.comps[i]].node, sol.rates[i]);
    std::printf("node,commodity,from,to,flow\n");
    static const char* kinds[] = {"processed", "raw1", "raw2"};
    for (const auto& f : sol.flows.value())
      std::printf("%zu,%s,%zu,%zu,%.6f\n", comp[f.comp].node, kinds[static_cast<int>(f.kind)], f.from, f.to, f.flow);
  }
  return kOk;
}

int cmd_couple(const std::string& a_path, const std::string& b_path, const std::string& shared_list,
               const std::string& mode, unsigned seeds, const Globals& g) {
  Scenario a = load_with_overrides(a_path, g);
  Scenario b = load_with_overrides(b_path, g);
  check_same_except_policy(a, b);
  std::set<SharedStream> shared;
  if (shared_list != "none") {
    std::stringstream ss(shared_list);
    for (std::string item; std::getline(ss, item, ',');) {
      if (item == "arrivals") shared.insert(SharedStream::arrivals);
      else if (item == "bonus") shared.insert(SharedStream::bonus);
      else throw ParseError("unknown shared stream '" + item + "'");
    }
  }
  const bool sample_path = mode == "sample-path";
  if (!sample_path && mode != "distributional") throw ParseError("mode must be 'sample-path' or 'distributional'");
  const RunOptions opt = options_from(g, 1);
  std::uint64_t total_violations = 0;
  std::size_t ordered = 0;
  std::printf("seed,violations,first_violation,mean_x_a,mean_x_b,digest_a,digest_b\n");
  for (unsigned k = 0; k < seeds; ++k) {
    Scenario sa = a, sb = b;
    sa.seed = sb.seed = a.seed + k;
    const CoupledResult r = sample_path ? run_coupled(sa, sb, shared, opt)
                                        : CoupledResult{run(sa, opt), run(sb, opt), {}};
    total_violations += r.dominance.violations;
    if (r.a.mean_x <= r.b.mean_x) ++ordered;
    std::printf("%llu,%llu,%s,%.6f,%.6f,%016llx,%016llx\n", static_cast<unsigned long long>(sa.seed),
                static_cast<unsigned long long>(r.dominance.violations),
                r.dominance.first_violation ? std::to_string(*r.dominance.first_violation).c_str() : "",
                r.a.mean_x, r.b.mean_x, static_cast<unsigned long long>(r.a.digest),
                static_cast<unsigned long long>(r.b.digest));
  }
  if (sample_path) {
    std::printf("verdict: %s (%llu violations)\n", total_violations == 0 ? "dominance holds" : "dominance violated",
                static_cast<unsigned long long>(total_violations));
    return total_violations == 0 ? kOk : kConstraint;
  }
  std::printf("verdict: mean X ordered in %zu of %u seeds\n", ordered, seeds);
  return kOk;
}

int cmd_validate(const std::string& path) {
  const Scenario s = load_scenario(path);
  std::printf("ok: %zu nodes, %zu edges, %zu computation nodes, policy %s\n", s.topology.node_count(),
              s.topology.edges().size(), s.topology.computation_count(), to_string(s.policy.name).c_str());
  return kOk;
}

int cmd_plotdata(const std::string& sweep_csv, const std::string& output, const std::string& column) {
  std::ifstream in(sweep_csv);
  if (!in) throw ParseError("cannot read '" + sweep_csv + "'");
  if (output.empty() || output == "-") {
    write_plotdata(std::cout, in, column);
  } else {
    auto f = open_out(output);
    write_plotdata(f, in, column);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Backpressure simulator and capacity bound for in-network function computation"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  Globals g;
  bool schema = false;
  app.add_option("--seed", g.seed, "override the scenario seed");
  app.add_option("--horizon", g.horizon, "override the scenario horizon (slots)");
  app.add_option("--stride", g.stride, "record every n-th slot");
  app.add_option("--assert", g.assert_mode, "validate every slot decision")->check(CLI::IsMember({"on", "off"}));
  app.add_option("--workers", g.workers, "parallel sweep points")->check(CLI::PositiveNumber);
  app.add_flag("--schema", schema, "print the CSV schemas and exit");

  std::string scenario, output, other, mode = "multi", shared = "arrivals", couple_mode = "sample-path",
                                       column = "mean_backlog";
  bool certificate = false, directed = false;
  unsigned seeds = 1;

  auto* run_cmd = app.add_subcommand("run", "simulate one scenario");
  run_cmd->add_option("scenario", scenario)->required();
  run_cmd->add_option("-o,--output", output, "CSV output path")->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "simulate a grid of query rates");
  sweep_cmd->add_option("sweep", scenario, "sweep document")->required();
  sweep_cmd->add_option("-o,--output", output, "CSV output path")->required();

  auto* bound_cmd = app.add_subcommand("bound", "compute the capacity bound");
  bound_cmd->add_option("scenario", scenario)->required();
  bound_cmd->add_option("--mode", mode, "multi or single:<node>");
  bound_cmd->add_flag("--certificate", certificate, "print the optimal rates and flows");
  bound_cmd->add_flag("--directed-capacity", directed, "give each edge direction its own capacity");

  auto* couple_cmd = app.add_subcommand("couple", "run two policies on shared randomness");
  couple_cmd->add_option("scenario_a", scenario)->required();
  couple_cmd->add_option("scenario_b", other)->required();
  couple_cmd->add_option("--shared", shared, "comma list of arrivals,bonus or none");
  couple_cmd->add_option("--seeds", seeds, "number of consecutive seeds")->check(CLI::PositiveNumber);
  couple_cmd->add_option("--mode", couple_mode, "sample-path or distributional");

  auto* validate_cmd = app.add_subcommand("validate", "check a scenario file");
  validate_cmd->add_option("scenario", scenario)->required();

  auto* plot_cmd = app.add_subcommand("plotdata", "reshape sweep CSV into x,y,series");
  plot_cmd->add_option("sweep_csv", scenario)->required();
  plot_cmd->add_option("-o,--output", output, "output path (stdout if omitted)");
  plot_cmd->add_option("--column", column, "sweep column to plot");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kParse;
  }
  if (schema) {
    std::cout << kSchema;
    return kOk;
  }
  try {
    if (*run_cmd) return cmd_run(scenario, output, g);
    if (*sweep_cmd) return cmd_sweep(scenario, output, g);
    if (*bound_cmd) return cmd_bound(scenario, mode, certificate, directed);
    if (*couple_cmd) return cmd_couple(scenario, other, shared, couple_mode, seeds, g);
    if (*validate_cmd) return cmd_validate(scenario);
    if (*plot_cmd) return cmd_plotdata(scenario, output, column);
    std::cout << app.help();
    return kParse;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const ScenarioMismatch& e) {
    std::cerr << "scenario mismatch: " << e.what() << '\n';
    return kMismatch;
  } catch (const LpDegeneracyError& e) {
    std::cerr << "LP degeneracy: " << e.what() << '\n';
    return kDegenerate;
  } catch (const ConstraintViolation& e) {
    std::cerr << "constraint violation: " << e.what() << '\n';
    return kConstraint;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  }
}
