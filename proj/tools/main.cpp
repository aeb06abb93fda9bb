// Command-line front end: loads scenario files, runs the quasistatic
// solver, emits stasis geometry, regularity/uniqueness checks,
// closed-form reference values and sweeps.
//
// Exit codes: 0 success, 1 internal/I-O error, 2 invalid input,
// 3 solver failure, 4 closed form requested on a regime boundary.

#include <exception>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "crawlris/json_io.hpp"
#include "crawlris/oracle.hpp"
#include "crawlris/scenario.hpp"
#include "crawlris/solver.hpp"

namespace {

struct CommonArgs {
  std::string scenario_path;
  std::string out_dir = ".";
  std::optional<int> steps;
  std::optional<int> elements;
  unsigned long long seed = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_scenario = true) {
  auto* opt = cmd->add_option("-s,--scenario", args.scenario_path,
                              "Scenario JSON file");
  if (needs_scenario) opt->required();
  cmd->add_option("-o,--out", args.out_dir,
                  "Directory for output files (default: current)");
  cmd->add_option("--steps", args.steps,
                  "Override solver steps per unit time");
  cmd->add_option("--elements", args.elements,
                  "Override the continuum element count");
  cmd->add_option("--seed", args.seed,
                  "Seed for sampled uniqueness sweeps");
}

crawlris::RunOptions run_options(const CommonArgs& args) {
  crawlris::RunOptions opt;
  opt.steps = args.steps;
  opt.elements = args.elements;
  opt.seed = args.seed;
  opt.out_dir = args.out_dir;
  return opt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Quasistatic crawler toolkit: rate-independent evolutions with "
      "directional dry friction"};
  app.require_subcommand(1);

  CommonArgs sim_args, stasis_args, check_args, compare_args, sweep_args;

  CLI::App* sim = app.add_subcommand(
      "simulate", "Run the quasistatic evolution of a scenario");
  add_common(sim, sim_args);

  CLI::App* stasis = app.add_subcommand(
      "stasis", "Stasis-domain geometry and attainable directions");
  add_common(stasis, stasis_args);

  CLI::App* check = app.add_subcommand(
      "check", "Regularity and uniqueness diagnostics of a scenario");
  add_common(check, check_args);

  CLI::App* compare = app.add_subcommand(
      "compare", "Simulated cycle displacement against the closed form");
  add_common(compare, compare_args);

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Simulate every scenario in a list file (parallel)");
  add_common(sweep, sweep_args);

  // Closed forms straight from flags, no scenario file needed.
  CLI::App* oracle = app.add_subcommand(
      "oracle", "Closed-form cycle displacement and switch times");
  std::string type, which;
  double k = 0.0, mu = 0.0, mu_minus = 0.0, mu_plus = 0.0;
  double dL = 0.0, L_max = 0.0, length = 0.0, d_eps = 0.0;
  oracle->add_option("--type", type,
                     "two_point | three_point | continuum | strategy")
      ->required();
  // Only flags the user actually passed reach the oracle, so a missing
  // parameter fails loudly instead of defaulting.
  CLI::Option* o_which =
      oracle->add_option("--which", which, "Strategy letter A, B or C");
  CLI::Option* o_k =
      oracle->add_option("-k,--stiffness", k,
                         "Spring constant / elastic modulus");
  CLI::Option* o_mu = oracle->add_option("--mu", mu, "Friction scale (strategy)");
  CLI::Option* o_mum =
      oracle->add_option("--mu-minus", mu_minus, "Backward friction coefficient");
  CLI::Option* o_mup =
      oracle->add_option("--mu-plus", mu_plus, "Forward friction coefficient");
  CLI::Option* o_dl =
      oracle->add_option("--dL", dL, "Peak rest-length increase (two_point)");
  CLI::Option* o_lmax =
      oracle->add_option("--L-max", L_max, "Peak rest-length increase (strategy)");
  CLI::Option* o_len =
      oracle->add_option("--length", length, "Body length (continuum)");
  CLI::Option* o_deps =
      oracle->add_option("--d-eps", d_eps, "Peak distortion (continuum)");

  CLI11_PARSE(app, argc, argv);

  try {
    crawlris::json out;
    if (sim->parsed()) {
      out = crawlris::run_simulate(crawlris::load_scenario(sim_args.scenario_path),
                                   run_options(sim_args));
    } else if (stasis->parsed()) {
      out = crawlris::run_stasis(
          crawlris::load_scenario(stasis_args.scenario_path),
          run_options(stasis_args));
    } else if (check->parsed()) {
      out = crawlris::run_check(
          crawlris::load_scenario(check_args.scenario_path),
          run_options(check_args));
    } else if (compare->parsed()) {
      out = crawlris::run_compare(
          crawlris::load_scenario(compare_args.scenario_path),
          run_options(compare_args));
    } else if (sweep->parsed()) {
      out = crawlris::run_sweep(sweep_args.scenario_path,
                                run_options(sweep_args));
    } else if (oracle->parsed()) {
      crawlris::json params{{"type", type}};
      if (o_which->count()) params["which"] = which;
      if (o_k->count()) params["k"] = k;
      if (o_mu->count()) params["mu"] = mu;
      if (o_mum->count()) params["mu_minus"] = mu_minus;
      if (o_mup->count()) params["mu_plus"] = mu_plus;
      if (o_dl->count()) params["dL"] = dL;
      if (o_lmax->count()) params["L_max"] = L_max;
      if (o_len->count()) params["length"] = length;
      if (o_deps->count()) params["d_eps"] = d_eps;
      out = crawlris::run_oracle(params);
    }
    std::cout << out.dump(2) << '\n';
    return 0;
  } catch (const crawlris::SchemaError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const crawlris::RegimeBoundaryError& e) {
    std::cerr << "regime boundary: " << e.what() << '\n';
    return 4;
  } catch (const crawlris::SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
