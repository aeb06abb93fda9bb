#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "crawlris/json_io.hpp"
#include "crawlris/solver.hpp"

namespace crawlris {

/// A runnable experiment description, loaded from a JSON file: the body
/// (discrete crawler or continuum), solver settings, time window,
/// initial state and output targets.  Oracle parameters are kept as raw
/// JSON and interpreted by run_oracle / run_compare.
struct Scenario {
  std::optional<CrawlerModel> model;
  std::optional<ContinuumModel> continuum;
  SolverConfig solver;
  double t0 = 0.0;
  double t1 = 1.0;
  std::string initial_state_keyword = "relaxed";
  std::optional<Eigen::VectorXd> initial_state_vector;
  std::vector<double> stasis_times;  // empty means {t0}
  json oracle;                       // null when absent

  struct Outputs {
    std::string trajectory;  // CSV path, empty = skip
    std::string summary;     // JSON path, empty = stdout only
    std::string stasis;      // JSON path
    std::string plot;        // gnuplot-style polygon blocks
  } outputs;
};

Scenario scenario_from_json(const json& j);
Scenario load_scenario(const std::string& path);

struct RunOptions {
  std::optional<int> steps;     // overrides solver.steps_per_unit_time
  std::optional<int> elements;  // overrides the continuum element count
  unsigned long long seed = 0;  // seed for sampled uniqueness sweeps
  std::string out_dir = ".";    // base directory for relative outputs
};

/// The crawler the scenario simulates; discretizes a continuum body.
CrawlerModel scenario_model(const Scenario& sc, const RunOptions& opt);

/// Initial state from the keyword ("relaxed", "max_compression",
/// "max_elongation") or the explicit coordinate vector.
Eigen::VectorXd resolve_initial_state(const Scenario& sc,
                                      const CrawlerModel& m, double t0);

// Subcommand entry points.  Each returns the summary document it also
// writes to the configured output paths (resolved against out_dir).
json run_simulate(const Scenario& sc, const RunOptions& opt);
json run_stasis(const Scenario& sc, const RunOptions& opt);
json run_check(const Scenario& sc, const RunOptions& opt);
json run_oracle(const json& params);
json run_compare(const Scenario& sc, const RunOptions& opt);

/// Runs every scenario listed in the file (paths resolved against the
/// list's directory, or inline objects) and collects the summaries in
/// input order.  Parallel across scenarios; the CRAWLER_RIS_THREADS
/// environment variable caps the worker count.
json run_sweep(const std::string& list_path, const RunOptions& opt);

/// Deterministic trajectory dump: one row per sample, %.17g numbers, a
/// fixed column order announced in the header line.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

std::string format_g17(double v);

}  // namespace crawlris
