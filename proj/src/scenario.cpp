#include "crawlris/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "crawlris/continuum.hpp"
#include "crawlris/oracle.hpp"
#include "crawlris/stasis.hpp"

namespace crawlris {
namespace {

namespace fs = std::filesystem;

std::string resolve_output(const std::string& out_dir, const std::string& rel) {
  fs::path p(rel);
  if (p.is_absolute()) return rel;
  fs::path full = fs::path(out_dir) / p;
  if (full.has_parent_path()) fs::create_directories(full.parent_path());
  return full.string();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

void maybe_write_json(const std::string& out_dir, const std::string& rel,
                      const json& doc) {
  if (rel.empty()) return;
  write_text_file(resolve_output(out_dir, rel), doc.dump(2) + "\n");
}

/// Common period of all actuation and friction programs, when they are
/// all cyclic and agree within relative tolerance.
std::optional<double> common_period(const CrawlerModel& m) {
  std::optional<double> T;
  bool ok = true;
  auto consider = [&](const TimeProgram& p) {
    if (!ok) return;
    if (!p.periodic()) {
      ok = false;
      return;
    }
    const double period = *p.period();
    if (!T)
      T = period;
    else if (std::abs(period - *T) > 1e-9 * std::max(1.0, std::abs(*T)))
      ok = false;
  };
  for (const auto& s : m.springs) consider(s.rest_offset);
  for (const auto& f : m.friction) {
    consider(f.mu_minus);
    consider(f.mu_plus);
  }
  return ok ? T : std::nullopt;
}

/// Index of the sample closest to t, or -1 when it misses by more than
/// tol (the grid is event-aligned, so exact hits are the normal case).
int sample_index_at(const Trajectory& traj, double t, double tol = 1e-9) {
  auto it = std::lower_bound(traj.times.begin(), traj.times.end(), t);
  int best = -1;
  double dist = tol;
  for (auto cand : {it, it == traj.times.begin() ? it : std::prev(it)}) {
    if (cand == traj.times.end()) continue;
    const double d = std::abs(*cand - t);
    if (d <= dist) {
      dist = d;
      best = static_cast<int>(cand - traj.times.begin());
    }
  }
  return best;
}

json flags_summary(const Trajectory& traj) {
  int nonunique = 0, boundary = 0, iter_limit = 0;
  for (const auto& f : traj.flags) {
    nonunique += f.nonunique_vm;
    boundary += f.boundary_contact;
    iter_limit += f.inner_iter_limit;
  }
  return {{"nonunique_steps", nonunique},
          {"boundary_contact_steps", boundary},
          {"iter_limit_steps", iter_limit}};
}

json slip_phases_json(const Trajectory& traj) {
  // Relative rate threshold: a step counts as slip when its shape rate
  // exceeds one thousandth of the fastest step.
  double max_rate = 0.0;
  for (int k = 0; k < traj.steps(); ++k) {
    const double dt = traj.times[k + 1] - traj.times[k];
    if (dt <= 0.0) continue;
    const double r = (traj.z[k + 1] - traj.z[k]).lpNorm<Eigen::Infinity>() / dt;
    max_rate = std::max(max_rate, r);
  }
  json arr = json::array();
  if (max_rate <= 0.0) return arr;
  for (const auto& ph : detect_slip_phases(traj, 1e-3 * max_rate))
    arr.push_back({{"onset", ph.onset}, {"end", ph.end}, {"sign", ph.sign}});
  return arr;
}

OracleResult oracle_result_from_params(const json& params) {
  const std::string where = "/oracle";
  const std::string type =
      params.contains("type") && params["type"].is_string()
          ? params["type"].get<std::string>()
          : throw SchemaError(where + "/type", "missing or non-string");
  auto num = [&](const char* key) {
    if (!params.contains(key) || !params[key].is_number())
      throw SchemaError(where + "/" + key, "missing required number");
    return params[key].get<double>();
  };
  if (type == "two_point")
    return two_point_constant(num("k"), num("mu_minus"), num("mu_plus"),
                              num("dL"));
  if (type == "continuum")
    return continuum_homogeneous(num("k"), num("length"), num("mu_minus"),
                                 num("mu_plus"), num("d_eps"));
  if (type == "strategy") {
    if (!params.contains("which") || !params["which"].is_string() ||
        params["which"].get<std::string>().size() != 1)
      throw SchemaError(where + "/which", "expected \"A\", \"B\" or \"C\"");
    return strategy_result(params["which"].get<std::string>()[0], num("k"),
                           num("mu"), num("L_max"));
  }
  if (type == "three_point") {
    OracleResult r;
    r.regime = three_point_regime(num("mu_minus"), num("mu_plus"));
    return r;
  }
  throw SchemaError(where + "/type",
                    "unknown oracle type \"" + type +
                        "\" (two_point, three_point, continuum, strategy)");
}

/// Reference model matching the oracle parameters, for comparisons that
/// do not carry an explicit body.
CrawlerModel oracle_reference_model(const json& params,
                                    const RunOptions& opt) {
  const std::string type = params["type"].get<std::string>();
  auto num = [&](const char* key) { return params[key].get<double>(); };
  if (type == "two_point")
    return two_point_model(num("k"), num("mu_minus"), num("mu_plus"),
                           num("dL"));
  if (type == "strategy")
    return strategy_model(params["which"].get<std::string>()[0], num("k"),
                          num("mu"), num("L_max"));
  if (type == "continuum") {
    int n = 50;
    if (opt.elements)
      n = *opt.elements;
    else if (params.contains("elements"))
      n = params["elements"].get<int>();
    return discretize(continuum_example(num("k"), num("length"),
                                        num("mu_minus"), num("mu_plus"),
                                        num("d_eps"), n));
  }
  throw SchemaError("/oracle/type",
                    "oracle type \"" + type + "\" has no reference model");
}

unsigned sweep_thread_count(std::size_t jobs) {
  unsigned n = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("CRAWLER_RIS_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) n = static_cast<unsigned>(v);
  }
  if (n < 1) n = 1;
  return static_cast<unsigned>(std::min<std::size_t>(n, jobs));
}

}  // namespace

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("/", "scenario must be an object");
  const char* allowed[] = {"model",         "continuum", "solver",
                           "t0",            "t1",        "initial_state",
                           "stasis_times",  "oracle",    "outputs"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(std::begin(allowed), std::end(allowed),
                     [&](const char* k) { return it.key() == k; }))
      throw SchemaError("/" + it.key(), "unknown field");
  }

  Scenario sc;
  if (j.contains("model") && j.contains("continuum"))
    throw SchemaError("/", "give either model or continuum, not both");
  if (j.contains("model")) sc.model = model_from_json(j["model"]);
  if (j.contains("continuum"))
    sc.continuum = continuum_from_json(j["continuum"]);
  if (!sc.model && !sc.continuum && !j.contains("oracle"))
    throw SchemaError("/", "needs a model, a continuum body, or oracle");

  if (j.contains("solver")) sc.solver = solver_config_from_json(j["solver"]);
  if (j.contains("t0")) {
    if (!j["t0"].is_number()) throw SchemaError("/t0", "expected a number");
    sc.t0 = j["t0"].get<double>();
  }
  if (j.contains("t1")) {
    if (!j["t1"].is_number()) throw SchemaError("/t1", "expected a number");
    sc.t1 = j["t1"].get<double>();
  }
  if (sc.t1 <= sc.t0) throw SchemaError("/t1", "t1 must exceed t0");

  if (j.contains("initial_state")) {
    const json& st = j["initial_state"];
    if (st.is_string()) {
      sc.initial_state_keyword = st.get<std::string>();
      if (sc.initial_state_keyword != "relaxed" &&
          sc.initial_state_keyword != "max_compression" &&
          sc.initial_state_keyword != "max_elongation")
        throw SchemaError("/initial_state",
                          "expected \"relaxed\", \"max_compression\", "
                          "\"max_elongation\" or a coordinate array");
    } else if (st.is_array()) {
      Eigen::VectorXd x(st.size());
      for (std::size_t i = 0; i < st.size(); ++i) {
        if (!st[i].is_number())
          throw SchemaError("/initial_state/" + std::to_string(i),
                            "expected a number");
        x[static_cast<Eigen::Index>(i)] = st[i].get<double>();
      }
      sc.initial_state_vector = std::move(x);
    } else {
      throw SchemaError("/initial_state", "expected a string or an array");
    }
  }

  if (j.contains("stasis_times")) {
    sc.stasis_times = [&] {
      if (!j["stasis_times"].is_array())
        throw SchemaError("/stasis_times", "expected an array of times");
      std::vector<double> ts;
      for (std::size_t i = 0; i < j["stasis_times"].size(); ++i) {
        const json& e = j["stasis_times"][i];
        if (!e.is_number())
          throw SchemaError("/stasis_times/" + std::to_string(i),
                            "expected a number");
        ts.push_back(e.get<double>());
      }
      return ts;
    }();
  }

  if (j.contains("oracle")) sc.oracle = j["oracle"];

  if (j.contains("outputs")) {
    const json& o = j["outputs"];
    if (!o.is_object()) throw SchemaError("/outputs", "expected an object");
    auto path = [&](const char* key) -> std::string {
      auto it = o.find(key);
      if (it == o.end()) return {};
      if (!it->is_string())
        throw SchemaError(std::string("/outputs/") + key,
                          "expected a file name");
      return it->get<std::string>();
    };
    for (auto it = o.begin(); it != o.end(); ++it)
      if (it.key() != "trajectory" && it.key() != "summary" &&
          it.key() != "stasis" && it.key() != "plot")
        throw SchemaError("/outputs/" + it.key(), "unknown field");
    sc.outputs.trajectory = path("trajectory");
    sc.outputs.summary = path("summary");
    sc.outputs.stasis = path("stasis");
    sc.outputs.plot = path("plot");
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  return scenario_from_json(parse_json_file(path));
}

CrawlerModel scenario_model(const Scenario& sc, const RunOptions& opt) {
  if (sc.model) return *sc.model;
  if (sc.continuum) return discretize(*sc.continuum, opt.elements.value_or(0));
  throw SchemaError("/model", "scenario has no body to simulate");
}

Eigen::VectorXd resolve_initial_state(const Scenario& sc,
                                      const CrawlerModel& m, double t0) {
  if (sc.initial_state_vector) {
    if (sc.initial_state_vector->size() != m.size())
      throw SchemaError("/initial_state",
                        "expected " + std::to_string(m.size()) +
                            " coordinates, got " +
                            std::to_string(sc.initial_state_vector->size()));
    return *sc.initial_state_vector;
  }
  const QuadraticEnergy e = QuadraticEnergy::assemble(m);
  if (sc.initial_state_keyword == "relaxed") return relaxed_state(e, t0);
  const DissipationSpec d = DissipationSpec::from_model(m);
  return boundary_state(e, d, t0,
                        sc.initial_state_keyword == "max_compression");
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  const int n = static_cast<int>(traj.x.front().size());
  std::string text;
  text.reserve(64 * traj.times.size() * static_cast<std::size_t>(2 * n + 5));

  text += "t,y";
  for (int i = 0; i + 1 < n; ++i) text += ",z_" + std::to_string(i);
  for (int i = 0; i < n; ++i) text += ",x_" + std::to_string(i);
  for (int i = 0; i + 1 < n; ++i) text += ",tension_" + std::to_string(i);
  text += ",dissipated,nonunique,boundary,iter_limit\n";

  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    text += format_g17(traj.times[k]);
    text += ',';
    text += format_g17(traj.y[k]);
    for (Eigen::Index i = 0; i < traj.z[k].size(); ++i) {
      text += ',';
      text += format_g17(traj.z[k][i]);
    }
    for (Eigen::Index i = 0; i < traj.x[k].size(); ++i) {
      text += ',';
      text += format_g17(traj.x[k][i]);
    }
    for (Eigen::Index i = 0; i < traj.tension_sh[k].size(); ++i) {
      text += ',';
      text += format_g17(traj.tension_sh[k][i]);
    }
    text += ',';
    text += format_g17(traj.dissipated[k]);
    const StepFlags& f = traj.flags[k];
    text += f.nonunique_vm ? ",1" : ",0";
    text += f.boundary_contact ? ",1" : ",0";
    text += f.inner_iter_limit ? ",1" : ",0";
    text += '\n';
  }
  write_text_file(path, text);
}

json run_simulate(const Scenario& sc, const RunOptions& opt) {
  const CrawlerModel m = scenario_model(sc, opt);
  SolverConfig cfg = sc.solver;
  if (opt.steps) cfg.steps_per_unit_time = *opt.steps;

  const Eigen::VectorXd x0 = resolve_initial_state(sc, m, sc.t0);
  const Trajectory traj = simulate(m, cfg, x0, sc.t0, sc.t1);

  const QuadraticEnergy e = QuadraticEnergy::assemble(m);
  const DissipationSpec d = DissipationSpec::from_model(m);

  double energy_defect = 0.0;
  for (double r : energy_balance(traj, e, d)) energy_defect += std::abs(r);

  json summary{{"t0", sc.t0},
               {"t1", sc.t1},
               {"points", m.size()},
               {"steps", traj.steps()},
               {"displacement", traj.y.back() - traj.y.front()},
               {"dissipated", traj.dissipated.back()},
               {"energy_defect", energy_defect},
               {"sweeping_violation", sweeping_invariant_check(traj, e, d)},
               {"y_consistency", traj.y_consistency},
               {"flags", flags_summary(traj)},
               {"slip_phases", slip_phases_json(traj)},
               {"diagnostics", to_json(traj.diagnostics)}};

  // Net advance over each full actuation cycle inside the window.
  if (const auto T = common_period(m)) {
    json cycles = json::array();
    double prev_y = traj.y.front();
    for (double t = sc.t0 + *T; t <= sc.t1 + 1e-9; t += *T) {
      const int idx = sample_index_at(traj, t);
      if (idx < 0) break;
      cycles.push_back(traj.y[idx] - prev_y);
      prev_y = traj.y[idx];
    }
    summary["period"] = *T;
    summary["per_cycle_displacement"] = cycles;
  }

  if (!sc.outputs.trajectory.empty())
    write_trajectory_csv(resolve_output(opt.out_dir, sc.outputs.trajectory),
                         traj);
  maybe_write_json(opt.out_dir, sc.outputs.summary, summary);
  return summary;
}

json run_stasis(const Scenario& sc, const RunOptions& opt) {
  const CrawlerModel m = scenario_model(sc, opt);
  const DissipationSpec d = DissipationSpec::from_model(m);
  std::vector<double> times = sc.stasis_times;
  if (times.empty()) times.push_back(sc.t0);

  json out{{"points", m.size()}, {"geometries", json::array()}};
  std::string plot;
  for (double t : times) {
    const StasisGeometry g = build_geometry(d, t);
    out["geometries"].push_back(stasis_to_json(g, d));

    // One gnuplot-style block per time: ordered vertex rows, polygon
    // closed by repeating the first vertex, blocks separated by blank
    // lines.
    plot += "# t = " + format_g17(t) + "\n";
    std::vector<int> order(g.vertices.size());
    for (std::size_t i = 0; i < order.size(); ++i)
      order[i] = static_cast<int>(i);
    if (g.box_lo.size() == 3 && g.vertices.size() >= 3)
      order = polygon_order(g.vertices);
    auto row = [&](const Eigen::VectorXd& v) {
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) plot += ' ';
        plot += format_g17(v[i]);
      }
      plot += '\n';
    };
    for (int idx : order) row(g.vertices[idx]);
    if (g.box_lo.size() == 3 && !order.empty())
      row(g.vertices[order.front()]);
    plot += '\n';
  }

  maybe_write_json(opt.out_dir, sc.outputs.stasis, out);
  if (!sc.outputs.plot.empty())
    write_text_file(resolve_output(opt.out_dir, sc.outputs.plot), plot);
  return out;
}

json run_check(const Scenario& sc, const RunOptions& opt) {
  const CrawlerModel m = scenario_model(sc, opt);
  const DissipationSpec d = DissipationSpec::from_model(m);
  const QuadraticEnergy e = QuadraticEnergy::assemble(m);
  StarOptions so;
  so.seed = opt.seed;

  json out{{"points", m.size()},
           {"window", to_json(d.check_time_dependent(sc.t0, sc.t1, so))},
           {"energy",
            {{"lambda_max", e.lambda_max()},
             {"shape_min_eigenvalue", e.ash_min_eigenvalue()}}}};

  std::vector<double> times = sc.stasis_times;
  if (times.empty()) times.push_back(sc.t0);
  json frozen = json::array();
  for (double t : times)
    frozen.push_back({{"t", t}, {"report", to_json(d.check_star(t, so))}});
  out["frozen_time"] = frozen;

  maybe_write_json(opt.out_dir, sc.outputs.summary, out);
  return out;
}

json run_oracle(const json& params) {
  if (!params.is_object())
    throw SchemaError("/oracle", "expected an object with oracle parameters");
  const std::string type = params.contains("type") && params["type"].is_string()
                               ? params["type"].get<std::string>()
                               : "";
  if (type == "three_point") {
    auto num = [&](const char* key) {
      if (!params.contains(key) || !params[key].is_number())
        throw SchemaError(std::string("/oracle/") + key,
                          "missing required number");
      return params[key].get<double>();
    };
    return {{"type", type},
            {"regime", three_point_regime(num("mu_minus"), num("mu_plus"))}};
  }
  json out = to_json(oracle_result_from_params(params));
  out["type"] = type;
  return out;
}

json run_compare(const Scenario& sc, const RunOptions& opt) {
  if (sc.oracle.is_null())
    throw SchemaError("/oracle", "compare needs oracle parameters");
  const OracleResult oracle = oracle_result_from_params(sc.oracle);

  const CrawlerModel m = (sc.model || sc.continuum)
                             ? scenario_model(sc, opt)
                             : oracle_reference_model(sc.oracle, opt);
  const auto T = common_period(m);
  if (!T)
    throw SchemaError("/oracle",
                      "compare needs cyclic programs with a common period");

  // Two warm-up cycles wash out the initial transient, the third is
  // measured.
  SolverConfig cfg = sc.solver;
  if (opt.steps) cfg.steps_per_unit_time = *opt.steps;
  const QuadraticEnergy e = QuadraticEnergy::assemble(m);
  const Eigen::VectorXd x0 = relaxed_state(e, 0.0);
  const Trajectory traj = simulate(m, cfg, x0, 0.0, 3.0 * *T);

  const int at_start = sample_index_at(traj, 2.0 * *T);
  if (at_start < 0)
    throw SolverError("measurement cycle boundary missing from the grid");
  const double simulated = traj.y.back() - traj.y[at_start];

  const double abs_err = std::abs(simulated - oracle.displacement);
  const double scale = std::max(1.0, std::abs(oracle.displacement));
  json out{{"oracle", to_json(oracle)},
           {"simulated",
            {{"displacement", simulated},
             {"warmup_cycles", 2},
             {"steps_per_unit_time", cfg.steps_per_unit_time}}},
           {"abs_error", abs_err},
           {"rel_error", abs_err / scale}};
  maybe_write_json(opt.out_dir, sc.outputs.summary, out);
  return out;
}

json run_sweep(const std::string& list_path, const RunOptions& opt) {
  const json list = parse_json_file(list_path);
  const json& entries = list.is_object() && list.contains("scenarios")
                            ? list["scenarios"]
                            : list;
  if (!entries.is_array())
    throw SchemaError("/scenarios", "expected an array of scenarios");

  const fs::path base = fs::path(list_path).parent_path();

  struct Job {
    std::string name;
    Scenario sc;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const json& e = entries[i];
    if (e.is_string()) {
      const fs::path p = base / e.get<std::string>();
      jobs.push_back({p.stem().string(), load_scenario(p.string())});
    } else if (e.is_object()) {
      jobs.push_back(
          {"scenario_" + std::to_string(i), scenario_from_json(e)});
    } else {
      throw SchemaError("/scenarios/" + std::to_string(i),
                        "expected a file name or an inline scenario");
    }
  }

  std::vector<json> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < jobs.size();
         i = next.fetch_add(1)) {
      RunOptions local = opt;
      local.out_dir =
          (fs::path(opt.out_dir) / jobs[i].name).string();
      try {
        results[i] = run_simulate(jobs[i].sc, local);
      } catch (const std::exception& ex) {
        results[i] = {{"error", ex.what()}};
      }
    }
  };
  const unsigned n_threads = sweep_thread_count(jobs.size());
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n_threads; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  json runs = json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i)
    runs.push_back({{"name", jobs[i].name}, {"summary", results[i]}});
  return {{"runs", runs}};
}

}  // namespace crawlris
