#include "crawlris/json_io.hpp"

#include <fstream>
#include <optional>
#include <utility>
#include <vector>

namespace crawlris {
namespace {

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end())
    throw SchemaError(where + "/" + key, "missing required field");
  return *it;
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw SchemaError(where, "expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw SchemaError(where, "expected an integer");
  return j.get<int>();
}

bool get_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) throw SchemaError(where, "expected a boolean");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& where) {
  if (!j.is_string()) throw SchemaError(where, "expected a string");
  return j.get<std::string>();
}

std::vector<double> number_array(const json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(get_number(j[i], where + "/" + std::to_string(i)));
  return out;
}

/// Rejects keys outside the allowed set so typos fail loudly instead of
/// being silently ignored.
void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!j.is_object()) return;
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) throw SchemaError(where + "/" + it.key(), "unknown field");
  }
}

SpatialTerm term_from_json(const json& j, const std::string& where) {
  SpatialTerm t;
  if (j.is_object() && j.contains("program")) {
    check_keys(j, {"program", "profile"}, where);
    t.program = time_program_from_json(j.at("program"), where + "/program");
    t.profile = j.contains("profile")
                    ? number_array(j.at("profile"), where + "/profile")
                    : std::vector<double>{1.0};
  } else {
    t.program = time_program_from_json(j, where);
    t.profile = {1.0};
  }
  return t;
}

std::vector<SpatialTerm> terms_from_json(const json& j,
                                         const std::string& where) {
  // An array whose elements are objects is a list of terms; any other
  // array shape (e.g. [[t, v], ...]) is a single program.
  if (j.is_array() && !j.empty() && j[0].is_object()) {
    std::vector<SpatialTerm> out;
    for (std::size_t i = 0; i < j.size(); ++i)
      out.push_back(term_from_json(j[i], where + "/" + std::to_string(i)));
    return out;
  }
  return {term_from_json(j, where)};
}

json breakpoints_json(const TimeProgram& p) {
  json arr = json::array();
  for (const auto& bp : p.breakpoints()) arr.push_back({bp.t, bp.v});
  return arr;
}

json term_json(const SpatialTerm& t) {
  return {{"program", to_json(t.program)}, {"profile", t.profile}};
}

json vector_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json witness_json(const UniquenessWitness& w) {
  json j{{"t", w.t}};
  if (w.m >= 0) j["m"] = w.m;
  if (!w.subset.empty()) j["subset"] = w.subset;
  return j;
}

}  // namespace

json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path, e.what());
  }
}

TimeProgram time_program_from_json(const json& j, const std::string& where) {
  if (j.is_number()) return TimeProgram::constant(j.get<double>());

  const json* bps = nullptr;
  std::string bw = where;
  std::optional<double> period;
  bool cyclic = false;
  if (j.is_array()) {
    bps = &j;
  } else if (j.is_object()) {
    check_keys(j, {"breakpoints", "period", "cyclic"}, where);
    bps = &require(j, "breakpoints", where);
    bw = where + "/breakpoints";
    if (auto it = j.find("period"); it != j.end())
      period = get_number(*it, where + "/period");
    if (auto it = j.find("cyclic"); it != j.end())
      cyclic = get_bool(*it, where + "/cyclic");
  } else {
    throw SchemaError(where,
                      "expected a number (constant), an array of [t, value] "
                      "pairs, or an object with a breakpoints field");
  }

  if (!bps->is_array() || bps->size() < 2)
    throw SchemaError(bw, "expected at least two [t, value] pairs");
  std::vector<TimeProgram::Breakpoint> pts;
  pts.reserve(bps->size());
  for (std::size_t i = 0; i < bps->size(); ++i) {
    const json& p = (*bps)[i];
    const std::string pw = bw + "/" + std::to_string(i);
    if (!p.is_array() || p.size() != 2)
      throw SchemaError(pw, "expected a [t, value] pair");
    pts.push_back({get_number(p[0], pw + "/0"), get_number(p[1], pw + "/1")});
  }
  if (cyclic && !period) period = pts.back().t - pts.front().t;

  try {
    return TimeProgram(std::move(pts), period);
  } catch (const std::invalid_argument& e) {
    throw SchemaError(where, e.what());
  }
}

CrawlerModel model_from_json(const json& j, const std::string& where) {
  check_keys(j, {"points", "springs", "friction"}, where);
  CrawlerModel m;
  m.points = number_array(require(j, "points", where), where + "/points");

  const json& springs = require(j, "springs", where);
  if (!springs.is_array())
    throw SchemaError(where + "/springs", "expected an array");
  for (std::size_t s = 0; s < springs.size(); ++s) {
    const std::string sw = where + "/springs/" + std::to_string(s);
    const json& spring = springs[s];
    check_keys(spring, {"i", "j", "stiffness", "rest_offset"}, sw);
    Spring sp;
    sp.i = get_int(require(spring, "i", sw), sw + "/i");
    sp.j = get_int(require(spring, "j", sw), sw + "/j");
    sp.stiffness = get_number(require(spring, "stiffness", sw), sw + "/stiffness");
    sp.rest_offset = time_program_from_json(require(spring, "rest_offset", sw),
                                            sw + "/rest_offset");
    m.springs.push_back(std::move(sp));
  }

  const json& fr = require(j, "friction", where);
  const std::string fw = where + "/friction";
  auto one_friction = [](const json& f, const std::string& w) {
    check_keys(f, {"mu_minus", "mu_plus", "weight"}, w);
    PointFriction pf;
    pf.mu_minus =
        time_program_from_json(require(f, "mu_minus", w), w + "/mu_minus");
    pf.mu_plus =
        time_program_from_json(require(f, "mu_plus", w), w + "/mu_plus");
    if (auto it = f.find("weight"); it != f.end())
      pf.weight = get_number(*it, w + "/weight");
    return pf;
  };
  if (fr.is_array()) {
    for (std::size_t i = 0; i < fr.size(); ++i)
      m.friction.push_back(
          one_friction(fr[i], fw + "/" + std::to_string(i)));
  } else {
    // A single friction object broadcasts to every point.
    const PointFriction pf = one_friction(fr, fw);
    m.friction.assign(m.points.size(), pf);
  }

  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(where, e.what());
  }
  return m;
}

ContinuumModel continuum_from_json(const json& j, const std::string& where) {
  check_keys(j,
             {"domain", "length", "elements", "stiffness", "distortion",
              "mu_minus_density", "mu_plus_density"},
             where);
  ContinuumModel c;
  if (auto it = j.find("domain"); it != j.end()) {
    auto d = number_array(*it, where + "/domain");
    if (d.size() != 2)
      throw SchemaError(where + "/domain", "expected [a, b]");
    c.xi_a = d[0];
    c.xi_b = d[1];
  } else if (auto lt = j.find("length"); lt != j.end()) {
    c.xi_a = 0.0;
    c.xi_b = get_number(*lt, where + "/length");
  } else {
    throw SchemaError(where, "needs either domain or length");
  }
  c.n_elements = get_int(require(j, "elements", where), where + "/elements");

  const json& k = require(j, "stiffness", where);
  if (k.is_number())
    c.stiffness = {k.get<double>()};
  else
    c.stiffness = number_array(k, where + "/stiffness");

  c.distortion =
      terms_from_json(require(j, "distortion", where), where + "/distortion");
  c.mu_minus_density = term_from_json(require(j, "mu_minus_density", where),
                                      where + "/mu_minus_density");
  c.mu_plus_density = term_from_json(require(j, "mu_plus_density", where),
                                     where + "/mu_plus_density");

  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(where, e.what());
  }
  return c;
}

SolverConfig solver_config_from_json(const json& j, const std::string& where) {
  check_keys(j,
             {"steps_per_unit_time", "event_align", "prox_tol",
              "max_inner_iters", "tie_break"},
             where);
  SolverConfig cfg;
  if (auto it = j.find("steps_per_unit_time"); it != j.end()) {
    cfg.steps_per_unit_time = get_int(*it, where + "/steps_per_unit_time");
    if (cfg.steps_per_unit_time <= 0)
      throw SchemaError(where + "/steps_per_unit_time", "must be positive");
  }
  if (auto it = j.find("event_align"); it != j.end())
    cfg.event_align = get_bool(*it, where + "/event_align");
  if (auto it = j.find("prox_tol"); it != j.end()) {
    cfg.prox_tol = get_number(*it, where + "/prox_tol");
    if (cfg.prox_tol <= 0.0)
      throw SchemaError(where + "/prox_tol", "must be positive");
  }
  if (auto it = j.find("max_inner_iters"); it != j.end()) {
    cfg.max_inner_iters = get_int(*it, where + "/max_inner_iters");
    if (cfg.max_inner_iters <= 0)
      throw SchemaError(where + "/max_inner_iters", "must be positive");
  }
  if (auto it = j.find("tie_break"); it != j.end()) {
    const std::string s = get_string(*it, where + "/tie_break");
    if (s == "midpoint")
      cfg.tie_break = SolverConfig::TieBreak::Midpoint;
    else if (s == "min_norm")
      cfg.tie_break = SolverConfig::TieBreak::MinNorm;
    else
      throw SchemaError(where + "/tie_break",
                        "expected \"midpoint\" or \"min_norm\"");
  }
  return cfg;
}

json to_json(const TimeProgram& p) {
  json j{{"breakpoints", breakpoints_json(p)}};
  if (p.periodic()) j["period"] = *p.period();
  return j;
}

json to_json(const CrawlerModel& m) {
  json springs = json::array();
  for (const auto& s : m.springs)
    springs.push_back({{"i", s.i},
                       {"j", s.j},
                       {"stiffness", s.stiffness},
                       {"rest_offset", to_json(s.rest_offset)}});
  json friction = json::array();
  for (const auto& f : m.friction)
    friction.push_back({{"mu_minus", to_json(f.mu_minus)},
                        {"mu_plus", to_json(f.mu_plus)},
                        {"weight", f.weight}});
  return {{"points", m.points}, {"springs", springs}, {"friction", friction}};
}

json to_json(const ContinuumModel& c) {
  json distortion = json::array();
  for (const auto& t : c.distortion) distortion.push_back(term_json(t));
  return {{"domain", {c.xi_a, c.xi_b}},
          {"elements", c.n_elements},
          {"stiffness", c.stiffness},
          {"distortion", distortion},
          {"mu_minus_density", term_json(c.mu_minus_density)},
          {"mu_plus_density", term_json(c.mu_plus_density)}};
}

json to_json(const SolverConfig& cfg) {
  return {{"steps_per_unit_time", cfg.steps_per_unit_time},
          {"event_align", cfg.event_align},
          {"prox_tol", cfg.prox_tol},
          {"max_inner_iters", static_cast<long long>(cfg.max_inner_iters)},
          {"tie_break", cfg.tie_break == SolverConfig::TieBreak::Midpoint
                            ? "midpoint"
                            : "min_norm"}};
}

json to_json(const PsiRegularity& r) {
  return {{"alpha_lower", r.alpha_lower},
          {"alpha_upper", r.alpha_upper},
          {"lambda", r.lambda},
          {"psi_regular", r.psi_regular}};
}

json to_json(const UniquenessReport& r) {
  json j{{"holds", r.holds},
         {"condition", r.condition},
         {"partial", r.partial},
         {"ill_conditioned", r.ill_conditioned}};
  j["witness"] = r.witness ? witness_json(*r.witness) : json(nullptr);
  if (!r.isolated_failure_times.empty())
    j["isolated_failure_times"] = r.isolated_failure_times;
  return j;
}

json to_json(const TimeDependentReport& r) {
  return {{"psi", to_json(r.psi)},
          {"almost_everywhere", to_json(r.almost_everywhere)},
          {"uniform", to_json(r.uniform)}};
}

json to_json(const OracleResult& r) {
  json times = json::object();
  for (const auto& [name, value] : r.switch_times) times[name] = value;
  return {{"displacement", r.displacement},
          {"regime", r.regime},
          {"transient", r.transient},
          {"switch_times", times}};
}

std::string direction_label_name(const DirectionLabel& label) {
  switch (label.sign) {
    case MotionSign::Zero:
      return "zero";
    case MotionSign::NonNegative:
      return "forward";
    case MotionSign::NonPositive:
      return "backward";
    case MotionSign::Any:
      return "any";
  }
  return "zero";
}

json stasis_to_json(const StasisGeometry& g, const DissipationSpec& d) {
  const int dim = static_cast<int>(g.box_lo.size()) - 1;
  json j{{"t", g.t},
         {"dimension", dim},
         {"box_lo", vector_json(g.box_lo)},
         {"box_hi", vector_json(g.box_hi)}};

  json hs = json::array();
  for (const auto& h : g.halfspaces)
    hs.push_back({{"normal", vector_json(h.normal)}, {"offset", h.offset}});
  j["halfspaces"] = hs;

  // Vertices with attainable-direction labels, counterclockwise when
  // planar so the polygon can be drawn directly.
  std::vector<int> order(g.vertices.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  if (dim == 2 && g.vertices.size() >= 3) order = polygon_order(g.vertices);

  json verts = json::array();
  for (int idx : order) {
    const Eigen::VectorXd& zeta = g.vertices[idx];
    const DirectionLabel label = shape_boundary_direction(d, g.t, zeta);
    verts.push_back({{"zeta", vector_json(zeta)},
                     {"direction", direction_label_name(label)},
                     {"at_upper", label.at_upper},
                     {"at_lower", label.at_lower}});
  }
  j["vertices"] = verts;

  if (dim == 2 && order.size() >= 2) {
    json edges = json::array();
    for (std::size_t i = 0; i < order.size(); ++i) {
      const Eigen::VectorXd& a = g.vertices[order[i]];
      const Eigen::VectorXd& b = g.vertices[order[(i + 1) % order.size()]];
      const Eigen::VectorXd mid = 0.5 * (a + b);
      const DirectionLabel label = shape_boundary_direction(d, g.t, mid);
      edges.push_back({{"from", static_cast<int>(i)},
                       {"to", static_cast<int>((i + 1) % order.size())},
                       {"midpoint", vector_json(mid)},
                       {"direction", direction_label_name(label)}});
    }
    j["edges"] = edges;
  }
  return j;
}

}  // namespace crawlris
