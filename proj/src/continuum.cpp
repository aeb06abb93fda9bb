#include "crawlris/continuum.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace crawlris {

namespace {

void check_profile(const SpatialTerm& term, int n, const std::string& what) {
  const std::size_t sz = term.profile.size();
  if (sz != 1 && sz != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("ContinuumModel: " + what +
                                " profile must have one entry or one per "
                                "element");
  }
}

double profile_at(const SpatialTerm& term, int e) {
  return term.profile.size() == 1 ? term.profile[0]
                                  : term.profile[static_cast<std::size_t>(e)];
}

void check_nonnegative_field(const SpatialTerm& term, const std::string& what) {
  for (double p : term.profile) {
    if (p < 0.0) {
      throw std::invalid_argument("ContinuumModel: " + what +
                                  " profile must be nonnegative");
    }
  }
  for (const auto& bp : term.program.breakpoints()) {
    if (bp.v < 0.0) {
      throw std::invalid_argument("ContinuumModel: " + what +
                                  " program must be nonnegative");
    }
  }
}

}  // namespace

void ContinuumModel::validate() const {
  if (!(xi_a < xi_b)) {
    throw std::invalid_argument("ContinuumModel: need xi_a < xi_b");
  }
  if (n_elements < 1) {
    throw std::invalid_argument("ContinuumModel: need at least one element");
  }
  if (stiffness.size() != 1 &&
      stiffness.size() != static_cast<std::size_t>(n_elements)) {
    throw std::invalid_argument(
        "ContinuumModel: stiffness must have one entry or one per element");
  }
  for (double k : stiffness) {
    if (!(k > 0.0)) {
      throw std::invalid_argument(
          "ContinuumModel: stiffness must be strictly positive");
    }
  }
  for (const auto& term : distortion) {
    check_profile(term, n_elements, "distortion");
  }
  check_profile(mu_minus_density, n_elements, "mu_minus");
  check_profile(mu_plus_density, n_elements, "mu_plus");
  check_nonnegative_field(mu_minus_density, "mu_minus");
  check_nonnegative_field(mu_plus_density, "mu_plus");
}

bool ContinuumModel::uniform_profiles() const {
  if (stiffness.size() != 1) return false;
  for (const auto& term : distortion) {
    if (term.profile.size() != 1) return false;
  }
  return mu_minus_density.profile.size() == 1 &&
         mu_plus_density.profile.size() == 1;
}

CrawlerModel discretize(const ContinuumModel& c, int n) {
  c.validate();
  if (n == 0) {
    n = c.n_elements;
  } else if (n != c.n_elements && !c.uniform_profiles()) {
    throw std::invalid_argument(
        "discretize: re-meshing needs broadcast (single-entry) profiles");
  }
  if (n < 1) {
    throw std::invalid_argument("discretize: need at least one element");
  }

  const double h = c.length() / static_cast<double>(n);
  CrawlerModel m;
  m.points.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    m.points[i] = c.xi_a + h * static_cast<double>(i);
  }

  // Reference span for constant programs when a field has no terms.
  const TimeProgram& ref = c.mu_minus_density.program;

  m.springs.reserve(n);
  for (int e = 0; e < n; ++e) {
    const double k_e =
        c.stiffness.size() == 1 ? c.stiffness[0]
                                : c.stiffness[static_cast<std::size_t>(e)];
    TimeProgram rest = c.distortion.empty()
                           ? TimeProgram::constant(0.0, ref.t_begin(),
                                                   ref.t_end())
                           : [&] {
                               std::vector<std::pair<double, const TimeProgram*>>
                                   terms;
                               terms.reserve(c.distortion.size());
                               for (const auto& term : c.distortion) {
                                 terms.emplace_back(h * profile_at(term, e),
                                                    &term.program);
                               }
                               return combine(terms);
                             }();
    m.springs.push_back({e, e + 1, k_e / h, std::move(rest)});
  }

  m.friction.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    // Hat-function lumping: integral of the density against the nodal
    // hat equals half the neighboring element masses.
    const double wl = (i > 0) ? 0.5 * h : 0.0;
    const double wr = (i < n) ? 0.5 * h : 0.0;
    double cm = 0.0;
    double cp = 0.0;
    if (i > 0) {
      cm += wl * profile_at(c.mu_minus_density, i - 1);
      cp += wl * profile_at(c.mu_plus_density, i - 1);
    }
    if (i < n) {
      cm += wr * profile_at(c.mu_minus_density, i);
      cp += wr * profile_at(c.mu_plus_density, i);
    }
    PointFriction f;
    f.mu_minus = combine({{cm, &c.mu_minus_density.program}});
    f.mu_plus = combine({{cp, &c.mu_plus_density.program}});
    f.weight = 1.0;
    m.friction.push_back(std::move(f));
  }
  return m;
}

std::vector<CycleDisplacement> converged_cycle_displacement(
    const ContinuumModel& c, const SolverConfig& cfg,
    const std::vector<int>& n_sequence) {
  c.validate();
  const TimeProgram& ref = c.mu_minus_density.program;
  if (!ref.periodic()) {
    throw std::invalid_argument(
        "converged_cycle_displacement: friction programs must be cyclic");
  }
  const double period = *ref.period();
  auto check_period = [&](const TimeProgram& p, const char* what) {
    if (!p.periodic() || std::abs(*p.period() - period) > 1e-12) {
      throw std::invalid_argument(
          std::string("converged_cycle_displacement: ") + what +
          " must share the common period");
    }
  };
  check_period(c.mu_plus_density.program, "mu_plus");
  for (const auto& term : c.distortion) check_period(term.program, "distortion");

  std::vector<CycleDisplacement> out;
  out.reserve(n_sequence.size());
  for (int n : n_sequence) {
    const CrawlerModel m = discretize(c, n);
    const QuadraticEnergy e = QuadraticEnergy::assemble(m);
    const double t0 = ref.t_begin();
    const Eigen::VectorXd x0 = relaxed_state(e, t0);
    const Trajectory traj = simulate(m, cfg, x0, t0, t0 + 2.0 * period);
    // The measured cycle starts after one warm-up period; event
    // alignment guarantees a sample exactly at t0 + period.
    double y_mid = 0.0;
    bool found = false;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      if (std::abs(traj.times[k] - (t0 + period)) <= 1e-12) {
        y_mid = traj.y[k];
        found = true;
        break;
      }
    }
    if (!found) {
      throw SolverError(
          "converged_cycle_displacement: no sample at the period boundary");
    }
    out.push_back({n, traj.y.back() - y_mid, period});
  }
  return out;
}

}  // namespace crawlris
