#include "crawlris/solver.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "crawlris/stasis.hpp"

namespace crawlris {

namespace {

// A step counts as a shape change when the increment exceeds this
// relative floor; below it the translation minimizer is 0 and no tie
// handling applies.
double activity_tol(const Eigen::VectorXd& z_prev) {
  return 1e-12 * std::max(1.0, z_prev.lpNorm<Eigen::Infinity>());
}

bool certificate_ok(const DissipationSpec& d, double t,
                    const Eigen::VectorXd& u, const Eigen::VectorXd& s,
                    double tol) {
  for (int i = 0; i < u.size(); ++i) {
    const double ap = d.mu_plus(i, t);
    const double am = d.mu_minus(i, t);
    if (u[i] > 0.0) {
      if (std::abs(s[i] - ap) > tol) return false;
    } else if (u[i] < 0.0) {
      if (std::abs(s[i] + am) > tol) return false;
    } else {
      if (s[i] > ap + tol || s[i] < -am - tol) return false;
    }
  }
  return true;
}

/// Direct catch-up solve by primal-dual active sets: guess the slip
/// signs, solve the equilibrium of the slipping coordinates with the
/// friction forces pinned at the corresponding box face, and update the
/// guess from primal (wrong slip sign) and dual (stick force outside
/// the box) violations.  The elastic matrix has non-positive
/// off-diagonal entries, for which this iteration settles in a few
/// rounds; failure (singular all-slip system, cycling) returns false
/// and the caller falls back to the proximal-gradient loop.
bool active_set_solve(const QuadraticEnergy& e, const DissipationSpec& d,
                      double t, const Eigen::VectorXd& g0,
                      const Eigen::VectorXd& warm, double tol,
                      Eigen::VectorXd& u, long& iters) {
  const int n = e.n();
  const Eigen::VectorXd thp = d.mu_plus_vec(t);
  const Eigen::VectorXd thm = d.mu_minus_vec(t);
  const Eigen::SparseMatrix<double>& A = e.A();

  std::vector<int> sign(n, 0);
  const double warm_floor = 1e-9 * warm.lpNorm<Eigen::Infinity>();
  if (warm_floor > 0.0) {
    for (int i = 0; i < n; ++i) {
      if (warm[i] > warm_floor)
        sign[i] = 1;
      else if (warm[i] < -warm_floor)
        sign[i] = -1;
    }
  }

  // Dual slack keeps borderline stick forces from flip-flopping; the
  // final certificate still holds at the full tolerance.
  const double dual_slack = 0.25 * tol;
  std::vector<int> local(n);
  std::vector<char> repaired(n, 0);
  Eigen::VectorXd s_prev = -g0;  // stick forces before any increment
  const long max_rounds = 30 + 2L * n;
  for (long round = 0; round < max_rounds; ++round) {
    std::vector<int> free;
    free.reserve(n);
    for (int i = 0; i < n; ++i) {
      local[i] = -1;
      if (sign[i] != 0) {
        local[i] = static_cast<int>(free.size());
        free.push_back(i);
      }
    }
    // All coordinates slipping leaves the translation undetermined.
    // Unless the friction forces balance exactly (a tie the fallback
    // path resolves), some coordinate must stick: re-stick the one
    // whose stick force was closest to its box face and retry.  Each
    // coordinate is repaired at most once before giving up.
    if (static_cast<int>(free.size()) == n) {
      int stick = -1;
      double least = std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        if (repaired[i]) continue;
        const double excess =
            (sign[i] > 0) ? s_prev[i] - thp[i] : -thm[i] - s_prev[i];
        if (excess < least) {
          least = excess;
          stick = i;
        }
      }
      if (stick < 0) return false;
      repaired[stick] = 1;
      sign[stick] = 0;
      free.clear();
      for (int i = 0; i < n; ++i) {
        local[i] = -1;
        if (sign[i] != 0) {
          local[i] = static_cast<int>(free.size());
          free.push_back(i);
        }
      }
    }

    u.setZero();
    if (!free.empty()) {
      const int m = static_cast<int>(free.size());
      std::vector<Eigen::Triplet<double>> trips;
      for (int c = 0; c < A.outerSize(); ++c) {
        if (local[c] < 0) continue;
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, c); it; ++it) {
          if (local[it.row()] >= 0)
            trips.emplace_back(local[it.row()], local[c], 2.0 * it.value());
        }
      }
      Eigen::SparseMatrix<double> aff(m, m);
      aff.setFromTriplets(trips.begin(), trips.end());
      Eigen::VectorXd rhs(m);
      for (int c = 0; c < m; ++c) {
        const int i = free[c];
        rhs[c] = -g0[i] - (sign[i] > 0 ? thp[i] : -thm[i]);
      }
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(aff);
      if (ldlt.info() != Eigen::Success) return false;
      const Eigen::VectorXd uf = ldlt.solve(rhs);
      if (ldlt.info() != Eigen::Success) return false;
      for (int c = 0; c < m; ++c) u[free[c]] = uf[c];
    }

    const Eigen::VectorXd s = -(g0 + 2.0 * (A * u));
    s_prev = s;
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      if (sign[i] != 0) {
        if (static_cast<double>(sign[i]) * u[i] < 0.0) {
          sign[i] = 0;
          u[i] = 0.0;
          changed = true;
        }
      } else if (s[i] > thp[i] + dual_slack) {
        sign[i] = 1;
        changed = true;
      } else if (s[i] < -thm[i] - dual_slack) {
        sign[i] = -1;
        changed = true;
      }
    }
    if (!changed) {
      iters = round + 1;
      return certificate_ok(d, t, u, s, tol);
    }
  }
  return false;
}

std::vector<double> build_grid(const std::vector<double>& events,
                               const SolverConfig& cfg, double t0, double t1) {
  std::vector<double> grid;
  const double spu = static_cast<double>(cfg.steps_per_unit_time);
  if (cfg.event_align) {
    for (std::size_t s = 0; s + 1 < events.size(); ++s) {
      const double span = events[s + 1] - events[s];
      const long m = std::max<long>(
          1, static_cast<long>(std::ceil(span * spu - 1e-9)));
      for (long j = 0; j < m; ++j) {
        grid.push_back(events[s] + span * static_cast<double>(j) /
                                       static_cast<double>(m));
      }
    }
    grid.push_back(t1);
  } else {
    const long m = std::max<long>(
        1, static_cast<long>(std::ceil((t1 - t0) * spu - 1e-9)));
    for (long j = 0; j <= m; ++j) {
      grid.push_back(t0 + (t1 - t0) * static_cast<double>(j) /
                              static_cast<double>(m));
    }
  }
  return grid;
}

}  // namespace

StepResult incremental_step(const QuadraticEnergy& e, const DissipationSpec& d,
                            double t_next, const Eigen::VectorXd& x_prev,
                            const SolverConfig& cfg,
                            const Eigen::VectorXd* warm_delta) {
  const int n = e.n();
  const Eigen::VectorXd g0 = 2.0 * (e.A() * x_prev) - e.load(t_next);

  StepResult res;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  long as_iters = 0;
  if (active_set_solve(e, d, t_next, g0,
                       warm_delta ? *warm_delta : Eigen::VectorXd::Zero(n),
                       cfg.prox_tol, u, as_iters)) {
    res.iters = as_iters;
  } else {
    // Accelerated proximal gradient with exact coordinatewise prox,
    // gradient restart and one elastic matvec per iteration.
    const double tau = 1.0 / (2.0 * e.lambda_max() + 1e-9);
    u = warm_delta ? *warm_delta : Eigen::VectorXd::Zero(n);
    Eigen::VectorXd au = e.A() * u;
    Eigen::VectorXd yv = u;
    Eigen::VectorXd ay = au;
    double theta = 1.0;

    res.hit_iter_limit = true;
    for (long it = 0; it < cfg.max_inner_iters; ++it) {
      const Eigen::VectorXd gy = g0 + 2.0 * ay;
      const Eigen::VectorXd u_new = d.prox(t_next, tau, yv - tau * gy);
      const Eigen::VectorXd au_new = e.A() * u_new;
      const Eigen::VectorXd s = -(g0 + 2.0 * au_new);
      res.iters = it + 1;
      if (certificate_ok(d, t_next, u_new, s, cfg.prox_tol)) {
        u = u_new;
        res.hit_iter_limit = false;
        break;
      }
      const double theta_next =
          0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      const Eigen::VectorXd diff = u_new - u;
      if (gy.dot(diff) > 0.0) {
        // Momentum points uphill: restart.
        yv = u_new;
        ay = au_new;
        theta = 1.0;
      } else {
        const double beta = (theta - 1.0) / theta_next;
        yv = u_new + beta * diff;
        ay = au_new + beta * (au_new - au);
        theta = theta_next;
      }
      u = u_new;
      au = au_new;
    }
  }

  const Eigen::VectorXd z_prev = sigma(x_prev);
  const Eigen::VectorXd dz = sigma(u);
  if (dz.lpNorm<Eigen::Infinity>() > activity_tol(z_prev)) {
    const ShapeReduction sr = d.shape_reduced(t_next, dz);
    if (!sr.unique) {
      res.nonunique = true;
      res.v_lo = sr.v_lo;
      res.v_hi = sr.v_hi;
      double v_sel = sr.v_m;
      if (cfg.tie_break == SolverConfig::TieBreak::MinNorm) {
        v_sel = std::clamp(0.0, sr.v_lo, sr.v_hi);
      }
      res.x = chi(z_prev + dz, pi(x_prev) + v_sel);
      return res;
    }
  }
  res.x = x_prev + u;
  return res;
}

bool increment_optimality(const QuadraticEnergy& e, const DissipationSpec& d,
                          double t, const Eigen::VectorXd& x_prev,
                          const Eigen::VectorXd& x_next, double tol) {
  const Eigen::VectorXd u = x_next - x_prev;
  const Eigen::VectorXd s = e.load(t) - 2.0 * (e.A() * x_next);
  return certificate_ok(d, t, u, s, tol);
}

Trajectory simulate(const CrawlerModel& m, const SolverConfig& cfg,
                    const Eigen::VectorXd& x0, double t0, double t1) {
  if (!(t0 < t1)) {
    throw SolverError("simulate: need t0 < t1");
  }
  if (cfg.steps_per_unit_time < 1) {
    throw SolverError("simulate: steps_per_unit_time must be at least 1");
  }
  const QuadraticEnergy e = QuadraticEnergy::assemble(m);
  const DissipationSpec d = DissipationSpec::from_model(m);

  const Admissibility adm = is_admissible(e, d, t0, x0);
  if (!adm.admissible) {
    throw SolverError(
        "simulate: initial state is not admissible at t0 (box margin " +
        std::to_string(adm.margin) + ")");
  }

  std::vector<const TimeProgram*> progs = e.programs();
  for (const TimeProgram* p : d.programs()) progs.push_back(p);
  const std::vector<double> grid =
      build_grid(merge_breakpoints(progs, t0, t1), cfg, t0, t1);

  Trajectory traj;
  StarOptions diag_opts;
  diag_opts.samples = 4096;
  traj.diagnostics = d.check_time_dependent(t0, t1, diag_opts);

  const std::size_t count = grid.size();
  traj.times = grid;
  traj.x.reserve(count);
  traj.z.reserve(count);
  traj.y.reserve(count);
  traj.tension_sh.reserve(count);
  traj.dissipated.reserve(count);
  traj.flags.resize(count);

  traj.x.push_back(x0);
  traj.z.push_back(sigma(x0));
  traj.y.push_back(pi(x0));
  traj.tension_sh.push_back(e.tension_sh(t0, x0));
  traj.dissipated.push_back(0.0);

  const double contact_tol = 10.0 * cfg.prox_tol;
  double y_hat = pi(x0);
  Eigen::VectorXd warm = Eigen::VectorXd::Zero(e.n());
  for (std::size_t k = 0; k + 1 < count; ++k) {
    const double t_next = grid[k + 1];
    const Eigen::VectorXd& x_prev = traj.x.back();
    const StepResult r =
        incremental_step(e, d, t_next, x_prev, cfg, &warm);
    const Eigen::VectorXd dx = r.x - x_prev;
    const Eigen::VectorXd dz = sigma(dx);

    StepFlags f;
    f.nonunique_vm = r.nonunique;
    f.inner_iter_limit = r.hit_iter_limit;
    f.boundary_contact =
        is_admissible(e, d, t_next, r.x).margin <= contact_tol;
    traj.flags[k + 1] = f;

    if (dz.lpNorm<Eigen::Infinity>() > activity_tol(traj.z.back())) {
      y_hat += d.shape_reduced(t_next, dz).v_m;
    } else {
      y_hat += pi(dx);
    }
    traj.y_consistency =
        std::max(traj.y_consistency, std::abs(pi(r.x) - y_hat));

    traj.dissipated.push_back(traj.dissipated.back() + d.eval(t_next, dx));
    traj.x.push_back(r.x);
    traj.z.push_back(sigma(r.x));
    traj.y.push_back(pi(r.x));
    traj.tension_sh.push_back(e.tension_sh(t_next, r.x));
    warm = dx;
  }
  return traj;
}

double sweeping_invariant_check(const Trajectory& traj,
                                const QuadraticEnergy& e,
                                const DissipationSpec& d) {
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const Admissibility adm =
        is_admissible(e, d, traj.times[k], traj.x[k], 0.0);
    worst = std::max(worst, -adm.margin);
  }
  return std::max(worst, 0.0);
}

std::vector<double> energy_balance(const Trajectory& traj,
                                   const QuadraticEnergy& e,
                                   const DissipationSpec& d) {
  std::vector<double> res;
  res.reserve(traj.times.size());
  for (std::size_t k = 0; k + 1 < traj.times.size(); ++k) {
    const double tl = traj.times[k];
    const double tr = traj.times[k + 1];
    const Eigen::VectorXd dx = traj.x[k + 1] - traj.x[k];
    const double de = e.energy(tr, traj.x[k + 1]) - e.energy(tl, traj.x[k]);
    const double work = (e.load(tr) - e.load(tl)).dot(traj.x[k]);
    res.push_back(de + d.eval(tr, dx) + work);
  }
  return res;
}

std::vector<SlipPhase> detect_slip_phases(const Trajectory& traj,
                                          double rate_threshold) {
  std::vector<SlipPhase> phases;
  const int steps = traj.steps();
  auto rate = [&](int k) {
    const double dt = traj.times[k + 1] - traj.times[k];
    return (traj.z[k + 1] - traj.z[k]).lpNorm<Eigen::Infinity>() / dt;
  };
  int k = 0;
  while (k < steps) {
    if (rate(k) <= rate_threshold) {
      ++k;
      continue;
    }
    SlipPhase ph;
    ph.onset = traj.times[k];
    // Partial first cell: backdate the onset using the following full
    // cell's rate, which is exact for piecewise-constant slip rates.
    if (k + 1 < steps && rate(k + 1) > rate_threshold) {
      const double r_full = rate(k + 1);
      const double moved = (traj.z[k + 1] - traj.z[k]).lpNorm<Eigen::Infinity>();
      const double back = moved / r_full;
      ph.onset = std::clamp(traj.times[k + 1] - back, traj.times[k],
                            traj.times[k + 1]);
    }
    Eigen::VectorXd total = Eigen::VectorXd::Zero(traj.z.front().size());
    while (k < steps && rate(k) > rate_threshold) {
      total += traj.z[k + 1] - traj.z[k];
      ++k;
    }
    ph.end = traj.times[k];
    int dom = 0;
    total.cwiseAbs().maxCoeff(&dom);
    ph.sign = (total[dom] > 0.0) ? 1 : -1;
    phases.push_back(ph);
  }
  return phases;
}

Eigen::VectorXd relaxed_state(const QuadraticEnergy& e, double t) {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(e.A_sh());
  if (chol.info() != Eigen::Success) {
    throw SolverError("relaxed_state: shape stiffness factorization failed");
  }
  const Eigen::VectorXd z = chol.solve(0.5 * e.load_sh(t));
  return chi(z, 0.0);
}

Eigen::VectorXd boundary_state(const QuadraticEnergy& e,
                               const DissipationSpec& d, double t,
                               bool compression) {
  if (e.n() != 2) {
    throw SolverError(
        "boundary_state: keyword initial states need a two-point model");
  }
  const StasisGeometry g = build_geometry(d, t);
  double lo = g.vertices.front()[0];
  double hi = g.vertices.back()[0];
  if (lo > hi) std::swap(lo, hi);
  const double target = compression ? hi : lo;
  // tension_sh = l_sh - 2 A_sh z = target.
  const double a = Eigen::MatrixXd(e.A_sh())(0, 0);
  const double z = (e.load_sh(t)[0] - target) / (2.0 * a);
  Eigen::VectorXd zs(1);
  zs << z;
  return chi(zs, 0.0);
}

}  // namespace crawlris
