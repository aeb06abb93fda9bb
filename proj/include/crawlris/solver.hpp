#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "crawlris/dissipation.hpp"
#include "crawlris/model.hpp"

namespace crawlris {

/// Fatal simulation failures: inadmissible initial state, non-coercive
/// dissipation, invalid time span.
class SolverError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  int steps_per_unit_time = 1000;
  bool event_align = true;     // snap the grid to input breakpoints
  double prox_tol = 1e-10;     // subgradient residual, force units
  long max_inner_iters = 100000;
  enum class TieBreak { Midpoint, MinNorm } tie_break = TieBreak::Midpoint;
};

struct StepFlags {
  bool nonunique_vm = false;     // translation minimizer was an interval
  bool boundary_contact = false; // tension within 10 * prox_tol of the box
  bool inner_iter_limit = false; // certificate not reached, best iterate kept
};

struct StepResult {
  Eigen::VectorXd x;
  long iters = 0;
  bool hit_iter_limit = false;
  bool nonunique = false;
  double v_lo = 0.0;  // translation-increment interval when nonunique
  double v_hi = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> x;
  std::vector<Eigen::VectorXd> z;           // sigma(x)
  std::vector<double> y;                    // pi(x)
  std::vector<Eigen::VectorXd> tension_sh;  // shape tension at (t_k, x_k)
  std::vector<double> dissipated;           // cumulative, starts at 0
  std::vector<StepFlags> flags;             // flags[k]: step into sample k
  double y_consistency = 0.0;  // max |pi(x_k) - y reconstructed from v_m|
  TimeDependentReport diagnostics;

  int steps() const { return static_cast<int>(times.size()) - 1; }
};

/// One catch-up step: minimizes <A x, x> - <l(t_next), x> + R(t_next,
/// x - x_prev) by accelerated proximal gradient with the exact
/// coordinatewise prox, stopping when the coordinate-interval
/// subgradient certificate holds within cfg.prox_tol.  When the
/// translation minimizer ties, the returned x carries the configured
/// tie-break (midpoint of the interval by default).
StepResult incremental_step(const QuadraticEnergy& e, const DissipationSpec& d,
                            double t_next, const Eigen::VectorXd& x_prev,
                            const SolverConfig& cfg,
                            const Eigen::VectorXd* warm_delta = nullptr);

/// Exact optimality certificate of a proposed increment: checks
/// -(2 A x_next - l(t)) against the subdifferential of R(t, . - x_prev)
/// coordinate by coordinate within tol.
bool increment_optimality(const QuadraticEnergy& e, const DissipationSpec& d,
                          double t, const Eigen::VectorXd& x_prev,
                          const Eigen::VectorXd& x_next, double tol);

/// Event-aligned quasistatic evolution on [t0, t1].  Throws SolverError
/// when x0 is inadmissible at t0 (the margin is reported in the
/// message).  Uniqueness or regularity defects of use are downgraded to
/// the diagnostics report and per-step flags.
Trajectory simulate(const CrawlerModel& m, const SolverConfig& cfg,
                    const Eigen::VectorXd& x0, double t0, double t1);

/// Largest violation, over all recorded samples, of the sweeping-set
/// invariant: the shape tension must stay in the shape section of the
/// force box.  Returns the max halfspace excess in force units.
double sweeping_invariant_check(const Trajectory& traj,
                                const QuadraticEnergy& e,
                                const DissipationSpec& d);

/// Per-step energy-balance residuals
///   E(t_{k+1}, x_{k+1}) - E(t_k, x_k) + R(t_{k+1}, x_{k+1} - x_k)
///     + <l(t_{k+1}) - l(t_k), x_k>,
/// whose total magnitude shrinks linearly under grid refinement.
std::vector<double> energy_balance(const Trajectory& traj,
                                   const QuadraticEnergy& e,
                                   const DissipationSpec& d);

/// Contiguous runs of steps whose shape rate exceeds rate_threshold.
/// The onset is sharpened by one-cell interpolation: a partial first
/// cell is backdated using the rate of the following full cell.
struct SlipPhase {
  double onset = 0.0;
  double end = 0.0;
  int sign = 0;  // sign of the dominant shape-rate component
};
std::vector<SlipPhase> detect_slip_phases(const Trajectory& traj,
                                          double rate_threshold);

/// Initial-state helpers.  relaxed_state solves for the zero-tension
/// shape at time t (barycenter 0).  boundary_state pins the scalar
/// shape tension at the box edge: compression at the upper edge,
/// elongation at the lower; only defined for two-point models.
Eigen::VectorXd relaxed_state(const QuadraticEnergy& e, double t);
Eigen::VectorXd boundary_state(const QuadraticEnergy& e,
                               const DissipationSpec& d, double t,
                               bool compression);

}  // namespace crawlris
