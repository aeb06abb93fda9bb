#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "crawlris/model.hpp"
#include "crawlris/time_program.hpp"

namespace crawlris {

/// Result of minimizing the dissipation over the translation component
/// at fixed shape velocity w: value = R_sh(t, w), minimizers form the
/// closed interval [v_lo, v_hi], and v_m is the selected representative
/// (the midpoint).  near_tie warns that the slope came within 1e-9 of a
/// tie without crossing the 1e-12 collapse tolerance.
struct ShapeReduction {
  double value = 0.0;
  double v_lo = 0.0;
  double v_hi = 0.0;
  double v_m = 0.0;
  bool unique = true;
  bool near_tie = false;
};

/// Witness of a uniqueness failure: either the vertex count m (all
/// friction coefficients equal) or the subset J of points whose backward
/// coefficients balance the forward coefficients of the complement.
struct UniquenessWitness {
  double t = 0.0;
  int m = -1;               // homogeneous witness, -1 when unused
  std::vector<int> subset;  // heterogeneous witness, empty when unused
};

struct UniquenessReport {
  bool holds = true;
  std::string condition;  // "SBdiscr", "SBdiscr_asym", "diamond", "diamond2"
  std::optional<UniquenessWitness> witness;
  bool partial = false;          // subset test sampled, not exhaustive
  bool ill_conditioned = false;  // some balance within 1e-9 of zero
  std::vector<double> isolated_failure_times;  // measure-zero tie times
};

/// Constants of the weighted-l1 comparison norm Psi(x) = sum_i w_i|x_i|:
/// alpha_lower * Psi <= R(t, .) <= alpha_upper * Psi for all t in the
/// checked window, and |R(t, x) - R(s, x)| <= lambda |t - s| Psi(x).
struct PsiRegularity {
  double alpha_lower = 0.0;
  double alpha_upper = 0.0;
  double lambda = 0.0;
  bool psi_regular = false;  // alpha_lower > 0
};

/// Well-posedness of the time-dependent evolution needs both parts:
/// translation uniqueness at almost every time ("diamond") and the
/// quantitative regularity/coercivity of the dissipation ("diamond2",
/// which for this friction class reduces to a positive uniform lower
/// coefficient bound).  Either may fail alone.
struct TimeDependentReport {
  PsiRegularity psi;
  UniquenessReport almost_everywhere;  // condition "diamond"
  UniquenessReport uniform;            // condition "diamond2"
};

struct StarOptions {
  int exhaustive_limit = 24;  // largest N for the full subset sweep
  int samples = 1 << 17;      // random subsets beyond that
  unsigned long long seed = 0;
};

/// Directional dry friction R(t, u) = sum_i w_i (mu_plus_i(t) u_i^+ +
/// mu_minus_i(t) u_i^-) with u^- = max(-u, 0).  Convex, continuous and
/// positively 1-homogeneous in u for every t.
class DissipationSpec {
 public:
  explicit DissipationSpec(std::vector<PointFriction> points);
  static DissipationSpec from_model(const CrawlerModel& m);

  int n() const { return static_cast<int>(points_.size()); }

  /// Effective coefficients weight_i * mu_i(t).
  double mu_minus(int i, double t) const;
  double mu_plus(int i, double t) const;
  Eigen::VectorXd mu_minus_vec(double t) const;
  Eigen::VectorXd mu_plus_vec(double t) const;

  double eval(double t, const Eigen::VectorXd& u) const;

  /// Proximal map of step * R(t, .): coordinatewise asymmetric
  /// soft-threshold with forward threshold step * w_i mu_plus_i(t) and
  /// backward threshold step * w_i mu_minus_i(t).
  Eigen::VectorXd prox(double t, double step, const Eigen::VectorXd& v) const;

  /// Shape-reduced dissipation: minimizes v -> R(t, chi(w, v)) by an
  /// exact scan of the sorted slope breakpoints.  Throws
  /// std::domain_error when a side has zero total friction (the
  /// restriction is not coercive and no minimizer exists in general).
  ShapeReduction shape_reduced(double t, const Eigen::VectorXd& w) const;

  /// Frozen-time translation-uniqueness test: no subset of backward
  /// coefficients balances the complementary forward coefficients.  All
  /// coefficients equal reduces the test to the N+1 vertex counts m.
  UniquenessReport check_star(double t, const StarOptions& opts = {}) const;

  /// Window diagnostics: Psi-regularity constants over [t0, t1] plus the
  /// almost-everywhere and uniform uniqueness conditions.  Ties at
  /// isolated times are tolerated (reported separately); a balance that
  /// holds identically on a grid segment is a failure.
  TimeDependentReport check_time_dependent(double t0, double t1,
                                           const StarOptions& opts = {}) const;

  /// True when all effective coefficients at time t coincide on each
  /// side (within 1e-12 absolute).
  bool homogeneous_at(double t) const;

  std::vector<const TimeProgram*> programs() const;
  const std::vector<PointFriction>& points() const { return points_; }

 private:
  std::vector<PointFriction> points_;
};

/// Absolute tolerance below which a slope or balance counts as an exact
/// tie, and the warn band above it.
inline constexpr double kTieTol = 1e-12;
inline constexpr double kTieWarnTol = 1e-9;

}  // namespace crawlris
