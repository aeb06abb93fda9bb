#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "crawlris/time_program.hpp"

namespace crawlris {

/// Elastic link between two material points.  The rest offset L_e(t) is
/// the time-varying actuation length; the spring stores energy
/// (stiffness/2) * (x_j - x_i - L_e(t))^2 up to a state-independent term.
struct Spring {
  int i;
  int j;
  double stiffness;
  TimeProgram rest_offset;
};

/// Directional dry-friction coefficients of one material point.
/// mu_minus resists backward motion, mu_plus forward motion.  The weight
/// scales both (used by the continuum lumping; 1 for plain models).
struct PointFriction {
  TimeProgram mu_minus;
  TimeProgram mu_plus;
  double weight = 1.0;
};

/// Chain-free description of a crawler: material points on a line with
/// actuated springs between them and per-point friction.
struct CrawlerModel {
  std::vector<double> points;   // reference positions, strictly increasing
  std::vector<Spring> springs;  // graph must be connected
  std::vector<PointFriction> friction;  // one entry per point

  int size() const { return static_cast<int>(points.size()); }

  /// Throws std::invalid_argument on structural defects: fewer than two
  /// points, non-increasing points, friction size mismatch, bad spring
  /// indices or stiffness, negative friction values or weights, or a
  /// disconnected spring graph.
  void validate() const;
};

/// Shape coordinates: consecutive differences z_m = x_{m+1} - x_m.
Eigen::VectorXd sigma(const Eigen::VectorXd& x);

/// Translation coordinate: barycenter (1/N) <1, x>.
double pi(const Eigen::VectorXd& x);

/// Inverse of (sigma, pi): the unique x with sigma(x) = z and pi(x) = y.
Eigen::VectorXd chi(const Eigen::VectorXd& z, double y);

/// Adjoint embedding of a shape-space force: (D^T zeta)_i = zeta_{i-1} -
/// zeta_i with out-of-range entries zero.  Its image is the annihilator
/// of translations (components summing to zero).
Eigen::VectorXd embed_shape_force(const Eigen::VectorXd& zeta);

/// Left inverse of embed_shape_force on the annihilator of translations:
/// zeta_m = -(xi_0 + ... + xi_m).
Eigen::VectorXd project_shape_force(const Eigen::VectorXd& xi);

/// Quadratic elastic energy E(t, x) = <A x, x> - <l(t), x> plus the
/// shape-reduced pair (A_sh, l_sh) with E(t, chi(z, y)) = E_sh(t, z).
/// Note the convention carries no extra 1/2: the per-spring 1/2 is baked
/// into A and l, so the gradient is 2 A x - l(t).
class QuadraticEnergy {
 public:
  static QuadraticEnergy assemble(const CrawlerModel& m);

  int n() const { return n_; }
  const Eigen::SparseMatrix<double>& A() const { return A_; }
  const Eigen::SparseMatrix<double>& A_sh() const { return Ash_; }
  Eigen::MatrixXd dense_A() const { return Eigen::MatrixXd(A_); }
  Eigen::MatrixXd dense_A_sh() const { return Eigen::MatrixXd(Ash_); }

  Eigen::VectorXd load(double t) const;     // l(t)
  Eigen::VectorXd load_sh(double t) const;  // l_sh(t)

  double lambda_max() const { return lambda_max_; }
  double ash_min_eigenvalue() const { return ash_min_eig_; }

  double energy(double t, const Eigen::VectorXd& x) const;
  double energy_sh(double t, const Eigen::VectorXd& z) const;
  Eigen::VectorXd grad(double t, const Eigen::VectorXd& x) const;

  /// Full-space tension l(t) - 2 A x: the force the elastic structure
  /// exerts on each point.  Always sums to zero.
  Eigen::VectorXd tension(double t, const Eigen::VectorXd& x) const;

  /// Shape-space tension l_sh(t) - 2 A_sh sigma(x).
  Eigen::VectorXd tension_sh(double t, const Eigen::VectorXd& x) const;

  /// Breakpoint sources for event-aligned time grids.
  std::vector<const TimeProgram*> programs() const;

 private:
  QuadraticEnergy() = default;

  int n_ = 0;
  Eigen::SparseMatrix<double> A_;
  Eigen::SparseMatrix<double> Ash_;
  std::vector<Spring> springs_;
  double lambda_max_ = 0.0;
  double ash_min_eig_ = 0.0;
};

}  // namespace crawlris
