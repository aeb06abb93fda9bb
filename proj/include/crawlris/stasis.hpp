#pragma once

#include <Eigen/Dense>
#include <vector>

#include "crawlris/dissipation.hpp"
#include "crawlris/model.hpp"

namespace crawlris {

/// Closed halfspace {zeta : <normal, zeta> <= offset} in shape space.
struct Halfspace {
  Eigen::VectorXd normal;
  double offset;
};

/// Frozen-time stasis geometry.  The admissible force box C(t) lives in
/// the full dual space; its shape-space section (the set of shape
/// tensions whose embedding stays in the box) is the polytope cut out by
/// the 2N halfspaces below.  Vertices are enumerated exactly for shape
/// dimension at most three and left empty beyond that.
struct StasisGeometry {
  double t = 0.0;
  Eigen::VectorXd box_lo;  // -effective mu_minus
  Eigen::VectorXd box_hi;  // +effective mu_plus
  std::vector<Halfspace> halfspaces;
  std::vector<Eigen::VectorXd> vertices;
};

StasisGeometry build_geometry(const DissipationSpec& d, double t);

/// Support function max_{zeta in C_sh} <zeta, w> from the enumerated
/// vertices.  Requires shape dimension <= 3.
double support_function(const StasisGeometry& g, const Eigen::VectorXd& w);

/// Indices reordering the vertices of a two-dimensional geometry
/// counterclockwise around their centroid.
std::vector<int> polygon_order(const std::vector<Eigen::VectorXd>& vertices);

struct Admissibility {
  bool admissible = false;
  double margin = 0.0;  // min box slack of the tension, negative outside
};

/// Whether x0 is a stasis state at time t: the tension l(t) - 2 A x0
/// lies in the force box within tolerance.
Admissibility is_admissible(const QuadraticEnergy& e, const DissipationSpec& d,
                            double t, const Eigen::VectorXd& x0,
                            double tol = 1e-10);

enum class MotionSign {
  Zero,         // no translation attainable
  NonNegative,  // forward only
  NonPositive,  // backward only
  Any,
};

/// Attainable net-translation signs at a boundary force xi of C(t):
/// coordinates pinned at the upper bound admit forward slip, at the
/// lower bound backward slip, and the barycenter of the per-point cones
/// gives the sign set.  Throws std::domain_error when xi is outside the
/// box beyond tol.
struct DirectionLabel {
  MotionSign sign = MotionSign::Zero;
  std::vector<int> at_upper;
  std::vector<int> at_lower;
};

DirectionLabel normal_cone_direction(const DissipationSpec& d, double t,
                                     const Eigen::VectorXd& xi,
                                     double tol = 1e-10);

/// Same label for a shape-space tension: embeds zeta and delegates.
DirectionLabel shape_boundary_direction(const DissipationSpec& d, double t,
                                        const Eigen::VectorXd& zeta,
                                        double tol = 1e-10);

}  // namespace crawlris
