#include "crawlris/stasis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace crawlris {

namespace {

constexpr double kFeasTol = 1e-10;
constexpr double kDedupTol = 1e-9;

// Column i of the embedding D^T as a shape-space vector: +1 at i-1 and
// -1 at i (out-of-range entries dropped).
Eigen::VectorXd embedding_column(int i, int dim) {
  Eigen::VectorXd col = Eigen::VectorXd::Zero(dim);
  if (i - 1 >= 0 && i - 1 < dim) col[i - 1] = 1.0;
  if (i >= 0 && i < dim) col[i] = -1.0;
  return col;
}

bool feasible(const std::vector<Halfspace>& hs, const Eigen::VectorXd& p,
              double scale) {
  for (const auto& h : hs) {
    if (h.normal.dot(p) > h.offset + kFeasTol * scale) return false;
  }
  return true;
}

void push_unique(std::vector<Eigen::VectorXd>& vs, const Eigen::VectorXd& p,
                 double scale) {
  for (const auto& q : vs) {
    if ((q - p).lpNorm<Eigen::Infinity>() <= kDedupTol * scale) return;
  }
  vs.push_back(p);
}

}  // namespace

StasisGeometry build_geometry(const DissipationSpec& d, double t) {
  StasisGeometry g;
  g.t = t;
  const int n = d.n();
  const int dim = n - 1;
  g.box_lo = -d.mu_minus_vec(t);
  g.box_hi = d.mu_plus_vec(t);

  g.halfspaces.reserve(2 * n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd col = embedding_column(i, dim);
    g.halfspaces.push_back({col, g.box_hi[i]});
    g.halfspaces.push_back({-col, -g.box_lo[i]});
  }

  const double scale = std::max(
      {1.0, g.box_lo.cwiseAbs().maxCoeff(), g.box_hi.cwiseAbs().maxCoeff()});

  if (dim == 1) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (const auto& h : g.halfspaces) {
      if (h.normal[0] > 0.5) hi = std::min(hi, h.offset / h.normal[0]);
      if (h.normal[0] < -0.5) lo = std::max(lo, h.offset / h.normal[0]);
    }
    Eigen::VectorXd vlo(1), vhi(1);
    vlo << lo;
    vhi << hi;
    push_unique(g.vertices, vlo, scale);
    push_unique(g.vertices, vhi, scale);
  } else if (dim == 2 || dim == 3) {
    const int m = static_cast<int>(g.halfspaces.size());
    std::vector<int> pick(dim);
    std::iota(pick.begin(), pick.end(), 0);
    // Every vertex is the intersection of dim facet hyperplanes; solve
    // all dim-subsets and keep the feasible, non-degenerate ones.
    auto solve_and_add = [&](const std::vector<int>& idx) {
      Eigen::MatrixXd M(dim, dim);
      Eigen::VectorXd rhs(dim);
      for (int r = 0; r < dim; ++r) {
        M.row(r) = g.halfspaces[idx[r]].normal.transpose();
        rhs[r] = g.halfspaces[idx[r]].offset;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
      if (!lu.isInvertible()) return;
      const Eigen::VectorXd p = lu.solve(rhs);
      if (feasible(g.halfspaces, p, scale)) push_unique(g.vertices, p, scale);
    };
    if (dim == 2) {
      for (int a = 0; a < m; ++a) {
        for (int b = a + 1; b < m; ++b) solve_and_add({a, b});
      }
    } else {
      for (int a = 0; a < m; ++a) {
        for (int b = a + 1; b < m; ++b) {
          for (int c = b + 1; c < m; ++c) solve_and_add({a, b, c});
        }
      }
    }
    // Deterministic lexicographic order.
    std::sort(g.vertices.begin(), g.vertices.end(),
              [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
                for (int i = 0; i < a.size(); ++i) {
                  if (a[i] != b[i]) return a[i] < b[i];
                }
                return false;
              });
  }
  return g;
}

double support_function(const StasisGeometry& g, const Eigen::VectorXd& w) {
  if (g.vertices.empty()) {
    throw std::domain_error(
        "support_function: vertices unavailable for this shape dimension");
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : g.vertices) best = std::max(best, v.dot(w));
  return best;
}

std::vector<int> polygon_order(const std::vector<Eigen::VectorXd>& vertices) {
  if (vertices.empty() || vertices.front().size() != 2) {
    throw std::invalid_argument("polygon_order: need 2-D vertices");
  }
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& v : vertices) c += v;
  c /= static_cast<double>(vertices.size());
  std::vector<int> idx(vertices.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    const double ta = std::atan2(vertices[a][1] - c[1], vertices[a][0] - c[0]);
    const double tb = std::atan2(vertices[b][1] - c[1], vertices[b][0] - c[0]);
    return ta < tb;
  });
  return idx;
}

Admissibility is_admissible(const QuadraticEnergy& e, const DissipationSpec& d,
                            double t, const Eigen::VectorXd& x0, double tol) {
  if (x0.size() != e.n()) {
    throw std::invalid_argument("is_admissible: dimension mismatch");
  }
  const Eigen::VectorXd s = e.tension(t, x0);
  const Eigen::VectorXd lo = -d.mu_minus_vec(t);
  const Eigen::VectorXd hi = d.mu_plus_vec(t);
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < e.n(); ++i) {
    margin = std::min(margin, std::min(s[i] - lo[i], hi[i] - s[i]));
  }
  return {margin >= -tol, margin};
}

DirectionLabel normal_cone_direction(const DissipationSpec& d, double t,
                                     const Eigen::VectorXd& xi, double tol) {
  if (xi.size() != d.n()) {
    throw std::invalid_argument("normal_cone_direction: dimension mismatch");
  }
  const Eigen::VectorXd lo = -d.mu_minus_vec(t);
  const Eigen::VectorXd hi = d.mu_plus_vec(t);
  const double scale =
      std::max({1.0, lo.cwiseAbs().maxCoeff(), hi.cwiseAbs().maxCoeff()});
  DirectionLabel lab;
  for (int i = 0; i < d.n(); ++i) {
    if (xi[i] < lo[i] - tol * scale || xi[i] > hi[i] + tol * scale) {
      throw std::domain_error(
          "normal_cone_direction: force lies outside the admissible box");
    }
    if (xi[i] >= hi[i] - tol * scale) lab.at_upper.push_back(i);
    if (xi[i] <= lo[i] + tol * scale) lab.at_lower.push_back(i);
  }
  const bool up = !lab.at_upper.empty();
  const bool down = !lab.at_lower.empty();
  if (up && down) {
    lab.sign = MotionSign::Any;
  } else if (up) {
    lab.sign = MotionSign::NonNegative;
  } else if (down) {
    lab.sign = MotionSign::NonPositive;
  } else {
    lab.sign = MotionSign::Zero;
  }
  return lab;
}

DirectionLabel shape_boundary_direction(const DissipationSpec& d, double t,
                                        const Eigen::VectorXd& zeta,
                                        double tol) {
  return normal_cone_direction(d, t, embed_shape_force(zeta), tol);
}

}  // namespace crawlris
