#include "crawlris/model.hpp"

#include <Eigen/Eigenvalues>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace crawlris {

namespace {

// Union-find over point indices, used for the connectivity check.
struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

void check_program_nonnegative(const TimeProgram& p, const std::string& what) {
  for (const auto& bp : p.breakpoints()) {
    if (bp.v < 0.0) {
      throw std::invalid_argument("CrawlerModel: " + what +
                                  " must be nonnegative (value " +
                                  std::to_string(bp.v) + " at t=" +
                                  std::to_string(bp.t) + ")");
    }
  }
}

}  // namespace

void CrawlerModel::validate() const {
  const int n = size();
  if (n < 2) {
    throw std::invalid_argument("CrawlerModel: need at least two points");
  }
  for (int i = 0; i + 1 < n; ++i) {
    if (!(points[i] < points[i + 1])) {
      throw std::invalid_argument(
          "CrawlerModel: reference points must be strictly increasing");
    }
  }
  if (static_cast<int>(friction.size()) != n) {
    throw std::invalid_argument(
        "CrawlerModel: need exactly one friction entry per point (got " +
        std::to_string(friction.size()) + " for " + std::to_string(n) +
        " points)");
  }
  for (int i = 0; i < n; ++i) {
    if (!(friction[i].weight > 0.0)) {
      throw std::invalid_argument("CrawlerModel: friction weight of point " +
                                  std::to_string(i) +
                                  " must be strictly positive");
    }
    check_program_nonnegative(friction[i].mu_minus,
                              "mu_minus of point " + std::to_string(i));
    check_program_nonnegative(friction[i].mu_plus,
                              "mu_plus of point " + std::to_string(i));
  }
  if (springs.empty()) {
    throw std::invalid_argument("CrawlerModel: need at least one spring");
  }
  DisjointSet ds(n);
  for (const Spring& s : springs) {
    if (s.i < 0 || s.i >= n || s.j < 0 || s.j >= n || s.i == s.j) {
      throw std::invalid_argument("CrawlerModel: spring endpoints (" +
                                  std::to_string(s.i) + ", " +
                                  std::to_string(s.j) + ") out of range");
    }
    if (!(s.stiffness > 0.0)) {
      throw std::invalid_argument(
          "CrawlerModel: spring stiffness must be strictly positive");
    }
    ds.unite(s.i, s.j);
  }
  for (int i = 1; i < n; ++i) {
    if (ds.find(i) != ds.find(0)) {
      throw std::invalid_argument(
          "CrawlerModel: spring graph must be connected");
    }
  }
}

Eigen::VectorXd sigma(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd z(n - 1);
  for (Eigen::Index m = 0; m + 1 < n; ++m) z[m] = x[m + 1] - x[m];
  return z;
}

double pi(const Eigen::VectorXd& x) { return x.mean(); }

Eigen::VectorXd chi(const Eigen::VectorXd& z, double y) {
  const Eigen::Index n = z.size() + 1;
  Eigen::VectorXd x(n);
  x[0] = 0.0;
  for (Eigen::Index m = 0; m + 1 < n; ++m) x[m + 1] = x[m] + z[m];
  const double shift = y - x.mean();
  x.array() += shift;
  return x;
}

Eigen::VectorXd embed_shape_force(const Eigen::VectorXd& zeta) {
  const Eigen::Index n = zeta.size() + 1;
  Eigen::VectorXd xi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double prev = (i > 0) ? zeta[i - 1] : 0.0;
    const double cur = (i < n - 1) ? zeta[i] : 0.0;
    xi[i] = prev - cur;
  }
  return xi;
}

Eigen::VectorXd project_shape_force(const Eigen::VectorXd& xi) {
  const Eigen::Index n = xi.size();
  Eigen::VectorXd zeta(n - 1);
  double acc = 0.0;
  for (Eigen::Index m = 0; m + 1 < n; ++m) {
    acc += xi[m];
    zeta[m] = -acc;
  }
  return zeta;
}

QuadraticEnergy QuadraticEnergy::assemble(const CrawlerModel& m) {
  m.validate();
  QuadraticEnergy e;
  e.n_ = m.size();
  e.springs_ = m.springs;
  // Normalize spring orientation so i < j; the energy is symmetric in
  // the endpoints but the shape-space interval form below is not.
  for (Spring& s : e.springs_) {
    if (s.i > s.j) std::swap(s.i, s.j);
  }

  std::vector<Eigen::Triplet<double>> ta;
  std::vector<Eigen::Triplet<double>> tsh;
  for (const Spring& s : e.springs_) {
    const double h = 0.5 * s.stiffness;
    ta.emplace_back(s.i, s.i, h);
    ta.emplace_back(s.j, s.j, h);
    ta.emplace_back(s.i, s.j, -h);
    ta.emplace_back(s.j, s.i, -h);
    // x_j - x_i = z_i + ... + z_{j-1}: the spring couples the shape
    // coordinates of every interval it spans.
    for (int a = s.i; a < s.j; ++a) {
      for (int b = s.i; b < s.j; ++b) {
        tsh.emplace_back(a, b, h);
      }
    }
  }
  e.A_.resize(e.n_, e.n_);
  e.A_.setFromTriplets(ta.begin(), ta.end());
  e.Ash_.resize(e.n_ - 1, e.n_ - 1);
  e.Ash_.setFromTriplets(tsh.begin(), tsh.end());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esA(Eigen::MatrixXd(e.A_),
                                                     Eigen::EigenvaluesOnly);
  e.lambda_max_ = esA.eigenvalues().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esS(Eigen::MatrixXd(e.Ash_),
                                                     Eigen::EigenvaluesOnly);
  e.ash_min_eig_ = esS.eigenvalues().minCoeff();
  if (!(e.ash_min_eig_ > 0.0)) {
    throw std::invalid_argument(
        "QuadraticEnergy: shape-reduced stiffness must be positive definite");
  }
  return e;
}

Eigen::VectorXd QuadraticEnergy::load(double t) const {
  Eigen::VectorXd l = Eigen::VectorXd::Zero(n_);
  for (const Spring& s : springs_) {
    const double f = s.stiffness * s.rest_offset.eval(t);
    l[s.j] += f;
    l[s.i] -= f;
  }
  return l;
}

Eigen::VectorXd QuadraticEnergy::load_sh(double t) const {
  Eigen::VectorXd l = Eigen::VectorXd::Zero(n_ - 1);
  for (const Spring& s : springs_) {
    const double f = s.stiffness * s.rest_offset.eval(t);
    for (int a = s.i; a < s.j; ++a) l[a] += f;
  }
  return l;
}

double QuadraticEnergy::energy(double t, const Eigen::VectorXd& x) const {
  return x.dot(A_ * x) - load(t).dot(x);
}

double QuadraticEnergy::energy_sh(double t, const Eigen::VectorXd& z) const {
  return z.dot(Ash_ * z) - load_sh(t).dot(z);
}

Eigen::VectorXd QuadraticEnergy::grad(double t, const Eigen::VectorXd& x) const {
  return 2.0 * (A_ * x) - load(t);
}

Eigen::VectorXd QuadraticEnergy::tension(double t,
                                         const Eigen::VectorXd& x) const {
  return load(t) - 2.0 * (A_ * x);
}

Eigen::VectorXd QuadraticEnergy::tension_sh(double t,
                                            const Eigen::VectorXd& x) const {
  // The full tension lies in the annihilator of translations, where the
  // partial-sum projection inverts the embedding exactly.
  return project_shape_force(tension(t, x));
}

std::vector<const TimeProgram*> QuadraticEnergy::programs() const {
  std::vector<const TimeProgram*> ps;
  ps.reserve(springs_.size());
  for (const Spring& s : springs_) ps.push_back(&s.rest_offset);
  return ps;
}

}  // namespace crawlris
