#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "crawlris/dissipation.hpp"
#include "crawlris/model.hpp"
#include "crawlris/oracle.hpp"

using namespace crawlris;

namespace {

PointFriction constant_friction(double mu_minus, double mu_plus,
                                double weight = 1.0) {
  return {TimeProgram::constant(mu_minus), TimeProgram::constant(mu_plus),
          weight};
}

DissipationSpec random_spec(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> mu(0.1, 3.0);
  std::uniform_real_distribution<double> wt(0.5, 2.0);
  std::vector<PointFriction> pts;
  for (int i = 0; i < n; ++i)
    pts.push_back(constant_friction(mu(rng), mu(rng), wt(rng)));
  return DissipationSpec(std::move(pts));
}

/// Exhaustive subset balance test, the direct form of the uniqueness
/// condition: some subset's backward coefficients match the
/// complement's forward coefficients exactly.
bool brute_force_star(const DissipationSpec& d, double t) {
  const int n = d.n();
  for (unsigned long mask = 0; mask < (1ull << n); ++mask) {
    double balance = 0.0;
    for (int i = 0; i < n; ++i)
      balance += (mask >> i) & 1 ? d.mu_minus(i, t) : -d.mu_plus(i, t);
    if (std::abs(balance) <= kTieTol) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("dissipation value on explicit vectors") {
  DissipationSpec d({constant_friction(2.0, 1.0), constant_friction(3.0, 0.5)});
  Eigen::VectorXd u(2);
  u << 1.5, -2.0;
  // Forward motion pays mu_plus, backward pays mu_minus.
  CHECK(d.eval(0.0, u) == doctest::Approx(1.0 * 1.5 + 3.0 * 2.0));
  u << -1.0, 4.0;
  CHECK(d.eval(0.0, u) == doctest::Approx(2.0 * 1.0 + 0.5 * 4.0));
  CHECK(d.eval(0.0, Eigen::VectorXd::Zero(2)) == 0.0);
}

TEST_CASE("weights scale both coefficients") {
  DissipationSpec d(
      {constant_friction(2.0, 1.0, 3.0), constant_friction(1.0, 1.0)});
  CHECK(d.mu_minus(0, 0.0) == doctest::Approx(6.0));
  CHECK(d.mu_plus(0, 0.0) == doctest::Approx(3.0));
}

TEST_CASE("dissipation is 1-homogeneous and convex along samples") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  const DissipationSpec d = random_spec(rng, 5);
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::VectorXd a(5), b(5);
    for (int i = 0; i < 5; ++i) {
      a[i] = uni(rng);
      b[i] = uni(rng);
    }
    const double lam = 0.25 * (trial % 5);
    CHECK(d.eval(0.0, 1.7 * a) == doctest::Approx(1.7 * d.eval(0.0, a)));
    CHECK(d.eval(0.0, lam * a + (1.0 - lam) * b) <=
          lam * d.eval(0.0, a) + (1.0 - lam) * d.eval(0.0, b) + 1e-12);
    CHECK(d.eval(0.0, a) >= 0.0);
  }
}

TEST_CASE("prox matches the coordinatewise minimizer on a fine grid") {
  std::mt19937 rng(37);
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  std::uniform_real_distribution<double> steps(0.05, 2.0);
  const DissipationSpec d = random_spec(rng, 4);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd v(4);
    for (int i = 0; i < 4; ++i) v[i] = uni(rng);
    const double step = steps(rng);
    const Eigen::VectorXd p = d.prox(0.0, step, v);
    for (int i = 0; i < 4; ++i) {
      // Scan candidate minimizers of 0.5 (u - v)^2 + step * R_i(u): the
      // two shifted stationary points and the kink at zero.
      const double ap = d.mu_plus(i, 0.0), am = d.mu_minus(i, 0.0);
      const auto obj = [&](double u) {
        return 0.5 * (u - v[i]) * (u - v[i]) +
               step * (ap * std::max(u, 0.0) + am * std::max(-u, 0.0));
      };
      double best = obj(0.0), best_u = 0.0;
      for (double cand : {v[i] - step * ap, v[i] + step * am}) {
        if (obj(cand) < best) {
          best = obj(cand);
          best_u = cand;
        }
      }
      CHECK(p[i] == doctest::Approx(best_u).epsilon(1e-12));
    }
  }
}

TEST_CASE("prox threshold band maps to exactly zero") {
  DissipationSpec d({constant_friction(2.0, 1.0), constant_friction(2.0, 1.0)});
  Eigen::VectorXd v(2);
  for (double inside : {-1.9, -0.3, 0.0, 0.7, 0.99}) {
    v << inside, inside;
    CHECK(d.prox(0.0, 1.0, v)[0] == 0.0);
  }
  v << 1.5, -2.5;
  const Eigen::VectorXd p = d.prox(0.0, 1.0, v);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(-0.5));
  CHECK_THROWS_AS(d.prox(0.0, 0.0, v), std::invalid_argument);
}

TEST_CASE("translation reduction picks the heavier point's kink") {
  // Two points, the back one three times heavier: the whole-body
  // translation that minimizes dissipation keeps the heavy point still.
  DissipationSpec d({constant_friction(3.0, 3.0), constant_friction(1.0, 1.0)});
  Eigen::VectorXd w(1);
  w << 2.0;
  const ShapeReduction r = d.shape_reduced(0.0, w);
  CHECK(r.unique);
  CHECK(r.v_m == doctest::Approx(1.0));
  CHECK(r.value == doctest::Approx(2.0));
}

TEST_CASE("translation reduction with asymmetric coefficients") {
  DissipationSpec d({constant_friction(2.0, 1.0), constant_friction(4.0, 0.5)});
  Eigen::VectorXd w(1);
  w << 2.0;
  const ShapeReduction r = d.shape_reduced(0.0, w);
  CHECK(r.unique);
  CHECK(r.v_m == doctest::Approx(1.0));
  CHECK(r.value == doctest::Approx(1.0));
}

TEST_CASE("symmetric pair ties on a whole interval") {
  DissipationSpec d({constant_friction(1.0, 1.0), constant_friction(1.0, 1.0)});
  Eigen::VectorXd w(1);
  w << 2.0;
  const ShapeReduction r = d.shape_reduced(0.0, w);
  CHECK(!r.unique);
  CHECK(r.v_lo == doctest::Approx(-1.0));
  CHECK(r.v_hi == doctest::Approx(1.0));
  CHECK(r.v_m == doctest::Approx(0.0));
  CHECK(r.value == doctest::Approx(2.0));
}

TEST_CASE("translation reduction agrees with kink enumeration") {
  std::mt19937 rng(43);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 5;
    const DissipationSpec d = random_spec(rng, n);
    Eigen::VectorXd w(n - 1);
    for (int i = 0; i < n - 1; ++i) w[i] = uni(rng);

    const ShapeReduction r = d.shape_reduced(0.0, w);

    // The restriction v -> R(chi(w, v)) is piecewise linear, so its
    // minimum sits at one of the kinks v = -chi(w, 0)_i.
    const Eigen::VectorXd c = chi(w, 0.0);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd u = (c.array() - c[i]).matrix();
      best = std::min(best, d.eval(0.0, u));
    }
    CHECK(r.value == doctest::Approx(best).epsilon(1e-12));
    CHECK(d.eval(0.0, (chi(w, 0.0).array() + r.v_m).matrix()) ==
          doctest::Approx(best).epsilon(1e-12));
    if (!r.unique) {
      CHECK(d.eval(0.0, (chi(w, 0.0).array() + r.v_lo).matrix()) ==
            doctest::Approx(best).epsilon(1e-12));
      CHECK(d.eval(0.0, (chi(w, 0.0).array() + r.v_hi).matrix()) ==
            doctest::Approx(best).epsilon(1e-12));
    }
  }
}

TEST_CASE("a side with zero total friction is not coercive") {
  DissipationSpec d({constant_friction(1.0, 0.0), constant_friction(2.0, 0.0)});
  Eigen::VectorXd w(1);
  w << 1.0;
  CHECK_THROWS_AS(d.shape_reduced(0.0, w), std::domain_error);
}

TEST_CASE("frozen-time uniqueness matches brute force on random instances") {
  std::mt19937 rng(53);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 9;
    const DissipationSpec d = random_spec(rng, n);
    const UniquenessReport r = d.check_star(0.0);
    CHECK(r.holds == brute_force_star(d, 0.0));
    CHECK(!r.partial);
  }
}

TEST_CASE("homogeneous coefficients reduce to the vertex-count test") {
  // All coefficients equal: failure iff m mu_minus = (n - m) mu_plus
  // for some integer split m.
  std::vector<PointFriction> pts(4, constant_friction(1.0, 1.0));
  DissipationSpec sym(std::move(pts));
  CHECK(sym.homogeneous_at(0.0));
  const UniquenessReport r = sym.check_star(0.0);
  CHECK(!r.holds);
  CHECK(r.condition == "SBdiscr");
  REQUIRE(r.witness.has_value());
  CHECK(r.witness->m == 2);

  // Three symmetric points never balance: 3 - m = m has no integer
  // solution.
  std::vector<PointFriction> pts3(3, constant_friction(1.0, 1.0));
  DissipationSpec odd(std::move(pts3));
  CHECK(odd.check_star(0.0).holds);
}

TEST_CASE("constructed heterogeneous balance is detected with its subset") {
  // mu_minus of points {0, 2} sums to 3 = mu_plus of points {1, 3}.
  DissipationSpec d({constant_friction(1.0, 9.0), constant_friction(9.0, 1.0),
                     constant_friction(2.0, 9.0),
                     constant_friction(9.0, 2.0)});
  const UniquenessReport r = d.check_star(0.0);
  CHECK(!r.holds);
  CHECK(r.condition == "SBdiscr_asym");
  REQUIRE(r.witness.has_value());
  // The witness subset must balance exactly: backward coefficients of
  // the subset against forward coefficients of the complement.
  const auto& J = r.witness->subset;
  double balance = 0.0;
  for (int i = 0; i < d.n(); ++i) {
    const bool in_subset = std::find(J.begin(), J.end(), i) != J.end();
    balance += in_subset ? d.mu_minus(i, 0.0) : -d.mu_plus(i, 0.0);
  }
  CHECK(std::abs(balance) <= kTieTol);
}

TEST_CASE("large point counts fall back to sampled subsets") {
  std::mt19937 rng(59);
  DissipationSpec d = random_spec(rng, 30);
  StarOptions opts;
  opts.samples = 1 << 12;
  const UniquenessReport r = d.check_star(0.0, opts);
  CHECK(r.partial);
  CHECK(r.holds);  // random real coefficients never balance exactly
}

TEST_CASE("time window separates isolated ties from persistent ones") {
  // Point 0's backward coefficient sweeps through point 1's forward
  // coefficient at t = 0.5 only.
  DissipationSpec crossing(
      {{TimeProgram({{0.0, 0.5}, {1.0, 1.5}}), TimeProgram::constant(2.0),
        1.0},
       {TimeProgram::constant(3.0), TimeProgram::constant(1.0), 1.0}});
  const TimeDependentReport rep = crossing.check_time_dependent(0.0, 1.0);
  CHECK(rep.almost_everywhere.holds);
  REQUIRE(rep.almost_everywhere.isolated_failure_times.size() == 1);
  CHECK(rep.almost_everywhere.isolated_failure_times[0] ==
        doctest::Approx(0.5).epsilon(1e-9));
  CHECK(rep.uniform.holds);

  // A balance holding identically on the whole window is a failure.
  DissipationSpec stuck({constant_friction(1.0, 2.0),
                         constant_friction(3.0, 1.0)});
  const TimeDependentReport bad = stuck.check_time_dependent(0.0, 1.0);
  CHECK(!bad.almost_everywhere.holds);
  REQUIRE(bad.almost_everywhere.witness.has_value());
  CHECK(bad.almost_everywhere.witness->subset == std::vector<int>{0});
}

TEST_CASE("regularity constants of the reference friction programs") {
  {
    const CrawlerModel m = strategy_model('A', 1.0, 1.0, 4.0);
    const DissipationSpec d = DissipationSpec::from_model(m);
    const TimeDependentReport rep = d.check_time_dependent(0.0, 1.0);
    CHECK(rep.psi.alpha_lower == doctest::Approx(0.5));
    CHECK(rep.psi.alpha_upper == doctest::Approx(1.5));
    CHECK(rep.psi.lambda == doctest::Approx(2.0));
    CHECK(rep.psi.psi_regular);
    CHECK(rep.uniform.holds);
  }
  {
    const CrawlerModel m = strategy_model('C', 1.0, 1.0, 4.0);
    const DissipationSpec d = DissipationSpec::from_model(m);
    const TimeDependentReport rep = d.check_time_dependent(0.0, 1.0);
    CHECK(rep.psi.lambda == doctest::Approx(4.0));
    CHECK(rep.psi.psi_regular);
  }
}

TEST_CASE("a vanishing coefficient breaks uniform regularity") {
  DissipationSpec d(
      {{TimeProgram({{0.0, 1.0}, {0.5, 0.0}, {1.0, 1.0}}, 1.0),
        TimeProgram::constant(1.0), 1.0},
       constant_friction(2.0, 1.5)});
  const TimeDependentReport rep = d.check_time_dependent(0.0, 1.0);
  CHECK(rep.psi.alpha_lower == doctest::Approx(0.0));
  CHECK(!rep.psi.psi_regular);
  CHECK(!rep.uniform.holds);
}
