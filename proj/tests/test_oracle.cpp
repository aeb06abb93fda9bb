#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "crawlris/oracle.hpp"

using namespace crawlris;

TEST_CASE("two-point closed form: direction, magnitude and threshold") {
  OracleResult r = two_point_constant(1.0, 2.0, 1.0, 3.0);
  CHECK(r.displacement == doctest::Approx(1.0));
  CHECK(r.regime == "above-threshold");

  // Swapping the friction sides mirrors the gait.
  r = two_point_constant(1.0, 1.0, 2.0, 3.0);
  CHECK(r.displacement == doctest::Approx(-1.0));

  // Actuation below twice the cheaper coefficient cannot move the body.
  r = two_point_constant(1.0, 2.0, 1.0, 1.5);
  CHECK(r.displacement == 0.0);
  CHECK(r.regime == "below-threshold");

  // Stiffness rescales the threshold, not the raw amplitude.
  r = two_point_constant(2.0, 3.0, 1.0, 2.5);
  CHECK(r.displacement == doctest::Approx(1.5));

  CHECK_THROWS_AS(two_point_constant(1.0, 1.0, 1.0, 3.0),
                  RegimeBoundaryError);
  CHECK_THROWS_AS(two_point_constant(0.0, 2.0, 1.0, 3.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(two_point_constant(1.0, 2.0, 1.0, -0.5),
                  std::invalid_argument);
}

TEST_CASE("three-point regime splits at the factor-two friction ratio") {
  CHECK(three_point_regime(3.0, 1.0) == "one-way");
  CHECK(three_point_regime(1.0, 3.0) == "one-way");
  CHECK(three_point_regime(1.5, 1.0) == "two-way");
  CHECK(three_point_regime(1.0, 1.0) == "two-way");
  CHECK_THROWS_AS(three_point_regime(2.0, 1.0), RegimeBoundaryError);
  CHECK_THROWS_AS(three_point_regime(1.0, 2.0), RegimeBoundaryError);
  CHECK_THROWS_AS(three_point_regime(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("homogeneous continuum closed form") {
  // threshold = mu_plus l / k; above it the body gains
  // l (d_eps - threshold) (mu_minus - mu_plus) / (mu_minus + mu_plus).
  OracleResult r = continuum_homogeneous(2.0, 3.0, 5.0, 1.0, 4.0);
  CHECK(r.displacement == doctest::Approx(5.0));
  CHECK(r.regime == "above-threshold");

  r = continuum_homogeneous(1.0, 1.0, 2.0, 1.0, 0.8);
  CHECK(r.displacement == 0.0);
  CHECK(r.regime == "below-threshold");

  r = continuum_homogeneous(1.0, 1.0, 2.0, 2.0, 4.0);
  CHECK(r.displacement == 0.0);
  CHECK(r.regime == "symmetric");

  CHECK_THROWS_AS(continuum_homogeneous(1.0, 1.0, 1.0, 2.0, 4.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(continuum_homogeneous(1.0, -1.0, 2.0, 1.0, 4.0),
                  std::invalid_argument);
}

TEST_CASE("strategy A worked example and case boundaries") {
  const OracleResult r = strategy_result('A', 1.0, 1.0, 4.0);
  CHECK(r.displacement == doctest::Approx(2.0));
  CHECK(r.regime == "slip-dual-rate");
  CHECK(r.switch_times.at("t1") == doctest::Approx(0.2));
  CHECK(r.switch_times.at("second_onset") == doctest::Approx(0.7));

  // Ratio in (2, 3): same displacement through the single-rate formula.
  const OracleResult s = strategy_result('A', 1.0, 1.0, 2.5);
  CHECK(s.displacement == doctest::Approx(0.5));
  CHECK(s.regime == "slip-single-rate");
  CHECK(s.switch_times.at("t2") ==
        doctest::Approx(1.0 / (2.0 * (2.5 - 1.0))));

  // Ratio below 1: the very first cycle moves, then stasis forever.
  const OracleResult t = strategy_result('A', 1.0, 1.0, 0.8);
  CHECK(t.displacement == 0.0);
  CHECK(t.regime == "stasis-transient");
  CHECK(t.transient);

  const OracleResult u = strategy_result('A', 1.0, 1.0, 1.5);
  CHECK(u.displacement == 0.0);
  CHECK(u.regime == "stasis");
  CHECK(!u.transient);

  for (double at : {1.0, 2.0, 3.0}) {
    CHECK_THROWS_AS(strategy_result('A', 1.0, 1.0, at), RegimeBoundaryError);
  }
}

TEST_CASE("strategy B worked example, boundaries and continuity") {
  const OracleResult r = strategy_result('B', 1.0, 1.0, 2.0);
  CHECK(r.displacement == doctest::Approx(1.0));
  CHECK(r.regime == "slip-single-rate");
  CHECK(r.switch_times.at("t4") == doctest::Approx(1.0 / 3.0));

  CHECK(strategy_result('B', 1.0, 1.0, 0.5).regime == "stasis");
  CHECK(strategy_result('B', 1.0, 1.0, 5.0).displacement ==
        doctest::Approx(2.0));  // dual-rate caps at 2 mu / k

  for (double at : {1.0, 3.0}) {
    CHECK_THROWS_AS(strategy_result('B', 1.0, 1.0, at), RegimeBoundaryError);
  }

  // The two slip formulas meet across the ratio-3 boundary.
  const double below = strategy_result('B', 1.0, 1.0, 3.0 - 1e-6).displacement;
  const double above = strategy_result('B', 1.0, 1.0, 3.0 + 1e-6).displacement;
  CHECK(std::abs(below - above) < 1e-5);
  CHECK(below == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("strategy C worked example and boundaries") {
  const OracleResult r = strategy_result('C', 1.0, 1.0, 3.0);
  CHECK(r.displacement == doctest::Approx(1.0));
  CHECK(r.regime == "slip-early-return");
  CHECK(r.switch_times.at("t5") == doctest::Approx(1.0 / 6.0));
  CHECK(r.switch_times.at("t6") == doctest::Approx(5.0 / 6.0));

  const OracleResult late = strategy_result('C', 1.0, 1.0, 5.0);
  CHECK(late.regime == "slip-late-return");
  CHECK(late.displacement == doctest::Approx(3.0));
  CHECK(late.switch_times.at("t7") ==
        doctest::Approx(0.5 + 3.0 / 14.0));

  CHECK(strategy_result('C', 1.0, 1.0, 1.5).regime == "stasis");
  for (double at : {2.0, 4.0}) {
    CHECK_THROWS_AS(strategy_result('C', 1.0, 1.0, at), RegimeBoundaryError);
  }
  CHECK_THROWS_AS(strategy_result('D', 1.0, 1.0, 3.0), std::invalid_argument);
}

TEST_CASE("strategy displacements scale with the actuation length") {
  // Fixing k L_max / mu fixes the regime; displacement scales like
  // mu / k, and jointly scaling k and mu changes nothing.
  for (char which : {'A', 'B', 'C'}) {
    const OracleResult base = strategy_result(which, 1.0, 1.0, 3.5);
    const OracleResult stretched = strategy_result(which, 1.0, 2.0, 7.0);
    CHECK(stretched.displacement ==
          doctest::Approx(2.0 * base.displacement));
    const OracleResult stiffened = strategy_result(which, 4.0, 4.0, 3.5);
    CHECK(stiffened.displacement == doctest::Approx(base.displacement));
    for (const auto& [name, value] : base.switch_times) {
      CHECK(stretched.switch_times.at(name) == doctest::Approx(value));
      CHECK(stiffened.switch_times.at(name) == doctest::Approx(value));
    }
  }
}

TEST_CASE("strategies A and C agree wherever both slip") {
  for (double ratio : {2.5, 3.5, 5.0}) {
    const double a = strategy_result('A', 1.0, 1.0, ratio).displacement;
    const double c = strategy_result('C', 1.0, 1.0, ratio).displacement;
    CHECK(a == doctest::Approx(c));
  }
}

TEST_CASE("reference model builders produce valid cyclic models") {
  const CrawlerModel tp = two_point_model(1.0, 2.0, 1.0, 3.0);
  CHECK_NOTHROW(tp.validate());
  CHECK(tp.springs[0].rest_offset.periodic());

  for (char which : {'A', 'B', 'C'}) {
    const CrawlerModel m = strategy_model(which, 1.0, 1.0, 3.5);
    CHECK_NOTHROW(m.validate());
    for (const PointFriction& f : m.friction) {
      CHECK(f.mu_minus.periodic());
      CHECK(*f.mu_minus.period() == doctest::Approx(1.0));
    }
  }
  // Strategy A halves the rear coefficient while raising the front one.
  const CrawlerModel a = strategy_model('A', 1.0, 1.0, 3.5);
  CHECK(a.friction[0].mu_minus.eval(0.25) == doctest::Approx(1.5));
  CHECK(a.friction[1].mu_minus.eval(0.25) == doctest::Approx(0.5));
  CHECK(a.friction[0].mu_minus.eval(0.75) == doctest::Approx(0.5));
  CHECK(a.friction[1].mu_minus.eval(0.75) == doctest::Approx(1.5));
  CHECK_THROWS_AS(strategy_model('X', 1.0, 1.0, 3.5), std::invalid_argument);

  const ContinuumModel c = continuum_example(1.0, 1.0, 2.0, 1.0, 4.0, 8);
  CHECK_NOTHROW(c.validate());
  CHECK(c.uniform_profiles());
}
