#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "crawlris/continuum.hpp"
#include "crawlris/model.hpp"

namespace crawlris {

/// Requested closed form sits on a regime boundary (threshold equality,
/// critical friction ratio, excluded parameter), where the formulas on
/// the two sides meet or the evolution is not unique.
class RegimeBoundaryError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OracleResult {
  double displacement = 0.0;
  std::map<std::string, double> switch_times;  // slip onsets, cycle units
  std::string regime;
  bool transient = false;  // initial motion that dies out permanently
};

/// Two-point crawler with constant directional friction under a
/// triangle actuation 0 -> dL -> 0: per settled cycle the body advances
/// max(0, dL - 2 mu_min / k) toward the lower-friction direction.
/// Throws RegimeBoundaryError when mu_minus == mu_plus (translation
/// minimizers tie as soon as slip occurs).
OracleResult two_point_constant(double k, double mu_minus, double mu_plus,
                                double dL);

/// Attainable motion directions of the three-point homogeneous chain:
/// "one-way" when one friction side dominates by more than a factor of
/// two (triangular stasis section), "two-way" otherwise (hexagonal).
/// Exact factor-two ratios throw RegimeBoundaryError.
std::string three_point_regime(double mu_minus, double mu_plus);

/// Homogeneous continuous crawler of length l under a uniform triangle
/// distortion 0 -> d_eps -> 0.  Requires mu_minus >= mu_plus > 0; equal
/// coefficients return zero (symmetric body).
OracleResult continuum_homogeneous(double k, double l, double mu_minus,
                                   double mu_plus, double d_eps);

/// Closed-form cycle result of the two-point crawler under one of the
/// three time-modulated friction strategies 'A', 'B', 'C' (defined by
/// strategy_model below), including the slip-onset times t1..t7 where
/// the corresponding regime has them.  Ratios kL_max/mu on a case
/// boundary throw RegimeBoundaryError.
OracleResult strategy_result(char which, double k, double mu, double L_max);

/// Builders for the reference models the closed forms describe.  All
/// programs are cyclic with period 1.
CrawlerModel two_point_model(double k, double mu_minus, double mu_plus,
                             double dL);
CrawlerModel strategy_model(char which, double k, double mu, double L_max);
ContinuumModel continuum_example(double k, double l, double mu_minus,
                                 double mu_plus, double d_eps, int n_elements);

}  // namespace crawlris
