#include "crawlris/oracle.hpp"

#include <cmath>

namespace crawlris {

namespace {

constexpr double kBoundaryRelTol = 1e-9;

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) {
    throw std::invalid_argument(std::string(what) + " must be positive");
  }
}

bool near(double a, double b) {
  return std::abs(a - b) <= kBoundaryRelTol * std::max({1.0, std::abs(a),
                                                        std::abs(b)});
}

TimeProgram scaled_cycle(std::vector<TimeProgram::Breakpoint> pts,
                         double scale) {
  for (auto& p : pts) p.v *= scale;
  return TimeProgram(std::move(pts), 1.0);
}

}  // namespace

OracleResult two_point_constant(double k, double mu_minus, double mu_plus,
                                double dL) {
  require_positive(k, "k");
  require_positive(mu_minus, "mu_minus");
  require_positive(mu_plus, "mu_plus");
  if (dL < 0.0) {
    throw std::invalid_argument("dL must be nonnegative");
  }
  if (near(mu_minus, mu_plus)) {
    throw RegimeBoundaryError(
        "two_point_constant: equal friction sides leave the translation "
        "undetermined during slip");
  }
  const double mu_min = std::min(mu_minus, mu_plus);
  const double gait = dL - 2.0 * mu_min / k;
  OracleResult r;
  if (gait <= 0.0) {
    r.displacement = 0.0;
    r.regime = "below-threshold";
  } else {
    // The lower-friction side is the cheaper one to move, so the body
    // drifts toward it: forward when mu_plus is smaller.
    r.displacement = (mu_plus < mu_minus) ? gait : -gait;
    r.regime = "above-threshold";
  }
  return r;
}

std::string three_point_regime(double mu_minus, double mu_plus) {
  require_positive(mu_minus, "mu_minus");
  require_positive(mu_plus, "mu_plus");
  if (near(mu_minus, 2.0 * mu_plus) || near(mu_plus, 2.0 * mu_minus)) {
    throw RegimeBoundaryError(
        "three_point_regime: friction ratio exactly two is the degenerate "
        "triangle/hexagon transition");
  }
  if (mu_minus > 2.0 * mu_plus || mu_plus > 2.0 * mu_minus) {
    return "one-way";
  }
  return "two-way";
}

OracleResult continuum_homogeneous(double k, double l, double mu_minus,
                                   double mu_plus, double d_eps) {
  require_positive(k, "k");
  require_positive(l, "l");
  require_positive(mu_minus, "mu_minus");
  require_positive(mu_plus, "mu_plus");
  if (d_eps < 0.0) {
    throw std::invalid_argument("d_eps must be nonnegative");
  }
  OracleResult r;
  if (near(mu_minus, mu_plus)) {
    r.displacement = 0.0;
    r.regime = "symmetric";
    return r;
  }
  if (mu_minus < mu_plus) {
    throw std::invalid_argument(
        "continuum_homogeneous: orient the body so mu_minus > mu_plus");
  }
  const double threshold = mu_plus * l / k;
  if (d_eps <= threshold) {
    r.displacement = 0.0;
    r.regime = "below-threshold";
  } else {
    r.displacement = l * (d_eps - threshold) * (mu_minus - mu_plus) /
                     (mu_minus + mu_plus);
    r.regime = "above-threshold";
  }
  return r;
}

OracleResult strategy_result(char which, double k, double mu, double L_max) {
  require_positive(k, "k");
  require_positive(mu, "mu");
  require_positive(L_max, "L_max");
  const double r = k * L_max / mu;
  OracleResult out;

  auto boundary = [&](double at) {
    if (near(r, at)) {
      throw RegimeBoundaryError(
          std::string("strategy_result: kL_max/mu sits on the case boundary ") +
          std::to_string(at));
    }
  };

  switch (which) {
    case 'A': {
      boundary(1.0);
      boundary(2.0);
      boundary(3.0);
      if (r < 1.0) {
        out.displacement = 0.0;
        out.regime = "stasis-transient";
        out.transient = true;
      } else if (r < 2.0) {
        out.displacement = 0.0;
        out.regime = "stasis";
      } else if (r < 3.0) {
        out.displacement = L_max - 2.0 * mu / k;
        out.regime = "slip-single-rate";
        const double t2 = mu / (2.0 * (k * L_max - mu));
        out.switch_times["t2"] = t2;
        out.switch_times["second_onset"] = t2 + 0.5;
      } else {
        out.displacement = L_max - 2.0 * mu / k;
        out.regime = "slip-dual-rate";
        const double t1 = mu / (k * L_max + mu);
        out.switch_times["t1"] = t1;
        out.switch_times["second_onset"] = t1 + 0.5;
      }
      return out;
    }
    case 'B': {
      boundary(1.0);
      boundary(3.0);
      if (r < 1.0) {
        out.displacement = 0.0;
        out.regime = "stasis";
      } else if (r < 3.0) {
        out.displacement = L_max - mu / k;
        out.regime = "slip-single-rate";
        const double t4 = mu / (k * L_max + mu);
        out.switch_times["t4"] = t4;
        out.switch_times["second_onset"] = t4 + 0.5;
      } else {
        out.displacement = 2.0 * mu / k;
        out.regime = "slip-dual-rate";
        const double t3 = mu / (2.0 * (k * L_max - mu));
        out.switch_times["t3"] = t3;
        out.switch_times["second_onset"] = t3 + 0.5;
      }
      return out;
    }
    case 'C': {
      boundary(2.0);
      boundary(4.0);
      if (r < 2.0) {
        out.displacement = 0.0;
        out.regime = "stasis";
      } else {
        out.displacement = L_max - 2.0 * mu / k;
        out.switch_times["t5"] = mu / (2.0 * k * L_max);
        if (r < 4.0) {
          out.regime = "slip-early-return";
          out.switch_times["t6"] = 0.5 + mu / (k * L_max);
        } else {
          out.regime = "slip-late-return";
          out.switch_times["t7"] = 0.5 + 3.0 * mu / (2.0 * k * L_max + 4.0 * mu);
        }
      }
      return out;
    }
    default:
      throw std::invalid_argument("strategy_result: strategy must be A, B or C");
  }
}

CrawlerModel two_point_model(double k, double mu_minus, double mu_plus,
                             double dL) {
  require_positive(k, "k");
  CrawlerModel m;
  m.points = {0.0, 1.0};
  m.springs.push_back(
      {0, 1, k, TimeProgram({{0.0, 0.0}, {0.5, dL}, {1.0, 0.0}}, 1.0)});
  m.friction.resize(2);
  for (auto& f : m.friction) {
    f.mu_minus = TimeProgram::constant(mu_minus);
    f.mu_plus = TimeProgram::constant(mu_plus);
  }
  return m;
}

CrawlerModel strategy_model(char which, double k, double mu, double L_max) {
  require_positive(k, "k");
  require_positive(mu, "mu");
  require_positive(L_max, "L_max");
  TimeProgram mu1 = TimeProgram::constant(mu);
  TimeProgram mu2 = TimeProgram::constant(mu);
  switch (which) {
    case 'A':
      mu1 = scaled_cycle({{0.0, 1.0}, {0.25, 1.5}, {0.75, 0.5}, {1.0, 1.0}}, mu);
      mu2 = scaled_cycle({{0.0, 1.0}, {0.25, 0.5}, {0.75, 1.5}, {1.0, 1.0}}, mu);
      break;
    case 'B':
      mu1 = scaled_cycle({{0.0, 0.5}, {0.5, 1.5}, {1.0, 0.5}}, mu);
      mu2 = scaled_cycle({{0.0, 1.5}, {0.5, 0.5}, {1.0, 1.5}}, mu);
      break;
    case 'C':
      mu1 = scaled_cycle(
          {{0.0, 0.5}, {0.25, 1.5}, {0.5, 1.5}, {0.75, 0.5}, {1.0, 0.5}}, mu);
      mu2 = scaled_cycle(
          {{0.0, 0.5}, {0.25, 0.5}, {0.5, 1.5}, {0.75, 1.5}, {1.0, 0.5}}, mu);
      break;
    default:
      throw std::invalid_argument("strategy_model: strategy must be A, B or C");
  }
  CrawlerModel m;
  m.points = {0.0, 1.0};
  m.springs.push_back(
      {0, 1, k, TimeProgram({{0.0, 0.0}, {0.5, L_max}, {1.0, 0.0}}, 1.0)});
  m.friction.resize(2);
  // Point 1 is the rear (backward-facing) contact, point 2 the front:
  // each strategy modulates both signs of its point identically.
  m.friction[0].mu_minus = mu1;
  m.friction[0].mu_plus = mu1;
  m.friction[1].mu_minus = mu2;
  m.friction[1].mu_plus = mu2;
  return m;
}

ContinuumModel continuum_example(double k, double l, double mu_minus,
                                 double mu_plus, double d_eps,
                                 int n_elements) {
  require_positive(k, "k");
  require_positive(l, "l");
  ContinuumModel c;
  c.xi_a = 0.0;
  c.xi_b = l;
  c.n_elements = n_elements;
  c.stiffness = {k};
  c.distortion.push_back(
      {TimeProgram({{0.0, 0.0}, {0.5, d_eps}, {1.0, 0.0}}, 1.0), {1.0}});
  c.mu_minus_density = {TimeProgram::constant(mu_minus), {1.0}};
  c.mu_plus_density = {TimeProgram::constant(mu_plus), {1.0}};
  return c;
}

}  // namespace crawlris
