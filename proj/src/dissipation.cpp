#include "crawlris/dissipation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace crawlris {

namespace {

constexpr std::size_t kMaxIsolatedTimes = 256;

// Balance value of subset J: sum_{i in J} a_i - sum_{i not in J} b_i.
// A zero balance means moving J backward and its complement forward
// costs the same in both senses, so the translation minimizer ties.
double subset_balance(const std::vector<char>& in, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b) {
  double v = 0.0;
  for (int i = 0; i < a.size(); ++i) v += in[i] ? a[i] : -b[i];
  return v;
}

std::vector<int> subset_indices(const std::vector<char>& in) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i]) idx.push_back(static_cast<int>(i));
  }
  return idx;
}

// Deterministic family of structured subsets worth testing when the
// exhaustive sweep is out of reach: empty, full, singletons and their
// complements, prefixes and suffixes (contiguous crawler segments).
std::vector<std::vector<char>> structured_subsets(int n) {
  std::vector<std::vector<char>> out;
  std::vector<char> mask(n, 0);
  out.push_back(mask);
  std::fill(mask.begin(), mask.end(), 1);
  out.push_back(mask);
  for (int i = 0; i < n; ++i) {
    std::fill(mask.begin(), mask.end(), 0);
    mask[i] = 1;
    out.push_back(mask);
    std::fill(mask.begin(), mask.end(), 1);
    mask[i] = 0;
    out.push_back(mask);
  }
  for (int p = 1; p < n; ++p) {
    std::fill(mask.begin(), mask.end(), 0);
    std::fill(mask.begin(), mask.begin() + p, 1);
    out.push_back(mask);
    std::fill(mask.begin(), mask.end(), 1);
    std::fill(mask.begin(), mask.begin() + p, 0);
    out.push_back(mask);
  }
  return out;
}

}  // namespace

DissipationSpec::DissipationSpec(std::vector<PointFriction> points)
    : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw std::invalid_argument("DissipationSpec: need at least two points");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!(points_[i].weight > 0.0)) {
      throw std::invalid_argument(
          "DissipationSpec: weights must be strictly positive");
    }
  }
}

DissipationSpec DissipationSpec::from_model(const CrawlerModel& m) {
  m.validate();
  return DissipationSpec(m.friction);
}

double DissipationSpec::mu_minus(int i, double t) const {
  return points_[i].weight * points_[i].mu_minus.eval(t);
}

double DissipationSpec::mu_plus(int i, double t) const {
  return points_[i].weight * points_[i].mu_plus.eval(t);
}

Eigen::VectorXd DissipationSpec::mu_minus_vec(double t) const {
  Eigen::VectorXd v(n());
  for (int i = 0; i < n(); ++i) v[i] = mu_minus(i, t);
  return v;
}

Eigen::VectorXd DissipationSpec::mu_plus_vec(double t) const {
  Eigen::VectorXd v(n());
  for (int i = 0; i < n(); ++i) v[i] = mu_plus(i, t);
  return v;
}

double DissipationSpec::eval(double t, const Eigen::VectorXd& u) const {
  if (u.size() != n()) {
    throw std::invalid_argument("DissipationSpec: dimension mismatch");
  }
  double r = 0.0;
  for (int i = 0; i < n(); ++i) {
    r += u[i] >= 0.0 ? mu_plus(i, t) * u[i] : -mu_minus(i, t) * u[i];
  }
  return r;
}

Eigen::VectorXd DissipationSpec::prox(double t, double step,
                                      const Eigen::VectorXd& v) const {
  if (v.size() != n()) {
    throw std::invalid_argument("DissipationSpec: dimension mismatch");
  }
  if (!(step > 0.0)) {
    throw std::invalid_argument("DissipationSpec: prox step must be positive");
  }
  Eigen::VectorXd u(n());
  for (int i = 0; i < n(); ++i) {
    const double up = step * mu_plus(i, t);
    const double dn = step * mu_minus(i, t);
    if (v[i] > up) {
      u[i] = v[i] - up;
    } else if (v[i] < -dn) {
      u[i] = v[i] + dn;
    } else {
      u[i] = 0.0;
    }
  }
  return u;
}

ShapeReduction DissipationSpec::shape_reduced(double t,
                                              const Eigen::VectorXd& w) const {
  if (w.size() != n() - 1) {
    throw std::invalid_argument("DissipationSpec: shape dimension mismatch");
  }
  struct Item {
    double v;   // slope breakpoint: the translation zeroing coordinate i
    double am;  // backward coefficient
    double ap;  // forward coefficient
  };
  const Eigen::VectorXd c = chi(w, 0.0);
  std::vector<Item> items(n());
  double total_minus = 0.0;
  double total_plus = 0.0;
  for (int i = 0; i < n(); ++i) {
    items[i] = {-c[i], mu_minus(i, t), mu_plus(i, t)};
    total_minus += items[i].am;
    total_plus += items[i].ap;
  }
  if (total_minus <= kTieTol || total_plus <= kTieTol) {
    throw std::domain_error(
        "DissipationSpec: total friction vanishes on one side, the "
        "translation restriction is not coercive");
  }
  std::sort(items.begin(), items.end(),
            [](const Item& a, const Item& b) { return a.v < b.v; });

  // The objective v -> R(t, chi(w, v)) is convex piecewise linear with
  // slope -total_minus before every breakpoint; crossing breakpoint i
  // raises the slope by am_i + ap_i.
  double slope = -total_minus;
  double prev_slope = slope;
  std::size_t k = 0;
  while (k < items.size() && slope < -kTieTol) {
    prev_slope = slope;
    slope += items[k].am + items[k].ap;
    ++k;
  }

  ShapeReduction out;
  if (slope > kTieTol) {
    out.v_lo = out.v_hi = out.v_m = items[k - 1].v;
    out.unique = true;
    out.near_tie = (slope <= kTieWarnTol) || (prev_slope >= -kTieWarnTol);
  } else {
    // Zero slope past breakpoint k-1: the minimizers form an interval
    // reaching the first breakpoint whose crossing makes the slope
    // strictly positive.
    std::size_t j = k;
    while (j < items.size() && items[j].am + items[j].ap <= kTieTol) ++j;
    const double lo = items[k - 1].v;
    const double hi = items[j].v;
    if (hi - lo <= 1e-14 * std::max(1.0, std::abs(lo))) {
      out.v_lo = out.v_hi = out.v_m = lo;
      out.unique = true;
    } else {
      out.v_lo = lo;
      out.v_hi = hi;
      out.v_m = 0.5 * (lo + hi);
      out.unique = false;
    }
  }
  Eigen::VectorXd u = c;
  u.array() += out.v_m;
  out.value = eval(t, u);
  return out;
}

bool DissipationSpec::homogeneous_at(double t) const {
  const Eigen::VectorXd a = mu_minus_vec(t);
  const Eigen::VectorXd b = mu_plus_vec(t);
  const double scale =
      std::max(1.0, std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()));
  for (int i = 1; i < n(); ++i) {
    if (std::abs(a[i] - a[0]) > kTieTol * scale ||
        std::abs(b[i] - b[0]) > kTieTol * scale) {
      return false;
    }
  }
  return true;
}

UniquenessReport DissipationSpec::check_star(double t,
                                             const StarOptions& opts) const {
  UniquenessReport rep;
  const int nn = n();
  const Eigen::VectorXd a = mu_minus_vec(t);
  const Eigen::VectorXd b = mu_plus_vec(t);
  const double scale =
      std::max(1.0, std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()));
  const double tie = kTieTol * scale;
  const double warn = kTieWarnTol * scale;

  if (homogeneous_at(t)) {
    rep.condition = "SBdiscr";
    for (int m = 0; m <= nn; ++m) {
      const double val = m * a[0] - (nn - m) * b[0];
      if (std::abs(val) <= tie) {
        rep.holds = false;
        rep.witness = UniquenessWitness{t, m, {}};
        return rep;
      }
      if (std::abs(val) <= warn) rep.ill_conditioned = true;
    }
    return rep;
  }

  rep.condition = "SBdiscr_asym";
  if (nn <= opts.exhaustive_limit) {
    // Gray-code sweep: one coefficient flips between consecutive
    // subsets, so the balance updates in O(1).
    std::vector<char> in(nn, 0);
    double val = -b.sum();
    const std::uint64_t total = std::uint64_t{1} << nn;
    for (std::uint64_t k = 0;; ++k) {
      if (std::abs(val) <= tie) {
        rep.holds = false;
        rep.witness = UniquenessWitness{t, -1, subset_indices(in)};
        return rep;
      }
      if (std::abs(val) <= warn) rep.ill_conditioned = true;
      if (k + 1 >= total) break;
      const int bit = std::countr_zero(k + 1);
      if (in[bit]) {
        val -= a[bit] + b[bit];
        in[bit] = 0;
      } else {
        val += a[bit] + b[bit];
        in[bit] = 1;
      }
    }
    return rep;
  }

  // Too many subsets: test the structured family plus a deterministic
  // random sample and report the sweep as partial.
  rep.partial = true;
  auto consider = [&](const std::vector<char>& mask) -> bool {
    const double val = subset_balance(mask, a, b);
    if (std::abs(val) <= tie) {
      rep.holds = false;
      rep.witness = UniquenessWitness{t, -1, subset_indices(mask)};
      return true;
    }
    if (std::abs(val) <= warn) rep.ill_conditioned = true;
    return false;
  };
  for (const auto& mask : structured_subsets(nn)) {
    if (consider(mask)) return rep;
  }
  std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<char> mask(nn, 0);
  for (int s = 0; s < opts.samples; ++s) {
    for (int i = 0; i < nn; ++i) mask[i] = static_cast<char>(rng() & 1u);
    if (consider(mask)) return rep;
  }
  return rep;
}

TimeDependentReport DissipationSpec::check_time_dependent(
    double t0, double t1, const StarOptions& opts) const {
  if (!(t0 < t1)) {
    throw std::invalid_argument("check_time_dependent: need t0 < t1");
  }
  TimeDependentReport rep;
  const std::vector<double> grid = merge_breakpoints(programs(), t0, t1);

  // Psi-regularity constants.  Programs are piecewise linear, so all
  // extrema over the window live on the merged grid, and the Lipschitz
  // constant is the largest program slope.  The comparison norm Psi
  // carries the weights, so the constants use raw coefficient values.
  double alo = std::numeric_limits<double>::infinity();
  double ahi = 0.0;
  double lam = 0.0;
  int alo_point = -1;
  double alo_time = t0;
  for (int i = 0; i < n(); ++i) {
    for (double t : grid) {
      const double lo_i =
          std::min(points_[i].mu_minus.eval(t), points_[i].mu_plus.eval(t));
      const double hi_i =
          std::max(points_[i].mu_minus.eval(t), points_[i].mu_plus.eval(t));
      if (lo_i < alo) {
        alo = lo_i;
        alo_point = i;
        alo_time = t;
      }
      ahi = std::max(ahi, hi_i);
    }
    lam = std::max(lam, points_[i].mu_minus.lipschitz_and_bounds().lipschitz);
    lam = std::max(lam, points_[i].mu_plus.lipschitz_and_bounds().lipschitz);
  }
  rep.psi.alpha_lower = alo;
  rep.psi.alpha_upper = ahi;
  rep.psi.lambda = lam;
  rep.psi.psi_regular = alo > 0.0;

  rep.uniform.condition = "diamond2";
  rep.uniform.holds = rep.psi.psi_regular;
  if (!rep.uniform.holds) {
    rep.uniform.witness = UniquenessWitness{alo_time, alo_point, {}};
  }

  // Almost-everywhere uniqueness: a subset balance is affine in t on
  // each grid segment, so it vanishes on the whole segment exactly when
  // it vanishes at both segment ends.  A sign change or a single-end
  // zero is an isolated tie, harmless for the a.e. condition.
  rep.almost_everywhere.condition = "diamond";
  std::vector<double> isolated;
  const int nn = n();
  const bool exhaustive = nn <= opts.exhaustive_limit;
  std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ull);
  for (std::size_t s = 0; s + 1 < grid.size(); ++s) {
    const double tl = grid[s];
    const double tr = grid[s + 1];
    const Eigen::VectorXd al = mu_minus_vec(tl), bl = mu_plus_vec(tl);
    const Eigen::VectorXd ar = mu_minus_vec(tr), br = mu_plus_vec(tr);
    const double scale = std::max(
        {1.0, al.cwiseAbs().maxCoeff(), bl.cwiseAbs().maxCoeff(),
         ar.cwiseAbs().maxCoeff(), br.cwiseAbs().maxCoeff()});
    const double tie = kTieTol * scale;
    const double warn = kTieWarnTol * scale;

    auto consider = [&](double vl, double vr,
                        const std::vector<char>& mask) -> bool {
      const bool zl = std::abs(vl) <= tie;
      const bool zr = std::abs(vr) <= tie;
      if (zl && zr) {
        rep.almost_everywhere.holds = false;
        if (!rep.almost_everywhere.witness) {
          rep.almost_everywhere.witness =
              UniquenessWitness{0.5 * (tl + tr), -1, subset_indices(mask)};
        }
        return true;
      }
      if (zl) isolated.push_back(tl);
      if (zr) isolated.push_back(tr);
      if (!zl && !zr && vl * vr < 0.0) {
        isolated.push_back(tl + (tr - tl) * vl / (vl - vr));
      }
      if (std::max(std::abs(vl), std::abs(vr)) <= warn) {
        rep.almost_everywhere.ill_conditioned = true;
      }
      return false;
    };

    bool segment_failed = false;
    if (exhaustive) {
      std::vector<char> in(nn, 0);
      double vl = -bl.sum();
      double vr = -br.sum();
      const std::uint64_t total = std::uint64_t{1} << nn;
      for (std::uint64_t k = 0;; ++k) {
        if (consider(vl, vr, in)) {
          segment_failed = true;
          break;
        }
        if (k + 1 >= total) break;
        const int bit = std::countr_zero(k + 1);
        if (in[bit]) {
          vl -= al[bit] + bl[bit];
          vr -= ar[bit] + br[bit];
          in[bit] = 0;
        } else {
          vl += al[bit] + bl[bit];
          vr += ar[bit] + br[bit];
          in[bit] = 1;
        }
      }
    } else {
      rep.almost_everywhere.partial = true;
      std::vector<char> mask(nn, 0);
      for (const auto& m : structured_subsets(nn)) {
        if (consider(subset_balance(m, al, bl), subset_balance(m, ar, br),
                     m)) {
          segment_failed = true;
          break;
        }
      }
      if (!segment_failed) {
        for (int smp = 0; smp < opts.samples; ++smp) {
          for (int i = 0; i < nn; ++i) {
            mask[i] = static_cast<char>(rng() & 1u);
          }
          if (consider(subset_balance(mask, al, bl),
                       subset_balance(mask, ar, br), mask)) {
            segment_failed = true;
            break;
          }
        }
      }
    }
    if (segment_failed) break;
  }

  std::sort(isolated.begin(), isolated.end());
  auto& out = rep.almost_everywhere.isolated_failure_times;
  for (double t : isolated) {
    if (out.size() >= kMaxIsolatedTimes) break;
    if (out.empty() || t - out.back() > kTieTol * std::max(1.0, std::abs(t))) {
      out.push_back(t);
    }
  }
  return rep;
}

std::vector<const TimeProgram*> DissipationSpec::programs() const {
  std::vector<const TimeProgram*> ps;
  ps.reserve(2 * points_.size());
  for (const auto& p : points_) {
    ps.push_back(&p.mu_minus);
    ps.push_back(&p.mu_plus);
  }
  return ps;
}

}  // namespace crawlris
