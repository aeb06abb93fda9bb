#include "crawlris/time_program.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace crawlris {

namespace {

constexpr double kTimeTol = 1e-12;

}  // namespace

TimeProgram::TimeProgram(std::vector<Breakpoint> breakpoints,
                         std::optional<double> period)
    : pts_(std::move(breakpoints)), period_(period) {
  if (pts_.size() < 2) {
    throw std::invalid_argument("TimeProgram: need at least two breakpoints");
  }
  for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
    if (!(pts_[i].t < pts_[i + 1].t)) {
      throw std::invalid_argument(
          "TimeProgram: breakpoint times must be strictly increasing (got " +
          std::to_string(pts_[i].t) + " followed by " +
          std::to_string(pts_[i + 1].t) + ")");
    }
  }
  if (period_) {
    const double span = t_end() - t_begin();
    if (!(*period_ > 0.0)) {
      throw std::invalid_argument("TimeProgram: period must be positive");
    }
    if (std::abs(*period_ - span) > kTimeTol * std::max(1.0, span)) {
      throw std::invalid_argument(
          "TimeProgram: period must equal the breakpoint span");
    }
    if (std::abs(pts_.front().v - pts_.back().v) >
        kTimeTol * std::max(1.0, std::abs(pts_.front().v))) {
      throw std::invalid_argument(
          "TimeProgram: cyclic program needs equal first and last values");
    }
    // Snap so the periodic extension is exactly continuous.
    pts_.back().v = pts_.front().v;
    period_ = span;
  }
}

TimeProgram TimeProgram::constant(double value, double t0, double t1) {
  return TimeProgram({{t0, value}, {t1, value}}, t1 - t0);
}

double TimeProgram::eval(double t) const {
  const double a = t_begin();
  const double b = t_end();
  if (period_) {
    if (t < a || t > b) {
      t = a + std::fmod(t - a, *period_);
      if (t < a) t += *period_;
    }
  } else {
    const double slack = kTimeTol * std::max({1.0, std::abs(a), std::abs(b)});
    if (t < a - slack || t > b + slack) {
      throw std::domain_error("TimeProgram: eval at t=" + std::to_string(t) +
                              " outside span [" + std::to_string(a) + ", " +
                              std::to_string(b) + "]");
    }
    t = std::clamp(t, a, b);
  }
  // First breakpoint with time >= t; exact hits return the stored value.
  auto it = std::lower_bound(
      pts_.begin(), pts_.end(), t,
      [](const Breakpoint& p, double s) { return p.t < s; });
  if (it == pts_.end()) return pts_.back().v;
  if (it->t == t) return it->v;
  const Breakpoint& hi = *it;
  const Breakpoint& lo = *(it - 1);
  const double s = (t - lo.t) / (hi.t - lo.t);
  return lo.v + s * (hi.v - lo.v);
}

TimeProgram::LipschitzBounds TimeProgram::lipschitz_and_bounds() const {
  LipschitzBounds r{0.0, pts_.front().v, pts_.front().v};
  for (std::size_t i = 0; i < pts_.size(); ++i) {
    r.lo = std::min(r.lo, pts_[i].v);
    r.hi = std::max(r.hi, pts_[i].v);
    if (i + 1 < pts_.size()) {
      const double slope = (pts_[i + 1].v - pts_[i].v) /
                           (pts_[i + 1].t - pts_[i].t);
      r.lipschitz = std::max(r.lipschitz, std::abs(slope));
    }
  }
  return r;
}

TimeProgram TimeProgram::time_scaled(double alpha) const {
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("TimeProgram: time scale must be positive");
  }
  std::vector<Breakpoint> scaled = pts_;
  for (auto& p : scaled) p.t *= alpha;
  std::optional<double> period;
  if (period_) period = *period_ * alpha;
  return TimeProgram(std::move(scaled), period);
}

std::vector<double> merge_breakpoints(
    const std::vector<const TimeProgram*>& programs, double t0, double t1) {
  if (!(t0 < t1)) {
    throw std::invalid_argument("merge_breakpoints: need t0 < t1");
  }
  std::vector<double> out{t0, t1};
  for (const TimeProgram* p : programs) {
    if (p == nullptr) continue;
    if (p->periodic()) {
      const double period = *p->period();
      // k-th periodic image of breakpoint t is t + k*period; collect all
      // images inside the window.
      for (const auto& bp : p->breakpoints()) {
        const double k0 = std::ceil((t0 - bp.t) / period);
        for (double k = k0; bp.t + k * period <= t1; k += 1.0) {
          out.push_back(bp.t + k * period);
        }
      }
    } else {
      for (const auto& bp : p->breakpoints()) {
        if (bp.t >= t0 && bp.t <= t1) out.push_back(bp.t);
      }
    }
  }
  std::sort(out.begin(), out.end());
  std::vector<double> dedup;
  dedup.reserve(out.size());
  for (double t : out) {
    if (dedup.empty() ||
        t - dedup.back() > kTimeTol * std::max(1.0, std::abs(t))) {
      dedup.push_back(t);
    }
  }
  // The window ends must survive deduplication exactly.
  dedup.front() = t0;
  dedup.back() = t1;
  return dedup;
}

TimeProgram combine(
    const std::vector<std::pair<double, const TimeProgram*>>& terms) {
  if (terms.empty()) {
    throw std::invalid_argument("combine: need at least one term");
  }
  const TimeProgram* first = terms.front().second;
  std::vector<const TimeProgram*> progs;
  for (const auto& [c, p] : terms) {
    (void)c;
    if (p == nullptr) throw std::invalid_argument("combine: null program");
    if (p->periodic() != first->periodic() ||
        std::abs(p->t_begin() - first->t_begin()) > kTimeTol ||
        std::abs(p->t_end() - first->t_end()) > kTimeTol) {
      throw std::invalid_argument(
          "combine: programs must share span and periodicity");
    }
    progs.push_back(p);
  }
  const std::vector<double> grid =
      merge_breakpoints(progs, first->t_begin(), first->t_end());
  std::vector<TimeProgram::Breakpoint> pts;
  pts.reserve(grid.size());
  for (double t : grid) {
    double v = 0.0;
    for (const auto& [c, p] : terms) v += c * p->eval(t);
    pts.push_back({t, v});
  }
  std::optional<double> period;
  if (first->periodic()) period = first->t_end() - first->t_begin();
  return TimeProgram(std::move(pts), period);
}

}  // namespace crawlris
