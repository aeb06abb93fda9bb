#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace crawlris {

/// Piecewise-linear scalar function of time, given by breakpoints
/// (t_0, v_0), ..., (t_m, v_m) with strictly increasing times.
///
/// A program may be cyclic: the breakpoint span [t_0, t_m] is then one
/// full period (the declared period must equal t_m - t_0) and the first
/// and last values must coincide, so the periodic extension stays
/// continuous.  Evaluation is exact at breakpoints and linear in
/// between; outside the span a non-cyclic program is undefined.
class TimeProgram {
 public:
  struct Breakpoint {
    double t;
    double v;
  };

  TimeProgram(std::vector<Breakpoint> breakpoints,
              std::optional<double> period = std::nullopt);

  /// Identically zero (cyclic on [0, 1]), so containers of programs can
  /// be sized first and filled in afterwards.
  TimeProgram() : TimeProgram({{0.0, 0.0}, {1.0, 0.0}}, 1.0) {}

  /// Constant program on [t0, t1], periodic so it extends to all times.
  static TimeProgram constant(double value, double t0 = 0.0, double t1 = 1.0);

  double eval(double t) const;

  struct LipschitzBounds {
    double lipschitz;  // max |slope| over segments
    double lo;         // min breakpoint value
    double hi;         // max breakpoint value
  };
  LipschitzBounds lipschitz_and_bounds() const;

  const std::vector<Breakpoint>& breakpoints() const { return pts_; }
  std::optional<double> period() const { return period_; }
  bool periodic() const { return period_.has_value(); }
  double t_begin() const { return pts_.front().t; }
  double t_end() const { return pts_.back().t; }

  /// Program q with q(t) = eval(t / alpha): the time axis stretched by
  /// alpha > 0.  Preserves periodicity (period scales by alpha).
  TimeProgram time_scaled(double alpha) const;

 private:
  std::vector<Breakpoint> pts_;
  std::optional<double> period_;
};

/// Sorted union of the breakpoint times of all programs restricted to
/// [t0, t1], always containing t0 and t1.  Cyclic programs contribute
/// every periodic image of their breakpoints that falls inside the
/// window.  Duplicates (closer than 1e-12) are collapsed.
std::vector<double> merge_breakpoints(
    const std::vector<const TimeProgram*>& programs, double t0, double t1);

/// Pointwise linear combination sum_i coeff_i * program_i, evaluated on
/// the merged breakpoint grid, which is exact for piecewise-linear
/// inputs.  All programs must share the same span and the same period
/// (or all be non-cyclic).
TimeProgram combine(
    const std::vector<std::pair<double, const TimeProgram*>>& terms);

}  // namespace crawlris
