#pragma once

#include <vector>

#include "crawlris/model.hpp"
#include "crawlris/solver.hpp"
#include "crawlris/time_program.hpp"

namespace crawlris {

/// Separable space-time field: program(t) * profile(xi), with the
/// profile piecewise constant per element.  A single profile entry
/// broadcasts to all elements.
struct SpatialTerm {
  TimeProgram program;
  std::vector<double> profile;
};

/// One-dimensional continuous crawler on [xi_a, xi_b]: elastic modulus
/// k(xi), active distortion eps(t, xi) (a sum of separable terms) and
/// directional friction densities per unit length.
struct ContinuumModel {
  double xi_a = 0.0;
  double xi_b = 1.0;
  int n_elements = 1;
  std::vector<double> stiffness;  // per element, or one entry broadcast
  std::vector<SpatialTerm> distortion;
  SpatialTerm mu_minus_density;
  SpatialTerm mu_plus_density;

  void validate() const;
  double length() const { return xi_b - xi_a; }

  /// True when every profile is a single broadcast entry, so the model
  /// can be re-meshed with any element count.
  bool uniform_profiles() const;
};

/// Linear finite-element projection onto n elements: nodes at element
/// boundaries, one spring per element with stiffness k_e / h_e and rest
/// offset equal to the element integral of the distortion, and node
/// friction lumped by hat functions (half-element sums, so boundary
/// nodes carry half weight).  n = 0 keeps the model's own element
/// count; overriding requires uniform profiles.
CrawlerModel discretize(const ContinuumModel& c, int n = 0);

struct CycleDisplacement {
  int elements = 0;
  double displacement = 0.0;  // net translation over one settled cycle
  double period = 0.0;
};

/// Simulates one warm-up cycle plus one measured cycle of the periodic
/// actuation for each element count, starting from the relaxed state.
/// All programs must be cyclic with a common period.
std::vector<CycleDisplacement> converged_cycle_displacement(
    const ContinuumModel& c, const SolverConfig& cfg,
    const std::vector<int>& n_sequence);

}  // namespace crawlris
