#pragma once

#include <string>
#include <vector>

#include "splab/geometry.hpp"
#include "splab/grid.hpp"
#include "splab/radial.hpp"

namespace splab {

struct Containment {
  std::string region;
  bool inside = false;
  double margin = 0.0;  ///< signed distance to the region boundary, negative inside
};

struct BarycenterReport {
  Vec3 beta;
  double kinetic_mass = 0.0;  ///< int |grad u|^2
  std::vector<Containment> verdicts;
};

/// beta(u) = int x |grad u|^2 / int |grad u|^2, with the kinetic density split
/// over the same stencil edges as the energy.
BarycenterReport barycenter(const ScalarField& u);

/// Gradient (in the h^3-weighted L2 metric) of |beta(u) - target|^2.
ScalarField barycenter_penalty_gradient(const ScalarField& u, Vec3 target);

/// Places the radial profile w at y: u(x) = w(|x - y|), zero beyond w's
/// outer radius, then rescales to mass rho^2. `eroded` is the region y must
/// lie in (lambda Omega_r^-); DomainError otherwise.
ScalarField transplant(const RadialField& w, Vec3 y, GridPtr grid, const RegionPredicate& eroded,
                       double rho);

struct SublevelThreshold {
  double lambda = 0.0;
  double b_star = 0.0;
  double m_term = 0.0;  ///< M_{B_r}(delta) rho^4 / 4
  double level = 0.0;   ///< b_star + (1 + m_term) / lambda
  double delta = 0.0;   ///< margin the M value was computed at
};

SublevelThreshold sublevel_threshold(double b_star, double lambda, double rho, double m_term,
                                     double delta = 0.0);

struct ContainmentItem {
  std::string label;
  Vec3 beta;
  double energy = 0.0;
  bool audited = false;   ///< false when energy > level (precondition not met)
  bool contained = false;
  double margin = 0.0;    ///< distance of beta to the region, negative inside
};

struct ContainmentReport {
  double level = 0.0;
  double slack = 0.0;
  std::vector<ContainmentItem> items;
  int violations = 0;
  bool pass = true;
};

struct SublevelCandidate {
  std::string label;
  Vec3 beta;
  double energy = 0.0;
};

/// Checks beta in `dilated` (with `slack`) for every candidate at or below `level`.
ContainmentReport containment_audit(const std::vector<SublevelCandidate>& candidates, double level,
                                    const RegionPredicate& dilated, double slack);

/// Regular lattice of points in `eroded` inside the bounding box `box`, spacing
/// at least `spacing`, at most `max_per_axis` points along each axis.
std::vector<Vec3> target_lattice(const RegionPredicate& eroded, const std::array<Vec3, 2>& box,
                                 double spacing, int max_per_axis);

}  // namespace splab
