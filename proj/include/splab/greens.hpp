#pragma once

#include <functional>
#include <string>
#include <vector>

#include "splab/grid.hpp"

namespace splab {

enum class RegularMethod { image_charge, numeric };
std::string to_string(RegularMethod m);

struct RegularPartSample {
  Vec3 x, y;
  double value = 0.0;
  RegularMethod method = RegularMethod::numeric;
};

struct RegularBoundReport {
  double delta = 0.0;
  double m_value = 0.0;  ///< max H over sampled pairs at depth >= delta
  std::size_t samples = 0;
  RegularMethod method = RegularMethod::numeric;
  Vec3 argmax_x, argmax_y;
};

/// Gamma(x - y) = 1 / (4 pi |x - y|).
double newton_kernel(Vec3 x, Vec3 y);

/// Regular part of the Dirichlet Green's function of the ball B_a(center),
/// by the image charge. Symmetric and smooth; H(c, c) = 1 / (4 pi a).
double regular_part_ball(Vec3 x, Vec3 y, double a, Vec3 center = {});

/// Discrete harmonic function with the given values on the analytic boundary
/// (imposed at the stencil crossing points).
ScalarField harmonic_extension(GridPtr grid, const std::function<double(Vec3)>& data, double tol = 1e-10);

/// h(., y) = harmonic extension of Gamma(. - y). y must be inside with depth
/// >= 2h (DomainError otherwise).
ScalarField regular_part_numeric(GridPtr grid, Vec3 y, double tol = 1e-10);

/// Number of direct-sum kernel evaluations pair_energy_regular may spend.
inline constexpr double kPairBudget = 4e9;

/// int int H(x, y; D) u^2(x) u^2(y) dx dy. Linearity in the source reduces
/// the per-source solves to one harmonic extension of the Newton potential of
/// u^2; sources are aggregated over stride^3 cell blocks. stride 0 picks the
/// smallest stride within the default budget. ResourceError above kPairBudget.
double pair_energy_regular(const ScalarField& u, int sample_stride = 0);

/// sup H over pairs with both points at depth >= delta, from numeric solves
/// at up to `max_sources` source points nearest the margin.
RegularBoundReport sup_regular_part(GridPtr grid, double delta, int max_sources = 48);

/// Exact value for the ball: a / (4 pi (a^2 - (a - delta)^2)).
RegularBoundReport sup_regular_part_ball(double a, double delta);

struct MarginFamily {
  std::vector<RegularBoundReport> reports;  ///< ordered by decreasing delta
  double log_slope = 0.0;  ///< d log M / d log delta over the family
  bool diverging = false;  ///< M grows at least like delta^{-1/2} as delta shrinks
};

MarginFamily regular_bound_family(GridPtr grid, std::vector<double> deltas, int max_sources = 48);

}  // namespace splab
