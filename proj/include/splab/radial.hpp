#pragma once

#include <cmath>
#include <numbers>
#include <vector>

namespace splab {

/// Radial profile on the uniform mesh r_j = j * h, j = 0..J. Values beyond the
/// outer radius J * h are implicitly zero.
struct RadialField {
  double h = 0.0;
  std::vector<double> values;

  RadialField() = default;
  RadialField(double spacing, std::size_t points) : h(spacing), values(points, 0.0) {}

  /// Mesh of `intervals` steps over [0, outer].
  static RadialField on_interval(double outer, std::size_t intervals) {
    return RadialField(outer / static_cast<double>(intervals), intervals + 1);
  }

  std::size_t size() const noexcept { return values.size(); }
  std::size_t last() const noexcept { return values.size() - 1; }
  double r(std::size_t j) const noexcept { return static_cast<double>(j) * h; }
  double outer_radius() const noexcept { return r(last()); }

  /// Trapezoid weight of node j for integrals over R^3 (4 pi r^2 dr).
  double weight(std::size_t j) const noexcept {
    const double w = 4.0 * std::numbers::pi * r(j) * r(j) * h;
    return j == last() ? 0.5 * w : w;
  }

  /// Piecewise-linear interpolation; zero outside [0, outer].
  double at(double radius) const noexcept {
    if (radius < 0.0 || radius >= outer_radius()) return 0.0;
    const double s = radius / h;
    const auto j = static_cast<std::size_t>(s);
    const double t = s - static_cast<double>(j);
    return (1.0 - t) * values[j] + t * values[j + 1];
  }

  double& operator[](std::size_t j) { return values[j]; }
  double operator[](std::size_t j) const { return values[j]; }
};

/// Integral over R^3 of a radial density by the trapezoid rule.
inline double radial_integrate(const RadialField& f) {
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) s += f.weight(j) * f[j];
  return s;
}

inline double radial_mass(const RadialField& f) {
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) s += f.weight(j) * f[j] * f[j];
  return s;
}

}  // namespace splab
