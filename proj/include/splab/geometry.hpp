#pragma once

#include <array>
#include <cmath>
#include <string>
#include <variant>

namespace splab {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend Vec3 operator*(Vec3 a, double s) { return s * a; }
  friend Vec3 operator/(Vec3 a, double s) { return {a.x / s, a.y / s, a.z / s}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

namespace shapes {

struct Ball {
  Vec3 center;
  double radius = 1.0;
  friend bool operator==(const Ball&, const Ball&) = default;
};

/// Spherical shell {inner < |x - center| < outer}.
struct Annulus {
  Vec3 center;
  double inner = 1.0;
  double outer = 2.0;
  friend bool operator==(const Annulus&, const Annulus&) = default;
};

struct Box {
  Vec3 lo;
  Vec3 hi{1.0, 1.0, 1.0};
  friend bool operator==(const Box&, const Box&) = default;
};

/// Solid torus around the z axis through `center`.
struct SolidTorus {
  Vec3 center;
  double major = 2.0;
  double minor = 0.5;
  friend bool operator==(const SolidTorus&, const SolidTorus&) = default;
};

/// Ball of radius `radius` about the origin standing in for R^3.
struct TruncatedSpace {
  double radius = 32.0;
  friend bool operator==(const TruncatedSpace&, const TruncatedSpace&) = default;
};

}  // namespace shapes

using Shape = std::variant<shapes::Ball, shapes::Annulus, shapes::Box, shapes::SolidTorus,
                           shapes::TruncatedSpace>;

/// Symbolic bounded domain: a base shape and a dilation factor acting on the
/// set, so scale 2 applied to B_1((1,0,0)) is B_2((2,0,0)).
class DomainSpec {
 public:
  DomainSpec() = default;
  DomainSpec(Shape shape, double scale = 1.0);  // validates

  const Shape& base() const noexcept { return shape_; }
  double scale() const noexcept { return scale_; }

  /// Shape with the scale folded into its parameters.
  Shape resolved() const;
  std::string kind() const;

  /// Signed distance to the boundary, negative inside. Exact for every kind.
  double signed_distance(Vec3 x) const;
  bool contains(Vec3 x) const { return signed_distance(x) < 0.0; }

  /// Axis-aligned bounding box of the resolved set.
  std::array<Vec3, 2> bounding_box() const;
  /// Radius of the largest inscribed ball.
  double inradius() const;
  double diameter() const;

  friend bool operator==(const DomainSpec&, const DomainSpec&) = default;

 private:
  Shape shape_ = shapes::Ball{};
  double scale_ = 1.0;
};

/// Returns the set lambda * D. Throws DomainError for lambda < 1.
DomainSpec scale_domain(const DomainSpec& spec, double lambda);

/// {x : d(x, D) <= margin} for margin >= 0, {x in D : d(x, dD) >= -margin}
/// otherwise.
class RegionPredicate {
 public:
  RegionPredicate(DomainSpec base, double margin);

  bool contains(Vec3 x) const { return base_.signed_distance(x) <= margin_; }
  /// How far inside the region x is (positive inside).
  double depth(Vec3 x) const { return margin_ - base_.signed_distance(x); }

  const DomainSpec& base() const noexcept { return base_; }
  double margin() const noexcept { return margin_; }

 private:
  DomainSpec base_;
  double margin_;
};

/// Builds the dilation (margin > 0) or erosion (margin < 0) of `spec`.
/// Throws GeometryError when the erosion is empty.
RegionPredicate region(const DomainSpec& spec, double margin);

}  // namespace splab
