#include "splab/geometry.hpp"

#include <algorithm>

#include "splab/errors.hpp"

namespace splab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void validate(const Shape& shape) {
  std::visit(overloaded{
                 [](const shapes::Ball& b) {
                   if (!(b.radius > 0.0)) throw DomainError("ball: radius must be positive");
                 },
                 [](const shapes::Annulus& a) {
                   if (!(a.inner > 0.0 && a.inner < a.outer))
                     throw DomainError("annulus: need 0 < inner < outer");
                 },
                 [](const shapes::Box& b) {
                   for (int i = 0; i < 3; ++i)
                     if (!(b.lo[i] < b.hi[i])) throw DomainError("box: need lo < hi componentwise");
                 },
                 [](const shapes::SolidTorus& t) {
                   if (!(t.minor > 0.0 && t.minor < t.major))
                     throw DomainError("solid_torus: need 0 < minor < major");
                 },
                 [](const shapes::TruncatedSpace& t) {
                   if (!(t.radius > 0.0)) throw DomainError("truncated_space: radius must be positive");
                 },
             },
             shape);
}

}  // namespace

DomainSpec::DomainSpec(Shape shape, double scale) : shape_(std::move(shape)), scale_(scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("scale must be a positive real");
  validate(shape_);
}

Shape DomainSpec::resolved() const {
  const double s = scale_;
  return std::visit(
      overloaded{
          [s](const shapes::Ball& b) -> Shape { return shapes::Ball{s * b.center, s * b.radius}; },
          [s](const shapes::Annulus& a) -> Shape {
            return shapes::Annulus{s * a.center, s * a.inner, s * a.outer};
          },
          [s](const shapes::Box& b) -> Shape { return shapes::Box{s * b.lo, s * b.hi}; },
          [s](const shapes::SolidTorus& t) -> Shape {
            return shapes::SolidTorus{s * t.center, s * t.major, s * t.minor};
          },
          [s](const shapes::TruncatedSpace& t) -> Shape { return shapes::TruncatedSpace{s * t.radius}; },
      },
      shape_);
}

std::string DomainSpec::kind() const {
  return std::visit(overloaded{
                        [](const shapes::Ball&) { return std::string("ball"); },
                        [](const shapes::Annulus&) { return std::string("annulus"); },
                        [](const shapes::Box&) { return std::string("box"); },
                        [](const shapes::SolidTorus&) { return std::string("solid_torus"); },
                        [](const shapes::TruncatedSpace&) { return std::string("truncated_space"); },
                    },
                    shape_);
}

double DomainSpec::signed_distance(Vec3 x) const {
  return std::visit(
      overloaded{
          [x](const shapes::Ball& b) { return norm(x - b.center) - b.radius; },
          [x](const shapes::Annulus& a) {
            const double r = norm(x - a.center);
            return std::max(a.inner - r, r - a.outer);
          },
          [x](const shapes::Box& b) {
            const Vec3 c = 0.5 * (b.lo + b.hi);
            const Vec3 half = 0.5 * (b.hi - b.lo);
            Vec3 q;
            for (int i = 0; i < 3; ++i) q[i] = std::abs(x[i] - c[i]) - half[i];
            const Vec3 pos{std::max(q.x, 0.0), std::max(q.y, 0.0), std::max(q.z, 0.0)};
            return norm(pos) + std::min(std::max({q.x, q.y, q.z}), 0.0);
          },
          [x](const shapes::SolidTorus& t) {
            const Vec3 d = x - t.center;
            const double ring = std::hypot(d.x, d.y) - t.major;
            return std::hypot(ring, d.z) - t.minor;
          },
          [x](const shapes::TruncatedSpace& t) { return norm(x) - t.radius; },
      },
      resolved());
}

std::array<Vec3, 2> DomainSpec::bounding_box() const {
  return std::visit(
      overloaded{
          [](const shapes::Ball& b) {
            const Vec3 r{b.radius, b.radius, b.radius};
            return std::array<Vec3, 2>{b.center - r, b.center + r};
          },
          [](const shapes::Annulus& a) {
            const Vec3 r{a.outer, a.outer, a.outer};
            return std::array<Vec3, 2>{a.center - r, a.center + r};
          },
          [](const shapes::Box& b) { return std::array<Vec3, 2>{b.lo, b.hi}; },
          [](const shapes::SolidTorus& t) {
            const double R = t.major + t.minor;
            const Vec3 r{R, R, t.minor};
            return std::array<Vec3, 2>{t.center - r, t.center + r};
          },
          [](const shapes::TruncatedSpace& t) {
            const Vec3 r{t.radius, t.radius, t.radius};
            return std::array<Vec3, 2>{Vec3{} - r, r};
          },
      },
      resolved());
}

double DomainSpec::inradius() const {
  return std::visit(overloaded{
                        [](const shapes::Ball& b) { return b.radius; },
                        [](const shapes::Annulus& a) { return 0.5 * (a.outer - a.inner); },
                        [](const shapes::Box& b) {
                          const Vec3 d = b.hi - b.lo;
                          return 0.5 * std::min({d.x, d.y, d.z});
                        },
                        [](const shapes::SolidTorus& t) { return t.minor; },
                        [](const shapes::TruncatedSpace& t) { return t.radius; },
                    },
                    resolved());
}

double DomainSpec::diameter() const {
  return std::visit(overloaded{
                        [](const shapes::Ball& b) { return 2.0 * b.radius; },
                        [](const shapes::Annulus& a) { return 2.0 * a.outer; },
                        [](const shapes::Box& b) { return norm(b.hi - b.lo); },
                        [](const shapes::SolidTorus& t) { return 2.0 * (t.major + t.minor); },
                        [](const shapes::TruncatedSpace& t) { return 2.0 * t.radius; },
                    },
                    resolved());
}

DomainSpec scale_domain(const DomainSpec& spec, double lambda) {
  if (!(lambda >= 1.0) || !std::isfinite(lambda))
    throw DomainError("scale_domain: lambda must be >= 1 (domains only expand)");
  return DomainSpec(spec.base(), spec.scale() * lambda);
}

RegionPredicate::RegionPredicate(DomainSpec base, double margin)
    : base_(std::move(base)), margin_(margin) {}

RegionPredicate region(const DomainSpec& spec, double margin) {
  if (!std::isfinite(margin)) throw DomainError("region: margin must be finite");
  if (margin < 0.0 && -margin >= spec.inradius())
    throw GeometryError("region: erosion by " + std::to_string(-margin) + " empties " + spec.kind() +
                        " (inradius " + std::to_string(spec.inradius()) + ")");
  return RegionPredicate(spec, margin);
}

}  // namespace splab
