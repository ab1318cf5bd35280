#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "splab/energy.hpp"
#include "splab/errors.hpp"
#include "splab/kernels.hpp"
#include "splab/minimize.hpp"
#include "splab/topology.hpp"

using namespace splab;

namespace {

ScalarField bump(GridPtr g, Vec3 c, double w) {
  return ScalarField::sample(g, [&](Vec3 x) {
    const Vec3 d = x - c;
    return std::exp(-dot(d, d) / (w * w));
  });
}

RadialField profile(double outer) {
  auto w = RadialField::on_interval(outer, 512);
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double r = w.r(j);
    w[j] = std::exp(-r * r) * (1.0 - r / outer);
  }
  return w;
}

}  // namespace

TEST_CASE("barycenter: symmetric fields and scale invariance") {
  auto g = build_grid(DomainSpec(shapes::Box{{-3, -3, -3}, {3, 3, 3}}), 4, 1);
  const Vec3 x0{0.4, -0.7, 1.1};
  const auto u = bump(g, x0, 0.6);
  const auto rep = barycenter(u);
  CHECK(norm(rep.beta - x0) <= g->h());
  CHECK(rep.kinetic_mass == doctest::Approx(dirichlet_integral(u)).epsilon(1e-12));
  ScalarField v = u;
  for (double& x : v.values) x *= -3.0;
  const auto rv = barycenter(v);
  CHECK(norm(rv.beta - rep.beta) <= 1e-12);
  CHECK_THROWS_AS(barycenter(ScalarField(g)), ContractViolation);
}

TEST_CASE("barycenter: translation on shifted grids") {
  const Vec3 z{1.3, -0.45, 2.2};
  auto g0 = build_grid(DomainSpec(shapes::Ball{{}, 2.0}), 5, 1);
  auto gz = build_grid(DomainSpec(shapes::Ball{z, 2.0}), 5, 1, z);
  const Vec3 c{0.3, 0.1, -0.2};
  auto f = [&](Vec3 x) { return std::exp(-dot(x - c, x - c)) * (4.0 - dot(x, x)); };
  const auto u0 = ScalarField::sample(g0, f);
  const auto uz = ScalarField::sample(gz, [&](Vec3 x) { return f(x - z); });
  CHECK(norm(barycenter(uz).beta - (barycenter(u0).beta + z)) <= 1e-9);
}

TEST_CASE("barycenter: support in a ball keeps beta in the ball") {
  auto g = build_grid(DomainSpec(shapes::Box{{-3, -3, -3}, {3, 3, 3}}), 4, 1);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> pos(-1.5, 1.5);
  for (int t = 0; t < 10; ++t) {
    const Vec3 y{pos(rng), pos(rng), pos(rng)};
    const double rad = 1.0;
    auto u = ScalarField::sample(g, [&](Vec3 x) {
      const double s = norm(x - y);
      return s < rad ? (rad - s) * (1.0 + 0.5 * std::sin(3 * x.x + x.z)) : 0.0;
    });
    CHECK(norm(barycenter(u).beta - y) <= rad);
  }
}

TEST_CASE("barycenter: concentration in a half annulus") {
  const double big = 2.0, small = 1.0, lam = 3.0;
  auto g = build_grid(DomainSpec(shapes::Annulus{{}, lam * small, lam * big}), 3, 1);
  for (Vec3 dir : {Vec3{1, 0, 0}, Vec3{0, -1, 0}, Vec3{0.6, 0, 0.8}}) {
    const auto u = bump(g, 1.5 * lam * small * dir, 0.5);
    CHECK(norm(barycenter(u).beta) >= (small / (2 * big)) * lam * small * 0.95);
  }
}

TEST_CASE("barycenter_penalty_gradient: finite differences") {
  auto g = build_grid(DomainSpec(shapes::Box{{-2, -2, -2}, {2, 2, 2}}), 3, 1);
  const auto u = bump(g, {0.3, 0.2, -0.4}, 0.7);
  const Vec3 t{-0.2, 0.5, 0.1};
  const auto gr = barycenter_penalty_gradient(u, t);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(-1, 1);
  ScalarField v(g);
  for (std::size_t c = 0; c < g->size(); ++c)
    if (g->inside(c)) v[c] = d(rng);
  auto pen = [&](const ScalarField& w) {
    const Vec3 b = barycenter(w).beta - t;
    return dot(b, b);
  };
  const double eps = 1e-5;
  ScalarField up = u, um = u;
  kernels::axpy(eps, v.values, up.values);
  kernels::axpy(-eps, v.values, um.values);
  const double fd = (pen(up) - pen(um)) / (2 * eps);
  const double an = kernels::dot(*g, gr.values, v.values) * g->cell_volume();
  CHECK(fd == doctest::Approx(an).epsilon(1e-5));
}

TEST_CASE("transplant: barycenter, mass, eroded-region contract") {
  const DomainSpec omega(shapes::Box{{-1, -1, -1}, {1, 1, 1}});
  const double lam = 4.0, r = 0.3;
  const DomainSpec lo = scale_domain(omega, lam);
  auto g = build_grid(lo, 3, 1);
  const auto eroded = region(lo, -lam * r);
  const auto w = profile(lam * r);
  for (Vec3 y : {Vec3{}, Vec3{2.0, -1.5, 0.7}, Vec3{-2.5, 2.5, 2.5}}) {
    const auto u = transplant(w, y, g, eroded, 0.5);
    CHECK(mass(u) == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(norm(barycenter(u).beta - y) <= 2 * g->h());
  }
  CHECK_THROWS_AS(transplant(w, {3.5, 0, 0}, g, eroded, 0.5), DomainError);
}

TEST_CASE("sublevel_threshold: arithmetic") {
  const auto s = sublevel_threshold(-1.0, 10.0, 1.0, 0.5, 0.2);
  CHECK(s.level == doctest::Approx(-0.85).epsilon(1e-14));
  CHECK(s.delta == 0.2);
  CHECK(s.level > s.b_star);
  for (double lam : {2.0, 10.0, 1e3, 1e8}) {
    const auto t = sublevel_threshold(-0.2, lam, 0.5, 0.1);
    CHECK(t.level - t.b_star > 1.0 / lam);
  }
  CHECK(sublevel_threshold(-0.2, 1e12, 0.5, 0.1).level == doctest::Approx(-0.2).epsilon(1e-10));
  CHECK_THROWS_AS(sublevel_threshold(-1.0, 1.0, 1.0, 0.0), ContractViolation);
}

TEST_CASE("containment_audit: verdicts and skipped candidates") {
  const DomainSpec omega(shapes::Box{{-1, -1, -1}, {1, 1, 1}});
  const auto dil = region(scale_domain(omega, 4.0), 0.8);
  std::vector<SublevelCandidate> c{{"in", {1, 1, 1}, -0.5}, {"edge", {4.5, 0, 0}, -0.4},
                                   {"out", {6, 0, 0}, -0.3}, {"high", {10, 0, 0}, 2.0}};
  const auto rep = containment_audit(c, 0.0, dil, 0.1);
  REQUIRE(rep.items.size() == 4);
  CHECK(rep.items[0].contained);
  CHECK(rep.items[1].contained);
  CHECK_FALSE(rep.items[2].contained);
  CHECK_FALSE(rep.items[3].audited);
  CHECK(rep.violations == 1);
  CHECK_FALSE(rep.pass);
  c.erase(c.begin() + 2);
  CHECK(containment_audit(c, 0.0, dil, 0.1).pass);
}

TEST_CASE("target_lattice: points lie in the eroded set") {
  const DomainSpec lo = scale_domain(DomainSpec(shapes::Box{{-1, -1, -1}, {1, 1, 1}}), 3.0);
  const auto er = region(lo, -0.9);
  const auto pts = target_lattice(er, lo.bounding_box(), 0.3, 5);
  CHECK_FALSE(pts.empty());
  CHECK(pts.size() <= 125u);
  for (const auto& y : pts) CHECK(er.contains(y));
}

TEST_CASE("transplanted fields sit below the threshold and are contained") {
  const DomainSpec omega(shapes::Box{{-1, -1, -1}, {1, 1, 1}});
  const double lam = 3.0, r = 0.6, rho = 0.5;
  const DomainSpec lo = scale_domain(omega, lam);
  auto g = build_grid(lo, 3, 1);
  RadialProblem pr;
  pr.outer = lam * r;
  pr.intervals = 512;
  pr.rho = rho;
  const auto ws = radial_minimize(pr, SolverOptions{});
  const auto level = sublevel_threshold(ws.energy.total, lam, rho, 0.0);
  const auto eroded = region(lo, -lam * r);
  std::vector<SublevelCandidate> cands;
  for (const auto& y : target_lattice(eroded, lo.bounding_box(), 0.5, 3)) {
    const auto u = transplant(ws.u, y, g, eroded, rho);
    cands.push_back({"y", barycenter(u).beta, energy_domain(u, 2.5).total});
    CHECK(cands.back().energy < level.level);
  }
  const auto rep = containment_audit(cands, level.level, region(lo, lam * r), 2 * g->h());
  CHECK(rep.pass);
}
