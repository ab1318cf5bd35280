#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>

#include "doctest.h"
#include "splab/errors.hpp"
#include "splab/grid.hpp"
#include "splab/kernels.hpp"

using namespace splab;
using std::numbers::pi;

namespace {

Vec3 random_point(std::mt19937_64& rng, double half) {
  std::uniform_real_distribution<double> d(-half, half);
  return {d(rng), d(rng), d(rng)};
}

}  // namespace

TEST_CASE("build_grid: ball cell count tracks the volume") {
  auto g = build_grid(DomainSpec(shapes::Ball{{}, 1.0}), 16, 1);
  CHECK(g->h() == doctest::Approx(0.0625));
  const double expected = (4.0 * pi / 3.0) / g->cell_volume();
  CHECK(std::abs(g->masked_count() - expected) <= 0.02 * expected);
}

TEST_CASE("build_grid: axis-aligned unit box has exactly 4^3 cells") {
  auto g = build_grid(DomainSpec(shapes::Box{{0, 0, 0}, {1, 1, 1}}), 4, 2);
  CHECK(g->masked_count() == 64);
  // Every face cell is a boundary cell and sits half a cell from the wall.
  for (const auto& e : g->boundary_edges()) CHECK(e.theta == doctest::Approx(0.5));
}

TEST_CASE("build_grid: annulus hole stays empty") {
  for (double cpu : {4.0, 7.0, 12.0}) {
    auto g = build_grid(DomainSpec(shapes::Annulus{{}, 1.0, 2.0}), cpu, 1);
    const double limit = 1.0 - g->h() * std::sqrt(3.0);
    for (std::size_t c = 0; c < g->size(); ++c)
      if (g->inside(c)) CHECK(norm(g->center(c)) >= limit);
  }
}

TEST_CASE("build_grid: every masked cell satisfies the membership predicate") {
  const DomainSpec torus(shapes::SolidTorus{{0.1, -0.2, 0.0}, 2.0, 0.6});
  auto g = build_grid(torus, 8, 2);
  for (std::size_t c = 0; c < g->size(); ++c)
    if (g->inside(c)) CHECK(torus.contains(g->center(c)));
  CHECK(g->masked_count() > 0);
}

TEST_CASE("build_grid: cell cap names the limiting axis") {
  const DomainSpec slab(shapes::Box{{0, 0, 0}, {1, 100, 1}});
  try {
    build_grid(slab, 4, 1);
    FAIL("expected ResourceError");
  } catch (const ResourceError& e) {
    CHECK(std::string(e.what()).find("axis y") != std::string::npos);
  }
  ::setenv("SPLAB_CELL_CAP", "500", 1);
  CHECK_NOTHROW(build_grid(slab, 4, 1));
  ::unsetenv("SPLAB_CELL_CAP");
  CHECK(cell_cap() == 192);
}

TEST_CASE("domain validation rejects degenerate shapes") {
  CHECK_THROWS_AS(DomainSpec(shapes::Ball{{}, 0.0}), DomainError);
  CHECK_THROWS_AS(DomainSpec(shapes::Annulus{{}, 2.0, 1.0}), DomainError);
  CHECK_THROWS_AS(DomainSpec(shapes::Box{{0, 0, 0}, {1, 0, 1}}), DomainError);
  CHECK_THROWS_AS(DomainSpec(shapes::SolidTorus{{}, 1.0, 1.5}), DomainError);
}

TEST_CASE("scale_domain acts on the set") {
  const DomainSpec ball(shapes::Ball{{1, 0, 0}, 1.0});
  const auto scaled = std::get<shapes::Ball>(scale_domain(ball, 2.0).resolved());
  CHECK(scaled.center == Vec3{2, 0, 0});
  CHECK(scaled.radius == 2.0);

  const DomainSpec ann(shapes::Annulus{{1, 0, 0}, 1.0, 2.0});
  const auto a3 = std::get<shapes::Annulus>(scale_domain(ann, 3.0).resolved());
  CHECK(a3.center == Vec3{3, 0, 0});
  CHECK(a3.inner == 3.0);
  CHECK(a3.outer == 6.0);

  CHECK(scale_domain(ann, 1.0) == ann);
  CHECK_THROWS_AS(scale_domain(ann, 0.5), DomainError);
}

TEST_CASE("scale composition gives identical membership") {
  std::mt19937_64 rng(7);
  const std::vector<DomainSpec> specs{
      DomainSpec(shapes::Ball{{0.3, 0, -0.2}, 1.0}), DomainSpec(shapes::Annulus{{1, 0, 0}, 0.5, 1.5}),
      DomainSpec(shapes::Box{{-1, -0.5, 0}, {1, 1, 2}}), DomainSpec(shapes::SolidTorus{{}, 1.5, 0.5})};
  for (const auto& d : specs) {
    const auto twice = scale_domain(scale_domain(d, 1.7), 2.3);
    const auto once = scale_domain(d, 1.7 * 2.3);
    for (int i = 0; i < 1000; ++i) {
      const Vec3 x = random_point(rng, 8.0);
      CHECK(twice.contains(x) == once.contains(x));
    }
  }
}

TEST_CASE("region: concentric balls under erosion and dilation") {
  std::mt19937_64 rng(11);
  const DomainSpec b2(shapes::Ball{{}, 2.0});
  const auto eroded = region(b2, -1.0);
  const auto dilated = region(b2, 1.0);
  const DomainSpec b1(shapes::Ball{{}, 1.0}), b3(shapes::Ball{{}, 3.0});
  for (int i = 0; i < 2000; ++i) {
    const Vec3 x = random_point(rng, 3.5);
    // Skip the measure-zero boundary where strict/non-strict tests differ.
    if (std::abs(norm(x) - 1.0) > 1e-12) CHECK(eroded.contains(x) == b1.contains(x));
    if (std::abs(norm(x) - 3.0) > 1e-12) CHECK(dilated.contains(x) == b3.contains(x));
    if (eroded.contains(x)) CHECK(b2.contains(x));
    if (b2.contains(x)) CHECK(dilated.contains(x));
  }
  CHECK_THROWS_AS(region(b2, -2.0), GeometryError);
}

TEST_CASE("region: eroded box keeps distance from every face") {
  std::mt19937_64 rng(3);
  const shapes::Box box{{-2, -1, 0}, {2, 1, 3}};
  const double r = 0.4;
  const auto pred = region(DomainSpec(box), -r);
  int accepted = 0;
  for (int i = 0; i < 4000; ++i) {
    const Vec3 x = random_point(rng, 3.0) + Vec3{0, 0, 1.5};
    if (!pred.contains(x)) continue;
    ++accepted;
    for (int a = 0; a < 3; ++a) {
      CHECK(x[a] - box.lo[a] >= r - 1e-12);
      CHECK(box.hi[a] - x[a] >= r - 1e-12);
    }
  }
  CHECK(accepted > 100);
}

TEST_CASE("nested concentric balls give nested masks") {
  auto small = build_grid(DomainSpec(shapes::Ball{{}, 1.0}), 10, 6);
  auto big = build_grid(DomainSpec(shapes::Ball{{}, 1.4}), 10, 2);
  REQUIRE(small->dims() == big->dims());
  REQUIRE(small->origin() == big->origin());
  for (std::size_t c = 0; c < small->size(); ++c)
    if (small->inside(c)) CHECK(big->inside(c));
}

TEST_CASE("integrate: constants, volume, symmetry") {
  auto cube = build_grid(DomainSpec(shapes::Box{{0, 0, 0}, {1, 1, 1}}), 8, 1);
  auto one = ScalarField::sample(cube, [](Vec3) { return 1.0; });
  CHECK(integrate(one, *cube) == 1.0);

  auto ball = build_grid(DomainSpec(shapes::Ball{{}, 1.0}), 32, 1);
  auto ones = ScalarField::sample(ball, [](Vec3) { return 1.0; });
  CHECK(std::abs(integrate(ones) - 4.0 * pi / 3.0) <= 0.01 * 4.0 * pi / 3.0);

  auto odd = ScalarField::sample(ball, [](Vec3 x) { return x.x * std::exp(x.y) + x.z * x.z * x.z; });
  CHECK(std::abs(integrate(odd)) <= 1e-12);

  CHECK_THROWS_AS(integrate(odd, *cube), ContractViolation);
}

TEST_CASE("integrate is linear and monotone") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  auto g = build_grid(DomainSpec(shapes::Ball{{}, 1.0}), 10, 1);
  for (int trial = 0; trial < 10; ++trial) {
    ScalarField a(g), b(g);
    for (std::size_t c = 0; c < g->size(); ++c)
      if (g->inside(c)) {
        a[c] = d(rng);
        b[c] = d(rng) - 0.5;
      }
    const double s = d(rng) * 3.0 - 1.0;
    ScalarField comb(g);
    for (std::size_t c = 0; c < g->size(); ++c) comb[c] = a[c] + s * b[c];
    CHECK(integrate(comb) == doctest::Approx(integrate(a) + s * integrate(b)).epsilon(1e-12));
    CHECK(integrate(a) >= 0.0);
  }
}

TEST_CASE("parallel kernels agree with the serial reference") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  auto g = build_grid(DomainSpec(shapes::SolidTorus{{}, 1.2, 0.5}), 12, 1);
  std::vector<double> u(g->size(), 0.0), v(g->size(), 0.0);
  for (std::size_t c = 0; c < g->size(); ++c)
    if (g->inside(c)) {
      u[c] = nd(rng);
      v[c] = nd(rng);
    }
  std::vector<double> par(g->size()), ser(g->size());
  for (double shift : {0.0, 0.7}) {
    kernels::dirichlet_apply(*g, u, par, shift);
    kernels::serial::dirichlet_apply(*g, u, ser, shift);
    for (std::size_t c = 0; c < g->size(); ++c) CHECK(par[c] == doctest::Approx(ser[c]).epsilon(1e-12));
    kernels::neumann_apply(*g, u, par, shift);
    kernels::serial::neumann_apply(*g, u, ser, shift);
    for (std::size_t c = 0; c < g->size(); ++c) CHECK(par[c] == doctest::Approx(ser[c]).epsilon(1e-12));
  }
  CHECK(kernels::dot(*g, u, v) == doctest::Approx(kernels::serial::dot(*g, u, v)).epsilon(1e-12));
  CHECK(kernels::sum(*g, u) == doctest::Approx(kernels::serial::sum(*g, u)).epsilon(1e-10));

  // Symmetry of the discrete operator: <v, A u> = <u, A v>.
  std::vector<double> au(g->size()), av(g->size());
  kernels::dirichlet_apply(*g, u, au);
  kernels::dirichlet_apply(*g, v, av);
  CHECK(kernels::dot(*g, v, au) == doctest::Approx(kernels::dot(*g, u, av)).epsilon(1e-12));
}
