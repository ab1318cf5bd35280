#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "splab/errors.hpp"
#include "splab/kernels.hpp"
#include "splab/minimize.hpp"
#include "splab/topology.hpp"

using namespace splab;

namespace {

SolverOptions quick() {
  SolverOptions o;
  o.max_iters = 400;
  o.grad_tol = 1e-6;
  return o;
}

}  // namespace

TEST_CASE("project_mass: scaling, idempotence, sign pattern") {
  auto g = build_grid(DomainSpec(shapes::Box{{0, 0, 0}, {1, 1, 1}}), 6, 1);
  auto u = ScalarField::sample(g, [](Vec3 x) { return std::sin(7 * x.x) + 0.3 * x.y; });
  const double m = mass(u);
  for (double& v : u.values) v *= 2.0 / std::sqrt(m);
  CHECK(mass(u) == doctest::Approx(4.0).epsilon(1e-12));
  const auto p1 = project_mass(u, 1.0);
  for (std::size_t c = 0; c < g->size(); ++c) {
    CHECK(p1[c] == doctest::Approx(0.5 * u[c]).epsilon(1e-12));
    CHECK((p1[c] > 0) == (u[c] > 0));
  }
  const auto p2 = project_mass(p1, 1.0);
  double worst = 0.0;
  for (std::size_t c = 0; c < g->size(); ++c) worst = std::max(worst, std::abs(p2[c] - p1[c]));
  CHECK(worst <= 4e-16 * *std::max_element(p1.values.begin(), p1.values.end()));
  CHECK_THROWS_AS(project_mass(ScalarField(g), 1.0), ContractViolation);

  auto w = RadialField::on_interval(1.0, 512);
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = 1.0 - w.r(j);
  CHECK(radial_mass(project_mass(w, 0.7)) == doctest::Approx(0.49).epsilon(1e-12));
}

TEST_CASE("SolverOptions: validation") {
  SolverOptions o;
  CHECK_NOTHROW(o.validate());
  o.armijo = 1.0;
  CHECK_THROWS_AS(o.validate(), ContractViolation);
  o = {};
  o.max_iters = 0;
  CHECK_THROWS_AS(o.validate(), ContractViolation);
  o = {};
  o.backtrack = 1.5;
  CHECK_THROWS_AS(o.validate(), ContractViolation);
}

TEST_CASE("minimize_constrained: ball ground state at small mass") {
  auto g = build_grid(DomainSpec(shapes::Ball{{}, 4.0}), 2, 1);
  const auto r = minimize_constrained(g, 2.5, 0.5, InitPreset{}, quick());
  CHECK(r.trace.status == SolveStatus::converged);
  CHECK(r.nonnegative);
  CHECK(r.min_value >= -1e-8);
  CHECK(r.omega.residual <= 10 * quick().grad_tol);
  CHECK(r.energy.total <= r.trace.initial_energy);
  CHECK(r.trace.monotone);
  CHECK(r.trace.max_mass_drift <= 1e-10);
  CHECK(r.energy.mass == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(norm(r.barycenter) <= g->h());
}

TEST_CASE("minimize_constrained: deterministic and multistart") {
  auto g = build_grid(DomainSpec(shapes::Box{{-2, -2, -2}, {2, 2, 2}}), 2, 1);
  SolverOptions o = quick();
  o.restarts = 3;
  o.seed = 7;
  const auto a = minimize_constrained(g, 2.5, 0.5, InitPreset{}, o);
  const auto b = minimize_constrained(g, 2.5, 0.5, InitPreset{}, o);
  CHECK(a.u.values == b.u.values);
  CHECK(a.energy.total == b.energy.total);
  CHECK(a.trace.restart_index >= 0);
  CHECK(a.trace.restart_index < 3);
  o.restarts = 1;
  const auto c = minimize_constrained(g, 2.5, 0.5, InitPreset{}, o);
  CHECK(a.energy.total <= c.energy.total + 1e-12);
}

TEST_CASE("minimize_constrained: init presets and contracts") {
  auto g = build_grid(DomainSpec(shapes::Ball{{}, 2.0}), 3, 1);
  CHECK_THROWS_AS(minimize_constrained(g, 2.5, 0.0, InitPreset{}, quick()), ContractViolation);
  CHECK_THROWS_AS(minimize_constrained(g, 2.5, 0.5, InitPreset{InitKind::gaussian, {5, 0, 0}, 0.5}, quick()),
                  DomainError);
  for (InitKind k : {InitKind::gaussian, InitKind::eigenfield, InitKind::random}) {
    const auto r = minimize_constrained(g, 2.5, 0.5, InitPreset{k, {}, 0.0}, quick());
    CHECK(r.energy.total <= r.trace.initial_energy);
    CHECK(r.trace.max_mass_drift <= 1e-10);
  }
}

TEST_CASE("minimize_constrained: refinement trend") {
  std::vector<double> e;
  for (double n : {2.0, 3.0, 4.0}) {
    auto g = build_grid(DomainSpec(shapes::Ball{{}, 2.0}), n, 1);
    e.push_back(minimize_constrained(g, 2.5, 0.5, InitPreset{}, quick()).energy.total);
  }
  CHECK(std::abs(e[2] - e[1]) <= 4 * std::abs(e[1] - e[0]));
}

TEST_CASE("radial_minimize: truncation stability and sign of the limit") {
  SolverOptions o;
  o.max_iters = 2000;
  o.grad_tol = 1e-7;
  RadialProblem pr;
  pr.p = 2.5;
  pr.rho = 0.5;
  pr.potential = RadialPotential::newton;
  pr.outer = 32;
  pr.intervals = 1024;
  const auto a32 = radial_minimize(pr, o);
  pr.outer = 64;
  pr.intervals = 2048;
  const auto a64 = radial_minimize(pr, o);
  CHECK(a64.trace.status == SolveStatus::converged);
  CHECK(a64.energy.total < 0.0);
  CHECK(a64.omega.omega < 0.0);
  CHECK(std::abs(a32.energy.total - a64.energy.total) <= 0.01 * std::abs(a64.energy.total));
  CHECK(a64.nonnegative);

  pr.potential = RadialPotential::dirichlet;
  const auto b64 = radial_minimize(pr, o);
  CHECK(b64.energy.total == doctest::Approx(a64.energy.total).epsilon(0.01));

  pr.intervals = 100;
  CHECK_THROWS_AS(radial_minimize(pr, o), ContractViolation);
}

TEST_CASE("radial_minimize: 3D ball solve reaches the radial level") {
  RadialProblem pr;
  pr.p = 2.5;
  pr.rho = 0.5;
  pr.outer = 4.0;
  pr.intervals = 1024;
  const auto rad = radial_minimize(pr, quick());
  auto g = build_grid(DomainSpec(shapes::Ball{{}, 4.0}), 4, 1);
  ScalarField init = ScalarField::sample(g, [&](Vec3 x) { return rad.u.at(norm(x)); });
  const auto r3 = minimize_constrained(g, 2.5, 0.5, init, quick());
  CHECK(r3.energy.total <= rad.energy.total + 0.02 * std::abs(rad.energy.total));
}

TEST_CASE("minimize_with_barycenter: symmetric start keeps the target") {
  auto g = build_grid(DomainSpec(shapes::Annulus{{}, 1.0, 3.0}), 3, 1);
  // Shell-shaped start: symmetric about the centre of the hole.
  auto init = ScalarField::sample(g, [](Vec3 x) {
    const double r = norm(x);
    return std::max(0.0, (r - 1.0) * (3.0 - r));
  });
  init = project_mass(init, 0.5);
  SolverOptions o = quick();
  o.max_iters = 200;
  const auto r = minimize_with_barycenter(g, 2.5, 0.5, {}, init, o);
  CHECK(r.constraint_met);
  CHECK(r.violation <= g->h());
  CHECK(r.result.energy.total <= r.penalized + 1e-12);
  CHECK(norm(barycenter(r.result.u).beta) <= g->h());
}
