#include <cmath>

#include "doctest.h"
#include "splab/errors.hpp"
#include "splab/scalings.hpp"

using namespace splab;

TEST_CASE("exponents: values at p = 2.5 and range") {
  const auto e = exponents(2.5);
  CHECK(e.alpha == doctest::Approx(1.6).epsilon(1e-15));
  CHECK(e.gamma == doctest::Approx(2.8).epsilon(1e-15));
  CHECK(e.a_u == doctest::Approx(1.6).epsilon(1e-15));
  CHECK(e.b_x == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(exponents(3.0 - 1e-9).alpha < 1e-7);
  CHECK_THROWS_AS(exponents(2.0), DomainError);
  CHECK_THROWS_AS(exponents(3.5), DomainError);
}

TEST_CASE("exponents: identities across the admissible range") {
  for (int i = 1; i <= 50; ++i) {
    const double p = 2.0 + i / 51.0;
    const auto e = exponents(p);
    CHECK(e.alpha > 0.0);
    CHECK(e.gamma > 0.0);
    CHECK(2 * e.a_u - 3 * e.b_x == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(2 * e.a_u - e.b_x == doctest::Approx(e.gamma).epsilon(1e-13));
    CHECK(4 * e.a_u - 5 * e.b_x == doctest::Approx(e.alpha + e.gamma).epsilon(1e-13));
    CHECK(p * e.a_u - 3 * e.b_x == doctest::Approx(e.gamma).epsilon(1e-13));
  }
}

TEST_CASE("rescale: identity, mass and round trip") {
  auto v = RadialField::on_interval(10.0, 1000);
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = std::exp(-v.r(j) * v.r(j) / 4) * (1 - v.r(j) / 10);
  v = project_mass(v, 1.0);
  const auto same = rescale(v, 1.0, 2.5, RescaleDirection::v_to_w);
  CHECK(same.values == v.values);
  CHECK(same.h == v.h);
  for (double rho : {0.25, 0.5, 2.0}) {
    const auto w = rescale(v, rho, 2.5, RescaleDirection::v_to_w);
    CHECK(radial_mass(w) == doctest::Approx(rho * rho).epsilon(1e-12));
    const auto back = rescale(w, rho, 2.5, RescaleDirection::w_to_v);
    double err = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) err = std::max(err, std::abs(back[j] - v[j]));
    CHECK(err <= 1e-8);
    CHECK(back.h == doctest::Approx(v.h).epsilon(1e-14));
  }
}

TEST_CASE("scaling_audit: term-by-term identities") {
  ScalingAuditOptions o;
  o.outer = 40;
  o.intervals = 1024;
  const auto a = scaling_audit(0.5, 2.5, o, 0.03);
  for (const auto& r : a.report.rows) {
    INFO(r.property << " lhs=" << r.lhs << " rhs=" << r.rhs);
    CHECK(r.pass);
  }
  CHECK(a.w.omega.omega < 0.0);
}
