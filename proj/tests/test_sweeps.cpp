#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "splab/errors.hpp"
#include "splab/sweeps.hpp"

using namespace splab;
namespace fs = std::filesystem;

namespace {

SweepConfig tiny() {
  SweepConfig c;
  c.rho = {0.5};
  c.lambda3d = {1, 2};
  c.lambda_radial = {4, 8};
  c.lambda_annulus = {2};
  c.omega_res = {2, 1};
  c.ball_res = {2, 1};
  c.annulus_res = {1, 0.5};
  c.radial_cells_per_unit = 16;
  c.solver.max_iters = 400;
  c.solver.grad_tol = 1e-6;
  return c;
}

fs::path scratch(const char* name) {
  auto d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("SweepConfig: json round trip and validation") {
  const auto c = tiny();
  const auto back = sweep_config_from_json(to_json(c));
  CHECK(config_hash(back) == config_hash(c));
  CHECK(to_json(back) == to_json(c));

  Json j = to_json(c);
  j["geometry"]["R"] = 5.0;
  CHECK_THROWS_AS(sweep_config_from_json(j), ContractViolation);
  j = to_json(c);
  j["geometry"]["r"] = 2.5;
  CHECK_THROWS_AS(sweep_config_from_json(j), ContractViolation);
  j = to_json(c);
  j["geometry"]["omega"] = domain_to_json(DomainSpec(shapes::Box{{1, 1, 1}, {3, 3, 3}}));
  CHECK_THROWS_AS(sweep_config_from_json(j), ContractViolation);
  j = to_json(c);
  j["bogus"] = 1;
  CHECK_THROWS_AS(sweep_config_from_json(j), ContractViolation);
  j = to_json(c);
  j["quantities"] = {"c", "zeta"};
  CHECK_THROWS_AS(sweep_config_from_json(j), ContractViolation);
  j = to_json(c);
  j["lambda3d"] = {0.5};
  CHECK_THROWS_AS(sweep_config_from_json(j), ContractViolation);
  CHECK(sweep_config_from_json(Json::object()).lambda_radial == SweepConfig{}.lambda_radial);
}

TEST_CASE("run_sweep: workers, resume and derived rows") {
  const auto c = tiny();
  const auto dir = scratch("splab_test_sweep");
  const auto a = run_sweep(c, {1, dir / "cache", {}});
  const auto b = run_sweep(c, {2, {}, {}});
  CHECK(a.failures == 0);
  CHECK(sweep_csv(a.records) == sweep_csv(b.records));

  const auto again = run_sweep(c, {2, dir / "cache", {}});
  CHECK(again.resumed > 0);
  CHECK(sweep_csv(again.records) == sweep_csv(a.records));
  CHECK(again.fields.c.size() == a.fields.c.size());

  double c_inf = 0.0;
  int n_l = 0;
  for (const auto& r : a.records) {
    CHECK(std::isfinite(r.value));
    if (r.quantity == "c_inf") c_inf = r.value;
    if (r.quantity == "l") ++n_l;
  }
  CHECK(c_inf < 0.0);
  CHECK(n_l == 1);
  for (const auto& r : a.records)
    if (r.quantity != "c_inf") CHECK(r.gap == doctest::Approx(r.value - c_inf).epsilon(1e-12));
  const auto only = sweep_csv(a.records, "b_star");
  CHECK(std::count(only.begin(), only.end(), '\n') == 5);

  bool saw_floor = false, saw_chain = false;
  for (const auto& row : a.audits.rows) {
    if (row.property == "c_inf_below_c") saw_chain = true;
    if (row.property == "a_gap_floor") saw_floor = true;
    if (row.property.starts_with("c_inf_below") || row.property == "c_below_b_plus_terms") CHECK(row.pass);
  }
  CHECK(saw_floor);
  CHECK(saw_chain);

  const auto rep = convergence_report(a, 0.5);
  CHECK(rep.lambda == 2.0);
  CHECK(rep.profile_gaps.size() == 2);
  CHECK(rep.omega_inf < 0.0);
  CHECK_THROWS_AS(convergence_report(a, 0.3), ContractViolation);
  fs::remove_all(dir);
}

TEST_CASE("run_sweep: failing points are flagged and the sweep continues") {
  auto c = tiny();
  c.quantities = {"c_inf", "b_star"};
  c.solver.max_iters = 1;
  c.solver.restarts = 1;
  const auto r = run_sweep(c);
  for (const auto& rec : r.records) CHECK(rec.stagnated);
  c.solver.max_iters = 400;
  c.lambda3d = {1e6};
  c.quantities = {"c"};
  CHECK_THROWS_AS(run_sweep(c), ResourceError);
}

TEST_CASE("profile_gap: sampled reference profile") {
  auto w = RadialField::on_interval(6.0, 600);
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = std::exp(-w.r(j) * w.r(j));
  auto g = build_grid(DomainSpec(shapes::Ball{{}, 5.0}), 6, 1);
  const Vec3 ctr{0.5, -0.25, 0.1};
  const auto u = ScalarField::sample(g, [&](Vec3 x) { return w.at(norm(x - ctr)); });
  CHECK(profile_gap(u, ctr, w, 3.0) <= 0.05);
  const auto v = ScalarField::sample(g, [&](Vec3 x) { return 0.5 * w.at(norm(x - ctr)); });
  CHECK(profile_gap(v, ctr, w, 3.0) == doctest::Approx(0.5).epsilon(0.05));
}
