#include "splab/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "splab/appendix.hpp"
#include "splab/elliptic.hpp"
#include "splab/energy.hpp"
#include "splab/errors.hpp"
#include "splab/greens.hpp"
#include "splab/kernels.hpp"
#include "splab/minimize.hpp"
#include "splab/scalings.hpp"
#include "splab/topology.hpp"

namespace splab {

namespace {

using std::numbers::pi;
constexpr double kP = 2.5;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vec3 random_in_ball(std::mt19937_64& rng, double r) {
  std::uniform_real_distribution<double> c(-r, r);
  for (;;) {
    const Vec3 v{c(rng), c(rng), c(rng)};
    if (norm(v) < r) return v;
  }
}

ScalarField random_bumps(GridPtr g, std::mt19937_64& rng, double amp_scale) {
  std::uniform_real_distribution<double> pos(-0.4, 0.4), wid(0.2, 0.5), amp(-0.3, 1.0);
  std::vector<std::array<double, 5>> b(3);
  for (auto& q : b) q = {pos(rng), pos(rng), pos(rng), wid(rng), amp(rng) * amp_scale};
  const DomainSpec spec = g->spec();
  return ScalarField::sample(g, [&](Vec3 x) {
    double s = 0.0;
    for (const auto& q : b) {
      const Vec3 d = x - Vec3{q[0], q[1], q[2]};
      s += q[4] * std::exp(-dot(d, d) / (q[3] * q[3]));
    }
    return s * std::min(1.0, -spec.signed_distance(x) * 3.0);
  });
}

double inner(const ScalarField& a, const ScalarField& b) {
  return kernels::dot(*a.grid, a.values, b.values) * a.grid->cell_volume();
}

AuditRow flag_row(std::string property, std::string domain, double lambda, bool ok, std::string note = {}) {
  AuditRow r{std::move(property), std::move(domain), lambda, ok ? 1.0 : 0.0, 1.0, 0.0, ok, std::move(note)};
  return r;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"elliptic", "greens",   "energy",  "minimize",
                                              "topology", "scalings", "appendix"};
  return names;
}

AuditReport run_suite(const std::string& name, const VerifyOptions& opts) {
  if (name == "all") {
    AuditReport all;
    all.suite = "all";
    for (const auto& n : suite_names()) all.append(run_suite(n, opts));
    return all;
  }
  if (name == "elliptic") return verify_elliptic(opts);
  if (name == "greens") return verify_greens(opts);
  if (name == "energy") return verify_energy(opts);
  if (name == "minimize") return verify_minimize(opts);
  if (name == "topology") return verify_topology(opts);
  if (name == "scalings") return verify_scalings(opts);
  if (name == "appendix") return verify_appendix(opts);
  throw ContractViolation("unknown suite '" + name + "'");
}

AuditReport verify_elliptic(const VerifyOptions& opts) {
  AuditReport rep;
  rep.suite = "elliptic";
  const DomainSpec ball(shapes::Ball{{}, 1.0});
  {
    const auto t0 = std::chrono::steady_clock::now();
    auto g = build_grid(ball, opts.quick ? 24 : 48, 1);
    const auto u = poisson_dirichlet(ScalarField::sample(g, [](Vec3) { return 1.0; }));
    double worst = 0.0;
    for (std::size_t c = 0; c < g->size(); ++c)
      if (g->inside(c)) {
        const Vec3 x = g->center(c);
        worst = std::max(worst, std::abs(u[c] - (1.0 - dot(x, x)) / 6.0));
      }
    rep.add(bound_row("poisson_ball_max_error", "ball", 1.0, worst, 0.02));
    rep.add(bound_row("poisson_ball_seconds", "ball", 1.0, seconds_since(t0), 30.0));
  }
  const double base = opts.quick ? 10 : 16;
  const double mu = first_eigenvalue(build_grid(ball, base, 1)).value;
  rep.add(relative_row("mu1_ball_pi2", "ball", 1.0, mu, pi * pi, 0.01));
  for (double lam : {2.0, 4.0}) {
    const double ml = first_eigenvalue(build_grid(scale_domain(ball, lam), (base + 2) / lam, 1)).value;
    rep.add(relative_row("mu1_dilation", "ball", lam, ml * lam * lam / mu, 1.0, 0.02));
  }
  return rep;
}

AuditReport verify_greens(const VerifyOptions& opts) {
  AuditReport rep;
  rep.suite = "greens";
  std::mt19937_64 rng(opts.seed);
  {
    double worst = 0.0, worst_bd = 0.0, worst_sym = 0.0;
    int violations = 0;
    for (int t = 0; t < 100; ++t) {
      const Vec3 x = random_in_ball(rng, 0.95), y = random_in_ball(rng, 0.95);
      const double h1 = regular_part_ball(x, y, 1.0);
      for (double lam : {2.0, 5.0})
        worst = std::max(worst, std::abs(lam * regular_part_ball(lam * x, lam * y, lam) - h1) / h1);
      worst_sym = std::max(worst_sym, std::abs(regular_part_ball(y, x, 1.0) - h1) / h1);
      if (!(regular_part_ball(x, y, 2.0) < h1)) ++violations;
      const Vec3 s = x / norm(x);
      worst_bd = std::max(worst_bd, std::abs(newton_kernel(s, y) - regular_part_ball(s, y, 1.0)) / newton_kernel(s, y));
    }
    rep.add(bound_row("image_charge_dilation", "ball", 0.0, worst, 1e-12));
    rep.add(bound_row("image_charge_symmetry", "ball", 0.0, worst_sym, 1e-12));
    rep.add(bound_row("image_charge_boundary_identity", "ball", 0.0, worst_bd, 1e-12));
    rep.add(bound_row("domain_monotonicity_violations", "ball", 0.0, violations, 0.0));
    rep.add(relative_row("centre_value", "ball", 1.0, regular_part_ball({}, {}, 3.0), 1.0 / (12 * pi), 1e-14));
  }
  const DomainSpec ball(shapes::Ball{{}, 1.0});
  {
    auto g = build_grid(ball, 16, 1);
    const Vec3 target{0.35, -0.2, 0.1};
    std::size_t c0 = 0;
    double bd = 1e300;
    for (std::size_t c = 0; c < g->size(); ++c)
      if (g->inside(c) && norm(g->center(c) - target) < bd) {
        bd = norm(g->center(c) - target);
        c0 = c;
      }
    const Vec3 y = g->center(c0);
    const auto hf = regular_part_numeric(g, y);
    double worst = 0.0;
    for (std::size_t c = 0; c < g->size(); ++c) {
      if (!g->inside(c) || norm(g->center(c)) > 0.7) continue;
      const double ex = regular_part_ball(g->center(c), y, 1.0);
      worst = std::max(worst, std::abs(hf[c] - ex) / ex);
    }
    rep.add(bound_row("numeric_vs_image_charge_inner70", "ball", 1.0, worst, 0.03));
    const auto ones = ScalarField::sample(g, [](Vec3) { return 1.0; });
    rep.add(relative_row("uniform_ball_pair_energy", "ball", 1.0, pair_energy_regular(ones), 4 * pi / 9, 0.05));
  }
  {
    const int count = opts.quick ? 3 : 10;
    auto g = build_grid(ball, opts.quick ? 10 : 14, 1);
    std::uniform_real_distribution<double> wid(0.25, 0.5), amp(0.5, 2.0);
    double worst = 0.0;
    for (int t = 0; t < count; ++t) {
      const double s = wid(rng), a = amp(rng);
      const auto u = ScalarField::sample(g, [&](Vec3 x) {
        const double r2 = dot(x, x);
        return a * std::exp(-r2 / (s * s)) * (1.0 - r2);
      });
      const double dom = energy_domain(u, kP).total;
      const double whole = energy_freespace(u, kP).total;
      worst = std::max(worst, std::abs(dom - (whole - 0.25 * pair_energy_regular(u))) / std::abs(dom));
    }
    rep.add(bound_row("domain_whole_space_relation", "ball", 1.0, worst, 0.03));
  }
  {
    auto g = build_grid(ball, 12, 1);
    const auto fam = regular_bound_family(g, {0.2, 0.4, 0.6}, 8);
    bool grows = true;
    for (std::size_t i = 1; i < fam.reports.size(); ++i) grows = grows && fam.reports[i].m_value >= fam.reports[i - 1].m_value;
    rep.add(flag_row("margin_family_grows_toward_boundary", "ball", 1.0, grows && fam.log_slope < 0.0,
                     "log slope " + std::to_string(fam.log_slope)));
    const double m = sup_regular_part(build_grid(ball, 20, 1), 0.3, 32).m_value;
    rep.add(relative_row("margin_sup_ball", "ball", 1.0, m, sup_regular_part_ball(1.0, 0.3).m_value, 0.05));
  }
  return rep;
}

AuditReport verify_energy(const VerifyOptions& opts) {
  AuditReport rep;
  rep.suite = "energy";
  std::mt19937_64 rng(opts.seed + 16);
  const DomainSpec ball(shapes::Ball{{}, 1.0});
  {
    auto g = build_grid(ball, 8, 1);
    const int count = opts.quick ? 5 : 20;
    const double eps = 1e-4;
    double worst = 0.0;
    for (int t = 0; t < count; ++t) {
      const auto u = random_bumps(g, rng, 2.0);
      const auto v = random_bumps(g, rng, 1.0);
      const auto gu = gradient_from(u, evaluate_domain(u, kP, 1.0, nullptr, 1e-13).phi, kP);
      const double exact = inner(gu, v);
      ScalarField up = u, um = u;
      kernels::axpy(eps, v.values, up.values);
      kernels::axpy(-eps, v.values, um.values);
      const double fd = (evaluate_domain(up, kP, 1.0, nullptr, 1e-13).energy.total -
                         evaluate_domain(um, kP, 1.0, nullptr, 1e-13).energy.total) /
                        (2 * eps);
      worst = std::max(worst, std::abs(fd - exact) / std::max(std::abs(exact), 1e-8));
    }
    rep.add(bound_row("directional_derivative_fd", "ball", 1.0, worst, 0.01));

    const auto u = random_bumps(g, rng, 1.0);
    const auto e1 = evaluate_domain(u, kP, 1.0, nullptr, 1e-13).energy;
    ScalarField v = u;
    for (double& x : v.values) x *= 3.0;
    const auto e3 = evaluate_domain(v, kP, 1.0, nullptr, 1e-13).energy;
    rep.add(relative_row("kinetic_homogeneity", "ball", 1.0, e3.kinetic, 9.0 * e1.kinetic, 1e-10));
    rep.add(relative_row("nonlocal_homogeneity", "ball", 1.0, e3.nonlocal, 81.0 * e1.nonlocal, 1e-8));
    rep.add(relative_row("power_homogeneity", "ball", 1.0, e3.power, std::pow(3.0, kP) * e1.power, 1e-10));
  }
  {
    auto g = build_grid(ball, opts.quick ? 12 : 16, 1);
    const auto ep = first_eigenvalue(g);
    rep.add(relative_row("eigenfield_kinetic", "ball", 1.0, energy_domain(ep.field, kP).kinetic, pi * pi / 2, 0.015));
  }
  {
    std::uniform_real_distribution<double> wid(0.25, 0.5), amp(0.5, 2.0);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      const double s = wid(rng), a = amp(rng);
      auto w = RadialField::on_interval(1.0, 1024);
      for (std::size_t j = 0; j < w.size(); ++j) w[j] = a * std::exp(-w.r(j) * w.r(j) / (s * s)) * (1 - w.r(j) * w.r(j));
      const auto dom = energy_radial(w, kP, RadialPotential::dirichlet);
      const auto whole = energy_freespace(w, kP);
      const double q = dom.mass;
      worst = std::max(worst, std::abs(dom.total - (whole.total - 0.25 * q * q / (4 * pi))) / std::abs(dom.total));
    }
    rep.add(bound_row("radial_relation", "ball", 1.0, worst, 1e-9));
  }
  {
    auto g = build_grid(ball, opts.quick ? 12 : 20, 1);
    bool ok = true;
    double prev_total = 0.0;
    for (double w : {0.6, 0.4, 0.3, 0.22}) {
      auto u = ScalarField::sample(g, [&](Vec3 x) { return std::exp(-dot(x, x) / (w * w)) * std::max(0.0, 1.0 - dot(x, x)); });
      const double s = 1.0 / std::sqrt(mass(u));
      for (double& x : u.values) x *= s;
      const double e = energy_domain(u, kP).total;
      if (w < 0.6) ok = ok && e > prev_total;
      prev_total = e;
    }
    rep.add(flag_row("coercive_under_concentration", "ball", 1.0, ok));
  }
  return rep;
}

AuditReport verify_minimize(const VerifyOptions& opts) {
  AuditReport rep;
  rep.suite = "minimize";
  SolverOptions so;
  so.max_iters = 400;
  so.grad_tol = 1e-6;
  so.seed = opts.seed;
  {
    auto g = build_grid(DomainSpec(shapes::Ball{{}, 4.0}), opts.quick ? 2 : 3, 1);
    const auto r = minimize_constrained(g, kP, 0.5, InitPreset{}, so);
    rep.add(flag_row("converged", "ball", 4.0, r.trace.status == SolveStatus::converged, to_string(r.trace.status)));
    rep.add(bound_row("mass_drift", "ball", 4.0, r.trace.max_mass_drift, 1e-10));
    rep.add(bound_row("euler_lagrange_residual", "ball", 4.0, r.omega.residual, 10 * so.grad_tol));
    rep.add(flag_row("monotone_energy", "ball", 4.0, r.trace.monotone));
    rep.add(bound_row("nonnegative_minimizer", "ball", 4.0, -r.min_value, 1e-8));
  }
  {
    auto g = build_grid(DomainSpec(shapes::Box{{-2, -2, -2}, {2, 2, 2}}), 2, 1);
    SolverOptions o = so;
    o.restarts = 2;
    const auto a = minimize_constrained(g, kP, 0.5, InitPreset{InitKind::random, {}, 0.0}, o);
    const auto b = minimize_constrained(g, kP, 0.5, InitPreset{InitKind::random, {}, 0.0}, o);
    rep.add(flag_row("bit_identical_under_seed", "box", 1.0, a.u.values == b.u.values && a.energy.total == b.energy.total));
  }
  {
    SolverOptions o;
    o.max_iters = 2000;
    o.grad_tol = 1e-7;
    RadialProblem pr;
    pr.rho = 0.5;
    pr.potential = RadialPotential::newton;
    pr.outer = 32;
    pr.intervals = 1024;
    const auto a32 = radial_minimize(pr, o);
    pr.outer = 64;
    pr.intervals = 2048;
    const auto a64 = radial_minimize(pr, o);
    rep.add(relative_row("radial_truncation_drift", "whole_space", 0.0, a32.energy.total, a64.energy.total, 0.01));
    rep.add(bound_row("c_inf_negative", "whole_space", 0.0, a64.energy.total, 0.0));
    rep.add(bound_row("omega_inf_negative", "whole_space", 0.0, a64.omega.omega, 0.0));
  }
  return rep;
}

AuditReport verify_topology(const VerifyOptions& opts) {
  AuditReport rep;
  rep.suite = "topology";
  const double lam = opts.quick ? 4.0 : 8.0, r = 1.0, rho = 0.5;
  const DomainSpec omega(shapes::Box{{-2, -2, -2}, {2, 2, 2}});
  const DomainSpec lo = scale_domain(omega, lam);
  auto g = build_grid(lo, 1, 1);
  const double h = g->h();
  RadialProblem pr;
  pr.outer = lam * r;
  pr.intervals = 1024;
  pr.rho = rho;
  const auto ws = radial_minimize(pr, SolverOptions{});
  const double delta = 0.5 * r;
  const double m_term = sup_regular_part_ball(r, delta).m_value * std::pow(rho, 4) / 4.0;
  const auto level = sublevel_threshold(ws.energy.total, lam, rho, m_term, delta);
  const auto eroded = region(lo, -lam * r);
  auto bb = lo.bounding_box();
  for (int a = 0; a < 3; ++a) {
    bb[0][a] += lam * r;
    bb[1][a] -= lam * r;
  }
  const auto pts = target_lattice(eroded, bb, lam * r / 2.0, opts.quick ? 3 : 5);
  double worst_beta = 0.0, worst_energy = -1e300;
  std::vector<SublevelCandidate> cands;
  for (const auto& y : pts) {
    const auto u = transplant(ws.u, y, g, eroded, rho);
    const Vec3 beta = barycenter(u).beta;
    const double e = energy_domain(u, kP).total;
    worst_beta = std::max(worst_beta, norm(beta - y));
    worst_energy = std::max(worst_energy, e);
    cands.push_back({"transplant", beta, e});
  }
  rep.add(bound_row("transplant_barycenter_within_2h", "box", lam, worst_beta, 2 * h));
  rep.rows.back().note = std::to_string(pts.size()) + " lattice points";
  rep.add(bound_row("transplant_energy_below_level", "box", lam, worst_energy, level.level));
  const auto sol = minimize_constrained(g, kP, rho, InitPreset{}, SolverOptions{});
  cands.push_back({"minimizer", sol.barycenter, sol.energy.total});
  const auto audit = containment_audit(cands, level.level, region(lo, lam * r), 2 * h);
  rep.add(bound_row("containment_violations", "box", lam, audit.violations, 0.0));
  rep.add(bound_row("minimizer_in_sublevel", "box", lam, sol.energy.total, level.level));
  return rep;
}

AuditReport verify_scalings(const VerifyOptions&) {
  AuditReport rep;
  rep.suite = "scalings";
  const auto e = exponents(kP);
  rep.add(relative_row("alpha_2.5", "none", 0.0, e.alpha, 1.6, 1e-12));
  rep.add(relative_row("gamma_2.5", "none", 0.0, e.gamma, 2.8, 1e-12));
  for (double rho : {0.25, 0.5}) rep.append(scaling_audit(rho, kP).report);
  return rep;
}

AuditReport verify_appendix(const VerifyOptions& opts) {
  AuditReport rep;
  rep.suite = "appendix";
  const DomainSpec ball(shapes::Ball{{}, 1.0});
  rep.append(positivity_audit(build_grid(ball, opts.quick ? 10 : 16, 1), kP, 0.0).report);
  DivergenceOptions dopt;
  dopt.cells_per_unit_base = opts.quick ? 8 : 16;
  const std::vector<double> lams = opts.quick ? std::vector<double>{1, 2, 4} : std::vector<double>{1, 2, 4, 8};
  rep.append(divergence_audit(ball, lams, kP, dopt).report);
  return rep;
}

}  // namespace splab
