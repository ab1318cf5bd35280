#include "splab/appendix.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "splab/elliptic.hpp"
#include "splab/energy.hpp"
#include "splab/errors.hpp"
#include "splab/kernels.hpp"

namespace splab {

namespace {

double lq_norm(const ScalarField& u, double q) {
  const Grid& g = *u.grid;
  double s = 0.0;
  for (std::size_t c = 0; c < g.size(); ++c)
    if (g.inside(c)) s += std::pow(std::abs(u[c]), q);
  return std::pow(s * g.cell_volume(), 1.0 / q);
}

double h1_norm(const ScalarField& u) {
  const Grid& g = *u.grid;
  std::vector<double> au(g.size());
  kernels::neumann_apply(g, u.values, au, 1.0);
  return std::sqrt(kernels::dot(g, u.values, au) * g.cell_volume());
}

struct AscentRun {
  ScalarField u;
  double quotient = 0.0;
  int iterations = 0;
  bool converged = false;
};

AscentRun ascend(ScalarField u, double q, const EmbeddingOptions& o) {
  const Grid& g = *u.grid;
  AscentRun run;
  double nrm = h1_norm(u);
  if (!(nrm > 0.0)) throw ContractViolation("embedding_constant: zero start");
  for (double& v : u.values) v /= nrm;
  run.quotient = lq_norm(u, q);
  ScalarField f(u.grid), z(u.grid);
  for (int it = 1; it <= o.max_iters; ++it) {
    for (std::size_t c = 0; c < g.size(); ++c)
      f[c] = g.inside(c) && u[c] != 0.0 ? std::copysign(std::pow(std::abs(u[c]), q - 1.0), u[c]) : 0.0;
    z.values = u.values;
    conjugate_gradient(g, BoundaryKind::neumann, 1.0, f.values, z.values, 1e-8);
    nrm = h1_norm(z);
    for (std::size_t c = 0; c < g.size(); ++c) u[c] = z[c] / nrm;
    const double qn = lq_norm(u, q);
    run.iterations = it;
    const double change = std::abs(qn - run.quotient) / qn;
    run.quotient = qn;
    if (change <= o.tol) {
      run.converged = true;
      break;
    }
  }
  run.u = std::move(u);
  return run;
}

std::vector<ScalarField> starts(GridPtr grid, const EmbeddingOptions& o) {
  const Grid& g = *grid;
  const DomainSpec& spec = g.spec();
  std::vector<ScalarField> out;
  out.push_back(ScalarField::sample(grid, [](Vec3) { return 1.0; }));

  // Deepest cell and the cell furthest along +x.
  std::size_t deep = 0, edge = 0;
  double best_depth = -1e300, best_x = -1e300;
  for (std::size_t c = 0; c < g.size(); ++c) {
    if (!g.inside(c)) continue;
    const Vec3 x = g.center(c);
    const double d = -spec.signed_distance(x);
    if (d > best_depth) best_depth = d, deep = c;
    if (x.x > best_x) best_x = x.x, edge = c;
  }
  const double w = std::min(1.0, std::max(best_depth, 2.0 * g.h()));
  for (std::size_t c : {deep, edge}) {
    const Vec3 x0 = g.center(c);
    out.push_back(ScalarField::sample(grid, [&](Vec3 x) { return std::exp(-dot(x - x0, x - x0) / (w * w)); }));
  }

  std::mt19937_64 rng(o.seed);
  std::vector<std::size_t> inside;
  for (std::size_t c = 0; c < g.size(); ++c)
    if (g.inside(c)) inside.push_back(c);
  std::uniform_int_distribution<std::size_t> pick(0, inside.size() - 1);
  for (int s = 0; s < o.random_starts; ++s) {
    std::array<Vec3, 3> centers;
    for (auto& x : centers) x = g.center(inside[pick(rng)]);
    out.push_back(ScalarField::sample(grid, [&](Vec3 x) {
      double v = 0.0;
      for (const auto& x0 : centers) v += std::exp(-dot(x - x0, x - x0) / (w * w));
      return v;
    }));
  }
  return out;
}

}  // namespace

double embedding_quotient(const ScalarField& u, double q) {
  const double n = h1_norm(u);
  if (!(n > 0.0)) throw ContractViolation("embedding_quotient: zero field");
  return lq_norm(u, q) / n;
}

double c_tilde_from(double c_d, double mu1) {
  if (!(mu1 > 0.0)) throw ContractViolation("c_tilde: eigenvalue must be positive");
  return c_d * c_d * (1.0 + 1.0 / mu1);
}

double rho_threshold(double c_tilde, double p) {
  check_exponent(p);
  return std::pow(p / (4.0 * c_tilde), 1.0 / (p - 2.0));
}

EmbeddingReport embedding_constant(GridPtr grid, double p, const EmbeddingOptions& opts) {
  check_exponent(p);
  EmbeddingReport rep;
  rep.q = 4.0 / (4.0 - p);
  const auto st = starts(grid, opts);
  for (std::size_t k = 0; k < st.size(); ++k) {
    auto run = ascend(st[k], rep.q, opts);
    rep.iterations += run.iterations;
    if (run.quotient > rep.c_d) {
      rep.c_d = run.quotient;
      rep.best_start = static_cast<int>(k);
      rep.converged = run.converged;
      rep.maximizer = std::move(run.u);
    }
  }
  rep.mu1 = first_eigenvalue(grid).value;
  rep.c_tilde = c_tilde_from(rep.c_d, rep.mu1);
  rep.rho_d = rho_threshold(rep.c_tilde, p);
  return rep;
}

PositivityAudit positivity_audit(GridPtr grid, double p, double rho, const SolverOptions& solver,
                                 const EmbeddingOptions& eopts) {
  PositivityAudit a;
  a.embedding = embedding_constant(grid, p, eopts);
  a.rho = rho > 0.0 ? rho : 0.5 * a.embedding.rho_d;
  a.in_range = a.rho <= a.embedding.rho_d;
  a.bound = a.rho * a.rho * a.embedding.mu1 / 4.0;
  a.report.suite = "appendix.positivity";
  const std::string dom = grid->spec().kind();
  if (!a.in_range) {
    AuditRow r{"positivity_precondition", dom, 1.0, a.rho, a.embedding.rho_d, 0.0, true,
               "rho above the threshold estimate; no assertion"};
    a.report.add(r);
    return a;
  }
  a.solve = minimize_constrained(grid, p, a.rho, InitPreset{InitKind::eigenfield, {}, 0.0}, solver);
  auto row = bound_row("min_energy_above_rho2_mu1_over_4", dom, 1.0, 0.99 * a.bound, a.solve.energy.total);
  row.tolerance = 0.01;
  a.report.add(row);
  a.report.add(bound_row("min_energy_positive", dom, 1.0, 0.0, a.solve.energy.total));

  // Linear limit: I / rho^2 -> mu1 / 2 as rho -> 0.
  const double tiny = 1e-3;
  SolverOptions so = solver;
  so.grad_tol = std::min(solver.grad_tol, 1e-9);
  const auto small = minimize_constrained(grid, p, tiny, InitPreset{InitKind::eigenfield, {}, 0.0}, so);
  a.report.add(relative_row("small_mass_limit_mu1_over_2", dom, 1.0, small.energy.total / (tiny * tiny),
                            a.embedding.mu1 / 2.0, 0.05));
  return a;
}

DivergenceAudit divergence_audit(const DomainSpec& base, const std::vector<double>& lambdas, double p,
                                 const DivergenceOptions& opts) {
  check_exponent(p);
  if (lambdas.empty()) throw ContractViolation("divergence_audit: empty lambda list");
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (!(lambdas[i] > lambdas[i - 1])) throw ContractViolation("divergence_audit: lambda list must increase");

  DivergenceAudit out;
  out.report.suite = "appendix.divergence";
  const std::string dom = base.kind();
  // Fixed bump of radius delta around the deepest point of the base domain.
  const double delta = 0.5 * base.inradius();
  Vec3 x0;
  {
    auto bg = build_grid(base, opts.cells_per_unit_base, 1);
    double best = -1e300;
    for (std::size_t c = 0; c < bg->size(); ++c)
      if (bg->inside(c) && -base.signed_distance(bg->center(c)) > best) {
        best = -base.signed_distance(bg->center(c));
        x0 = bg->center(c);
      }
  }
  double mu1_base = 0.0;
  for (double lam : lambdas) {
    DivergenceEntry e;
    e.lambda = lam;
    const double cpu = std::max(opts.min_cells_per_unit, opts.cells_per_unit_base / lam);
    auto g = build_grid(scale_domain(base, lam), cpu, 1);
    e.h = g->h();
    e.embedding = embedding_constant(g, p, opts.embedding);
    // The bump keeps its size, so evaluate it on a local grid at the base resolution.
    const Vec3 y = lam * x0;
    auto bg = build_grid(DomainSpec(shapes::Ball{y, 1.25 * delta}), opts.cells_per_unit_base, 1, y);
    auto bump = ScalarField::sample(bg, [&](Vec3 x) {
      const double s = norm(x - y) / delta;
      return s < 1.0 ? std::pow(std::cos(0.5 * std::numbers::pi * s), 2) : 0.0;
    });
    e.bump_quotient = embedding_quotient(bump, e.embedding.q);
    if (out.entries.empty()) mu1_base = e.embedding.mu1 * lam * lam;
    out.entries.push_back(std::move(e));
  }

  const auto& first = out.entries.front();
  for (std::size_t i = 0; i < out.entries.size(); ++i) {
    const auto& e = out.entries[i];
    out.report.add(relative_row("bump_quotient_lambda_independent", dom, e.lambda, e.bump_quotient,
                                first.bump_quotient, 1e-6));
    // Both quotients bound C_{lambda D} from below, so
    // C_tilde lambda^-2 >= max(C, bump)^2 (1 / lambda^2 + 1 / mu1(D)) >= bump^2 / mu1(D).
    const double c_low = std::max(e.embedding.c_d, e.bump_quotient);
    out.report.add(bound_row("C_tilde_over_lambda2_bounded_below", dom, e.lambda,
                             e.bump_quotient * e.bump_quotient / mu1_base,
                             c_tilde_from(c_low, e.embedding.mu1) / (e.lambda * e.lambda)));
    if (i == 0) continue;
    const auto& prev = out.entries[i - 1];
    const double ratio = e.embedding.c_tilde / prev.embedding.c_tilde;
    out.ratios.push_back(ratio);
    auto r = bound_row("C_tilde_consecutive_ratio", dom, e.lambda, opts.ratio_target, ratio);
    r.note = "eigen factor ratio " +
             std::to_string((1.0 + 1.0 / e.embedding.mu1) / (1.0 + 1.0 / prev.embedding.mu1));
    out.report.add(r);
    out.report.add(bound_row("rho_strictly_decreasing", dom, e.lambda, e.embedding.rho_d,
                             std::nextafter(prev.embedding.rho_d, 0.0)));
  }
  return out;
}

}  // namespace splab
