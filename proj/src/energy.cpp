#include "splab/energy.hpp"

#include <cmath>
#include <numbers>

#include "splab/errors.hpp"
#include "splab/kernels.hpp"

namespace splab {

namespace {

constexpr double kPi = std::numbers::pi;

// |u|^{p-2} u, zero at u = 0.
inline double power_force(double u, double p) { return u == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(u), p - 1.0), u); }

EnergyBreakdown assemble(double grad2, double coupling_phi_u2, double upow, double p, double m) {
  EnergyBreakdown e;
  e.kinetic = 0.5 * grad2;
  e.nonlocal = 0.25 * coupling_phi_u2;
  e.power = upow / p;
  e.total = e.kinetic + e.nonlocal - e.power;
  e.p = p;
  e.mass = m;
  return e;
}

}  // namespace

void check_exponent(double p) {
  if (!(p > 2.0 && p < 3.0)) throw DomainError("exponent p must lie in (2, 3)");
}

double dirichlet_integral(const ScalarField& u) {
  std::vector<double> au(u.values.size());
  kernels::dirichlet_apply(*u.grid, u.values, au);
  return kernels::dot(*u.grid, u.values, au) * u.grid->cell_volume();
}

DomainEvaluation evaluate_domain(const ScalarField& u, double p, double coupling,
                                 const ScalarField* phi_guess, double tol) {
  check_exponent(p);
  const Grid& g = *u.grid;
  const double dv = g.cell_volume();
  ScalarField u2(u.grid);
  kernels::multiply(u.values, u.values, u2.values);
  DomainEvaluation out;
  out.phi = poisson_dirichlet(u2, tol, phi_guess);

  std::vector<double> upow(g.size(), 0.0);
  for (std::size_t c = 0; c < g.size(); ++c)
    if (u[c] != 0.0) upow[c] = std::pow(std::abs(u[c]), p);
  const double grad2 = dirichlet_integral(u);
  // Dual form 2<phi,u^2> - <phi,A phi>: equal to <phi,u^2> for the exact
  // solve, and only second order in the solver residual.
  std::vector<double> aphi(g.size());
  kernels::dirichlet_apply(g, out.phi.values, aphi);
  const double coupled = coupling * dv *
                         (2.0 * kernels::dot(g, out.phi.values, u2.values) - kernels::dot(g, out.phi.values, aphi));
  out.energy = assemble(grad2, coupled, kernels::sum(g, upow) * dv, p, kernels::sum(g, u2.values) * dv);
  return out;
}

EnergyBreakdown energy_domain(const ScalarField& u, double p) { return evaluate_domain(u, p).energy; }

ScalarField gradient_from(const ScalarField& u, const ScalarField& phi, double p, double coupling) {
  const Grid& g = *u.grid;
  ScalarField out(u.grid);
  kernels::dirichlet_apply(g, u.values, out.values);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(g.size()); ++c)
    if (g.inside(c)) out[c] += coupling * phi[c] * u[c] - power_force(u[c], p);
  return out;
}

ScalarField gradient(const ScalarField& u, double p) {
  auto ev = evaluate_domain(u, p);
  return gradient_from(u, ev.phi, p);
}

MultiplierEstimate multiplier_from(const ScalarField& u, const ScalarField& grad) {
  const Grid& g = *u.grid;
  const double uu = kernels::dot(g, u.values, u.values);
  if (!(uu > 0.0)) throw ContractViolation("multiplier: zero mass");
  MultiplierEstimate m;
  m.omega = kernels::dot(g, grad.values, u.values) / uu;
  std::vector<double> r(grad.values);
  kernels::axpy(-m.omega, u.values, r);
  m.residual = std::sqrt(kernels::dot(g, r, r) * g.cell_volume());
  return m;
}

MultiplierEstimate multiplier(const ScalarField& u, double p) {
  if (!(mass(u) > 0.0)) throw ContractViolation("multiplier: zero mass");
  return multiplier_from(u, gradient(u, p));
}

EnergyBreakdown energy_freespace(const ScalarField& u, double p, double pad_factor) {
  check_exponent(p);
  if (!(pad_factor >= 2.0)) throw ContractViolation("energy_freespace: padding below twice the support diameter");
  const Grid& g = *u.grid;
  const auto box = g.spec().bounding_box();
  const Vec3 centre = 0.5 * (box[0] + box[1]);
  const double big_r = 0.5 * pad_factor * g.spec().diameter();
  const DomainSpec padded(shapes::Ball{centre, big_r});
  auto pg = build_grid(padded, 1.0 / g.h(), 1, lattice_shift(g));
  double dropped = 0.0;
  ScalarField w = transfer(u, pg, &dropped);
  if (dropped > 0.0) throw ContractViolation("energy_freespace: field not contained in the padded ball");

  auto ev = evaluate_domain(w, p);
  const double q = ev.energy.mass;
  // Far-field correction: the whole-space potential exceeds the Dirichlet one
  // by the harmonic extension of its boundary values, ~ Q / (4 pi R).
  const double monopole = q * q / (4.0 * kPi * big_r);
  EnergyBreakdown e = ev.energy;
  e.nonlocal += 0.25 * monopole;
  e.total = e.kinetic + e.nonlocal - e.power;
  return e;
}

// ---------------------------------------------------------------------------
// Radial

double radial_dirichlet_integral(const RadialField& u) {
  double s = 0.0;
  for (std::size_t j = 1; j + 1 < u.size(); ++j) {
    const double rm = (static_cast<double>(j) + 0.5) * u.h;
    const double d = u[j + 1] - u[j];
    s += 4.0 * kPi * rm * rm * d * d / u.h;
  }
  return s;
}

RadialEvaluation evaluate_radial(const RadialField& u, double p, RadialPotential kind, double coupling) {
  check_exponent(p);
  if (u.size() < 3) throw ContractViolation("evaluate_radial: mesh too small");
  RadialField dens = u;
  for (double& v : dens.values) v *= v;
  RadialEvaluation out;
  out.phi = kind == RadialPotential::newton ? newton_potential_of_density(dens)
                                            : poisson_dirichlet_radial(dens, u.outer_radius());
  double coupled = 0.0, upow = 0.0, m = 0.0;
  for (std::size_t j = 1; j < u.size(); ++j) {
    const double w = u.weight(j);
    coupled += w * out.phi[j] * dens[j];
    upow += w * std::pow(std::abs(u[j]), p);
    m += w * dens[j];
  }
  out.energy = assemble(radial_dirichlet_integral(u), coupling * coupled, upow, p, m);
  return out;
}

EnergyBreakdown energy_radial(const RadialField& u, double p, RadialPotential kind) {
  return evaluate_radial(u, p, kind).energy;
}

EnergyBreakdown energy_freespace(const RadialField& u, double p) {
  return evaluate_radial(u, p, RadialPotential::newton).energy;
}

RadialField gradient_radial(const RadialField& u, const RadialField& phi, double p, double coupling) {
  RadialField g(u.h, u.size());
  const double h = u.h;
  for (std::size_t j = 1; j + 1 < u.size(); ++j) {
    const double rl = (static_cast<double>(j) - 0.5) * h;
    const double rr = (static_cast<double>(j) + 0.5) * h;
    double flux = -4.0 * kPi * rr * rr * (u[j + 1] - u[j]) / h;
    if (j > 1) flux += 4.0 * kPi * rl * rl * (u[j] - u[j - 1]) / h;
    g[j] = flux / u.weight(j) + coupling * phi[j] * u[j] - power_force(u[j], p);
  }
  return g;
}

MultiplierEstimate multiplier_radial(const RadialField& u, const RadialField& grad) {
  double uu = 0.0, gu = 0.0;
  for (std::size_t j = 1; j < u.size(); ++j) {
    uu += u.weight(j) * u[j] * u[j];
    gu += u.weight(j) * grad[j] * u[j];
  }
  if (!(uu > 0.0)) throw ContractViolation("multiplier: zero mass");
  MultiplierEstimate m;
  m.omega = gu / uu;
  double r2 = 0.0;
  for (std::size_t j = 1; j + 1 < u.size(); ++j) {
    const double d = grad[j] - m.omega * u[j];
    r2 += u.weight(j) * d * d;
  }
  m.residual = std::sqrt(r2);
  return m;
}

}  // namespace splab
