#include "splab/scalings.hpp"

#include <cmath>
#include <string>

#include "splab/energy.hpp"
#include "splab/errors.hpp"

namespace splab {

ScalingExponents exponents(double p) {
  if (!(p > 2.0 && p < 3.0)) throw DomainError("exponents: p must lie in (2, 3)");
  ScalingExponents e;
  e.p = p;
  e.alpha = 8.0 * (3.0 - p) / (10.0 - 3.0 * p);
  e.gamma = (8.0 - 2.0 * (p - 2.0)) / (10.0 - 3.0 * p);
  e.a_u = 4.0 / (4.0 - 3.0 * (p - 2.0));
  e.b_x = 2.0 * (p - 2.0) / (4.0 - 3.0 * (p - 2.0));
  return e;
}

RadialField rescale(const RadialField& v, double rho, double p, RescaleDirection dir) {
  if (!(rho > 0.0)) throw ContractViolation("rescale: rho must be positive");
  const auto e = exponents(p);
  const double sgn = dir == RescaleDirection::v_to_w ? 1.0 : -1.0;
  RadialField w(v.h / std::pow(rho, sgn * e.b_x), v.size());
  const double amp = std::pow(rho, sgn * e.a_u);
  for (std::size_t j = 0; j < v.size(); ++j) w[j] = amp * v[j];
  return w;
}

ScalingAudit scaling_audit(double rho, double p, const ScalingAuditOptions& opts, double tolerance) {
  ScalingAudit out;
  out.exps = exponents(p);
  out.rho = rho;
  const auto& e = out.exps;

  RadialProblem pw;
  pw.outer = opts.outer;
  pw.intervals = opts.intervals;
  pw.p = p;
  pw.rho = rho;
  pw.potential = RadialPotential::newton;
  out.w = radial_minimize(pw, opts.solver);

  RadialProblem pv = pw;
  pv.rho = 1.0;
  pv.coupling = std::pow(rho, e.alpha);
  out.v = radial_minimize(pv, opts.solver);

  const auto& ew = out.w.energy;
  const auto& ev = out.v.energy;
  // The stored nonlocal term of v carries the coupling; strip it.
  const double v_nonlocal = ev.nonlocal / pv.coupling;
  const std::string dom = "truncated_space(" + std::to_string(opts.outer) + ")";
  const double lam = 1.0;
  auto& rep = out.report;
  rep.suite = "scalings";
  rep.add(relative_row("kinetic_rho_gamma", dom, lam, ew.kinetic, std::pow(rho, e.gamma) * ev.kinetic, tolerance));
  rep.add(relative_row("nonlocal_rho_alpha_gamma", dom, lam, ew.nonlocal, std::pow(rho, e.alpha + e.gamma) * v_nonlocal,
                       tolerance));
  rep.add(relative_row("power_rho_gamma", dom, lam, ew.power, std::pow(rho, e.gamma) * ev.power, tolerance));
  rep.add(relative_row("multiplier_relation", dom, lam, rho * rho * out.w.omega.omega,
                       std::pow(rho, e.gamma) * out.v.omega.omega, tolerance));
  rep.add(bound_row("omega_infinity_negative", dom, lam, out.w.omega.omega, 0.0));
  rep.add(bound_row("omega_v_negative", dom, lam, out.v.omega.omega, 0.0));
  return out;
}

}  // namespace splab
