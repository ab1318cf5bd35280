#pragma once

#include "splab/elliptic.hpp"
#include "splab/grid.hpp"
#include "splab/radial.hpp"

namespace splab {

/// Terms of I(u) = 1/2 int |grad u|^2 + 1/4 int phi_u u^2 - 1/p int |u|^p.
struct EnergyBreakdown {
  double kinetic = 0.0;
  double nonlocal = 0.0;
  double power = 0.0;
  double total = 0.0;
  double p = 0.0;
  double mass = 0.0;
};

struct MultiplierEstimate {
  double omega = 0.0;
  double residual = 0.0;  ///< |g - omega u| in discrete L2
};

/// Energy together with the potential it was computed from.
struct DomainEvaluation {
  EnergyBreakdown energy;
  ScalarField phi;
};

void check_exponent(double p);

/// int |grad u|^2 with the boundary-aware Dirichlet stencil (the quadratic
/// form of -Delta_h).
double dirichlet_integral(const ScalarField& u);

/// One Poisson solve plus the three quadratures. `coupling` scales the
/// nonlocal term; `phi_guess` warm-starts the solve.
DomainEvaluation evaluate_domain(const ScalarField& u, double p, double coupling = 1.0,
                                 const ScalarField* phi_guess = nullptr, double tol = 1e-10);

EnergyBreakdown energy_domain(const ScalarField& u, double p);

/// g = -Delta_h u + coupling * phi u - |u|^{p-2} u, with phi already solved.
ScalarField gradient_from(const ScalarField& u, const ScalarField& phi, double p,
                          double coupling = 1.0);
ScalarField gradient(const ScalarField& u, double p);

MultiplierEstimate multiplier(const ScalarField& u, double p);
MultiplierEstimate multiplier_from(const ScalarField& u, const ScalarField& grad);

/// Whole-space energy of a field on a bounded grid: the nonlocal term is
/// solved on a concentric ball of diameter pad_factor times the support
/// diameter, plus the monopole value Q / (4 pi R) of the far field.
/// Approximate; the dipole and higher moments are ignored.
EnergyBreakdown energy_freespace(const ScalarField& u, double p, double pad_factor = 3.0);

// Radial functionals. Node 0 carries no quadrature weight and the functional
// depends on u_1 .. u_J only; the minimizer keeps u_0 = u_1 for display and
// pins u_J = 0.

enum class RadialPotential { dirichlet, newton };

struct RadialEvaluation {
  EnergyBreakdown energy;
  RadialField phi;
};

double radial_dirichlet_integral(const RadialField& u);

RadialEvaluation evaluate_radial(const RadialField& u, double p, RadialPotential kind,
                                 double coupling = 1.0);
EnergyBreakdown energy_radial(const RadialField& u, double p, RadialPotential kind);
EnergyBreakdown energy_freespace(const RadialField& u, double p);

/// Gradient in the weighted L2 metric (divided by the node weights); zero at
/// nodes 0 and J.
RadialField gradient_radial(const RadialField& u, const RadialField& phi, double p,
                            double coupling = 1.0);

MultiplierEstimate multiplier_radial(const RadialField& u, const RadialField& grad);

}  // namespace splab
