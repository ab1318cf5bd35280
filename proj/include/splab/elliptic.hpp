#pragma once

#include <span>
#include <vector>

#include "splab/grid.hpp"
#include "splab/radial.hpp"

namespace splab {

struct CgReport {
  int iterations = 0;
  double relative_residual = 0.0;
  std::vector<double> history;
};

enum class BoundaryKind { dirichlet, neumann };

/// Jacobi-preconditioned conjugate gradients for (-Delta_h + shift) x = rhs on
/// the masked cells. `x` holds the initial guess on entry. Throws NumericError
/// (with the residual history) when `max_iters` is exhausted.
CgReport conjugate_gradient(const Grid& grid, BoundaryKind kind, double shift,
                            std::span<const double> rhs, std::span<double> x, double tol,
                            int max_iters = 0);

/// Solves -Delta_h phi = source with phi = 0 on the analytic boundary.
/// `guess` (optional, same grid) warm-starts the iteration.
ScalarField poisson_dirichlet(const ScalarField& source, double tol = 1e-10,
                              const ScalarField* guess = nullptr, CgReport* report = nullptr);

struct Eigenpair {
  double value = 0.0;
  ScalarField field;  ///< unit L2 mass, nonnegative
  int iterations = 0;
  double residual = 0.0;
};

/// Smallest Dirichlet eigenvalue of -Delta_h by inverse power iteration.
Eigenpair first_eigenvalue(GridPtr grid, double tol = 1e-8, int max_iters = 200);

/// Whole-space potential phi(r) = (1/r) int_0^r s^2 u^2 ds + int_r^inf s u^2 ds
/// of the density u^2, by the trapezoid rule on u's mesh.
RadialField newton_potential_radial(const RadialField& u);

/// Solves -(r^2 phi')' = r^2 source on [0, a] with phi(a) = 0. `a` must be a
/// mesh node of `source`; the result lives on the mesh truncated at a.
RadialField poisson_dirichlet_radial(const RadialField& source, double a);

/// Potential of a radial density (not squared) with the whole-space kernel.
RadialField newton_potential_of_density(const RadialField& density);

}  // namespace splab
