#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "splab/energy.hpp"
#include "splab/grid.hpp"
#include "splab/radial.hpp"

namespace splab {

struct SolverOptions {
  int max_iters = 3000;
  double grad_tol = 1e-6;   ///< on |g_T| in discrete L2
  double step0 = 1.0;
  double armijo = 1e-4;     ///< c1
  double backtrack = 0.5;
  int restarts = 1;
  std::uint64_t seed = 1;
  bool precondition = true;
  bool conjugate = true;    ///< Polak-Ribiere+ directions; plain descent otherwise
  double min_step = 1e-14;

  void validate() const;
};

enum class SolveStatus { converged, stagnated, max_iters };
std::string to_string(SolveStatus s);

enum class InitKind { gaussian, eigenfield, random };

struct InitPreset {
  InitKind kind = InitKind::gaussian;
  Vec3 center;
  double width = 0.0;  ///< 0 picks a width from the domain size
};

/// Diagnostics shared by the 3D and radial solvers.
struct SolveTrace {
  int iterations = 0;
  double grad_norm = 0.0;
  SolveStatus status = SolveStatus::max_iters;
  double initial_energy = 0.0;
  double max_mass_drift = 0.0;  ///< max relative |mass - rho^2| / rho^2 over accepted iterates
  bool monotone = true;         ///< energy never increased between accepted iterates
  std::vector<double> energies;
  int restart_index = 0;
};

struct SolveResult {
  ScalarField u;
  ScalarField phi;
  EnergyBreakdown energy;
  MultiplierEstimate omega;
  Vec3 barycenter;
  double min_value = 0.0;
  bool nonnegative = true;  ///< min u >= -1e-8
  SolveTrace trace;
};

struct RadialSolveResult {
  RadialField u;
  RadialField phi;
  EnergyBreakdown energy;
  MultiplierEstimate omega;
  double min_value = 0.0;
  bool nonnegative = true;
  SolveTrace trace;
};

/// rho u / |u|_{L2}. ContractViolation for a zero field.
ScalarField project_mass(const ScalarField& u, double rho);
RadialField project_mass(const RadialField& u, double rho);

/// Initial field on the grid (not yet mass-projected).
ScalarField make_initial(GridPtr grid, const InitPreset& preset, std::uint64_t seed);

/// Minimizes I(.; D) over the mass sphere by preconditioned Riemannian
/// descent with Armijo backtracking. Restart 0 starts from `init`; the others
/// start from seeded random fields. Returns the lowest-energy run.
SolveResult minimize_constrained(GridPtr grid, double p, double rho, const ScalarField& init,
                                 const SolverOptions& opts);
SolveResult minimize_constrained(GridPtr grid, double p, double rho, const InitPreset& init,
                                 const SolverOptions& opts);

struct BarycenterSolveOptions {
  double mu0 = 0.0;       ///< first penalty weight; 0 picks one from the initial energy
  double mu_factor = 10.0;
  int stages = 5;
  double tolerance = 0.0; ///< on |beta - target|; 0 means one grid spacing
};

struct BarycenterSolveResult {
  SolveResult result;        ///< unpenalized energy of the final iterate
  double penalized = 0.0;    ///< I + mu |beta - target|^2 at the final iterate
  double mu = 0.0;
  double violation = 0.0;    ///< |beta - target|
  bool constraint_met = false;
  int stages = 0;
};

/// Quadratic-penalty continuation for inf { I(u) : beta(u) = target }. The
/// unpenalized energy at the final iterate bounds the infimum from above when
/// the constraint is met.
BarycenterSolveResult minimize_with_barycenter(GridPtr grid, double p, double rho, Vec3 target,
                                               const ScalarField& init, const SolverOptions& opts,
                                               const BarycenterSolveOptions& bopts = {});

struct RadialProblem {
  double outer = 0.0;        ///< truncation / ball radius
  std::size_t intervals = 0; ///< mesh steps, at least 512
  double p = 2.5;
  double rho = 1.0;
  RadialPotential potential = RadialPotential::dirichlet;
  double coupling = 1.0;     ///< weight of the nonlocal term
  double init_width = 0.0;   ///< Gaussian width of restart 0; 0 picks one
};

RadialSolveResult radial_minimize(const RadialProblem& problem, const SolverOptions& opts);

/// Same as above but starting from a given profile (resampled to the mesh).
RadialSolveResult radial_minimize(const RadialProblem& problem, const RadialField& init,
                                  const SolverOptions& opts);

}  // namespace splab
