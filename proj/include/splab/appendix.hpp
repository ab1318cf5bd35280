#pragma once

#include <cstdint>
#include <vector>

#include "splab/geometry.hpp"
#include "splab/grid.hpp"
#include "splab/minimize.hpp"
#include "splab/report.hpp"

namespace splab {

struct EmbeddingOptions {
  int max_iters = 200;
  double tol = 1e-5;      ///< relative change of the quotient
  int random_starts = 1;
  std::uint64_t seed = 1;
};

/// One-sided estimates: C_D is the best quotient found, so it bounds the true
/// constant from below and rho_D from above.
struct EmbeddingReport {
  double q = 0.0;         ///< Lebesgue exponent 4 / (4 - p)
  double c_d = 0.0;       ///< |u|_{L^q} / |u|_{H^1}
  double mu1 = 0.0;       ///< first Dirichlet eigenvalue of the discrete Laplacian
  double c_tilde = 0.0;   ///< c_d^2 (1 + 1 / mu1)
  double rho_d = 0.0;     ///< (p / (4 c_tilde))^{1 / (p - 2)}
  int iterations = 0;
  bool converged = false;
  int best_start = 0;
  ScalarField maximizer;
};

/// |u|_{L^q} / |u|_{H^1} with the Neumann (unmasked-boundary) H^1 norm.
double embedding_quotient(const ScalarField& u, double q);

/// Nonlinear power iteration u <- (-Delta_N + 1)^{-1} |u|^{q-2} u, normalized,
/// from several starts (constant, centred bump, boundary bump, random).
EmbeddingReport embedding_constant(GridPtr grid, double p, const EmbeddingOptions& opts = {});

double c_tilde_from(double c_d, double mu1);
double rho_threshold(double c_tilde, double p);

struct PositivityAudit {
  EmbeddingReport embedding;
  double rho = 0.0;
  bool in_range = false;   ///< rho <= rho_D; otherwise no assertion is made
  SolveResult solve;
  double bound = 0.0;      ///< rho^2 mu1 / 4
  AuditReport report;
};

/// Minimizes I at mass rho and compares against rho^2 mu1 / 4 (slack 1%).
/// `rho` <= 0 selects rho_D / 2.
PositivityAudit positivity_audit(GridPtr grid, double p, double rho, const SolverOptions& solver = {},
                                 const EmbeddingOptions& eopts = {});

struct DivergenceEntry {
  double lambda = 0.0;
  double h = 0.0;
  EmbeddingReport embedding;
  double bump_quotient = 0.0;  ///< fixed bump transplanted into lambda D
};

struct DivergenceAudit {
  std::vector<DivergenceEntry> entries;
  std::vector<double> ratios;  ///< c_tilde(lambda_{k+1}) / c_tilde(lambda_k)
  AuditReport report;
};

struct DivergenceOptions {
  double cells_per_unit_base = 16.0;  ///< resolution on the undilated domain
  double min_cells_per_unit = 4.0;
  double ratio_target = 3.5;
  EmbeddingOptions embedding{};
};

/// C_tilde along an increasing lambda list on scale_domain(base, lambda).
DivergenceAudit divergence_audit(const DomainSpec& base, const std::vector<double>& lambdas, double p,
                                 const DivergenceOptions& opts = {});

}  // namespace splab
