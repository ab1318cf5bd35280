#pragma once

#include "splab/minimize.hpp"
#include "splab/radial.hpp"
#include "splab/report.hpp"

namespace splab {

struct ScalingExponents {
  double p = 0.0;
  double alpha = 0.0;  ///< 8(3-p)/(10-3p)
  double gamma = 0.0;  ///< (8-2(p-2))/(10-3p)
  double a_u = 0.0;    ///< amplitude exponent 4/(4-3(p-2))
  double b_x = 0.0;    ///< space exponent 2(p-2)/(4-3(p-2))
};

/// DomainError outside (2, 3).
ScalingExponents exponents(double p);

enum class RescaleDirection { v_to_w, w_to_v };

/// v -> w: w(r) = rho^{a_u} v(rho^{b_x} r). Node values are scaled and the mesh
/// spacing divided by rho^{b_x}, so the map is exact on the nodes.
RadialField rescale(const RadialField& v, double rho, double p, RescaleDirection dir);

struct ScalingAuditOptions {
  double outer = 48.0;         ///< truncation radius of both radial solves
  std::size_t intervals = 1536;
  SolverOptions solver{};
};

struct ScalingAudit {
  ScalingExponents exps;
  double rho = 0.0;
  RadialSolveResult w;  ///< mass rho^2, Newton potential
  RadialSolveResult v;  ///< unit mass, nonlocal weight rho^alpha
  AuditReport report;
};

/// Minimizes I on the truncated space at mass rho and the reweighted functional
/// J at unit mass, then checks the term-by-term rescaling identities.
ScalingAudit scaling_audit(double rho, double p, const ScalingAuditOptions& opts = {}, double tolerance = 0.05);

}  // namespace splab
