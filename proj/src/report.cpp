#include "splab/report.hpp"

#include <cmath>

namespace splab {

AuditRow relative_row(std::string property, std::string domain, double lambda, double lhs, double rhs,
                      double rel_tol) {
  AuditRow r{std::move(property), std::move(domain), lambda, lhs, rhs, rel_tol, false, {}};
  r.pass = std::isfinite(lhs) && std::abs(lhs - rhs) <= rel_tol * std::abs(rhs);
  return r;
}

AuditRow bound_row(std::string property, std::string domain, double lambda, double lhs, double rhs) {
  AuditRow r{std::move(property), std::move(domain), lambda, lhs, rhs, 0.0, false, {}};
  r.pass = std::isfinite(lhs) && lhs <= rhs;
  return r;
}

}  // namespace splab
