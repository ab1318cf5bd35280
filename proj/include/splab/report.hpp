#pragma once

#include <string>
#include <vector>

namespace splab {

/// One audited property: lhs compared against rhs under `tolerance`.
struct AuditRow {
  std::string property;
  std::string domain;
  double lambda = 1.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

struct AuditReport {
  std::string suite;
  std::vector<AuditRow> rows;

  bool pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }
  void add(AuditRow r) { rows.push_back(std::move(r)); }
  void append(const AuditReport& other) { rows.insert(rows.end(), other.rows.begin(), other.rows.end()); }
};

/// |lhs - rhs| <= rel_tol |rhs|.
AuditRow relative_row(std::string property, std::string domain, double lambda, double lhs, double rhs,
                      double rel_tol);
/// lhs <= rhs.
AuditRow bound_row(std::string property, std::string domain, double lambda, double lhs, double rhs);

}  // namespace splab
