#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "splab/report.hpp"

namespace splab {

struct VerifyOptions {
  bool quick = false;
  std::uint64_t seed = 1;
};

/// Suite names accepted by run_suite, in the order "all" runs them.
const std::vector<std::string>& suite_names();

/// Runs one property suite ("all" runs every suite and concatenates rows).
AuditReport run_suite(const std::string& name, const VerifyOptions& opts = {});

AuditReport verify_elliptic(const VerifyOptions& opts);
AuditReport verify_greens(const VerifyOptions& opts);
AuditReport verify_energy(const VerifyOptions& opts);
AuditReport verify_minimize(const VerifyOptions& opts);
AuditReport verify_topology(const VerifyOptions& opts);
AuditReport verify_scalings(const VerifyOptions& opts);
AuditReport verify_appendix(const VerifyOptions& opts);

}  // namespace splab
