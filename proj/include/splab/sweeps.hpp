#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "splab/io.hpp"
#include "splab/minimize.hpp"
#include "splab/report.hpp"

namespace splab {

struct SweepGeometry {
  DomainSpec omega = DomainSpec(shapes::Box{{-2, -2, -2}, {2, 2, 2}});
  double r = 1.0;  ///< B_r inside omega
  double R = 8.0;  ///< outer annulus radius, above diam omega
};

/// cells per unit length on lambda D: max(min, base / lambda).
struct ResolutionRule {
  double base = 8.0;
  double min = 1.0;
  double at(double lambda) const;
};

struct SweepConfig {
  SweepGeometry geometry;
  double p = 2.5;
  std::vector<double> rho{0.25, 0.5, 1.0};
  std::vector<double> lambda3d{1, 2, 4, 8};
  std::vector<double> lambda_radial{4, 8, 16, 32, 64};
  std::vector<double> lambda_annulus{1, 2, 4};
  /// Subset of c_inf, b_star, b, c, a, l.
  std::vector<std::string> quantities{"c_inf", "b_star", "b", "c", "a", "l"};
  SolverOptions solver{};
  ResolutionRule omega_res{8.0, 1.0};
  ResolutionRule ball_res{8.0, 2.0};
  ResolutionRule annulus_res{2.0, 0.5};
  double radial_cells_per_unit = 32.0;
  double c_inf_outer = 32.0;       ///< first truncation radius
  double c_inf_max_outer = 256.0;  ///< cap on the support-based second radius
  double margin_fraction = 0.5;    ///< delta = fraction * r for M_{B_r}(delta)
  std::uint64_t seed = 1;

  bool wants(const std::string& q) const;
  /// ContractViolation naming the field when the geometry or lists are invalid.
  void validate() const;
};

SweepConfig sweep_config_from_json(const Json& j);
Json to_json(const SweepConfig& c);
std::string config_hash(const SweepConfig& c);

struct SweepRecord {
  std::string quantity;
  double lambda = 0.0;
  double rho = 0.0;
  double p = 0.0;
  double value = 0.0;
  double omega = 0.0;
  double gap = 0.0;       ///< value - c_inf for the same rho, 0 if not applicable
  double slack = 0.0;     ///< one-sided error: truncation drift, barycenter violation, ...
  int iterations = 0;
  double h = 0.0;
  bool stagnated = false;
  bool nonnegative = true;
  bool contained = true;
  bool constraint_met = true;
  bool failed = false;
  std::string note;
  Vec3 beta;
};

Json to_json(const SweepRecord& r);
SweepRecord sweep_record_from_json(const Json& j);

/// Fields kept for the convergence report.
struct SweepFields {
  std::map<double, RadialField> w_inf;                    ///< by rho
  std::map<std::pair<double, double>, ScalarField> c;     ///< by (lambda, rho)
};

struct SweepResult {
  std::vector<SweepRecord> records;  ///< ordered by (quantity, lambda, rho)
  AuditReport audits;
  SweepFields fields;
  int failures = 0;
  int resumed = 0;
};

struct SweepRunOptions {
  int workers = 1;
  std::filesystem::path cache_dir;  ///< empty: no persistence
  std::function<void(const SweepRecord&)> on_record;
};

/// Primary solves run on a worker pool; derived rows (gaps, l, audits) are
/// assembled afterwards in a fixed order.
SweepResult run_sweep(const SweepConfig& config, const SweepRunOptions& opts = {});

/// CSV text for one quantity (or all with an empty name), fixed formatting.
std::string sweep_csv(const std::vector<SweepRecord>& records, const std::string& quantity = "");

struct ConvergenceReport {
  double rho = 0.0;
  double lambda = 0.0;            ///< largest lambda with a c solve
  double omega = 0.0;
  double omega_inf = 0.0;
  double omega_gap = 0.0;         ///< |omega - omega_inf| / |omega_inf|
  double energy = 0.0;
  std::vector<std::pair<double, double>> profile_gaps;  ///< (lambda, relative L2 gap)
  AuditReport report;
};

/// Spherical average of u about `center` compared with w in the weighted L2 norm
/// up to `radius`.
double profile_gap(const ScalarField& u, Vec3 center, const RadialField& w, double radius);

ConvergenceReport convergence_report(const SweepResult& result, double rho, double omega_tolerance = 0.10);

}  // namespace splab
