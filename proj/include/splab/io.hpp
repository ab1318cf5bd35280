#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "splab/appendix.hpp"
#include "splab/energy.hpp"
#include "splab/geometry.hpp"
#include "splab/grid.hpp"
#include "splab/minimize.hpp"
#include "splab/report.hpp"

namespace splab {

using Json = nlohmann::json;

/// {"kind": "ball", "center": [..], "radius": .., "scale": ..} and the like.
/// ContractViolation naming the offending field on malformed input.
DomainSpec domain_from_json(const Json& j);
Json domain_to_json(const DomainSpec& d);

/// Presets: "ball", "box", "annulus", "torus" (unit-size defaults).
DomainSpec domain_preset(const std::string& name);

Json to_json(const Vec3& v);
Json to_json(const EnergyBreakdown& e);
Json to_json(const MultiplierEstimate& m);
Json to_json(const SolveTrace& t);
Json to_json(const SolveResult& r);
Json to_json(const RadialSolveResult& r);
Json to_json(const AuditRow& r);
Json to_json(const AuditReport& r);
Json to_json(const EmbeddingReport& e);

/// Options are read field by field; unknown keys are rejected.
SolverOptions solver_options_from_json(const Json& j, SolverOptions base = {});
Json to_json(const SolverOptions& o);

/// Field file: one line of JSON header (format, dims, h, origin, domain, mask
/// run-length encoding, value count) followed by the values as raw
/// little-endian float64 over the full grid.
void write_field(const std::filesystem::path& path, const ScalarField& u);
ScalarField read_field(const std::filesystem::path& path);

/// Writes `text` to `path` via a temporary file and rename.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Lower-case hex SHA-256 of the bytes.
std::string sha256_hex(const std::string& bytes);

}  // namespace splab
