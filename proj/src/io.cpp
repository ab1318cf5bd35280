#include "splab/io.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "splab/errors.hpp"

namespace splab {

namespace {

double num(const Json& j, const char* key) {
  if (!j.contains(key)) throw ContractViolation(std::string("missing field '") + key + "'");
  if (!j.at(key).is_number()) throw ContractViolation(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

double num_or(const Json& j, const char* key, double fallback) { return j.contains(key) ? num(j, key) : fallback; }

Vec3 vec(const Json& j, const char* key, Vec3 fallback = {}) {
  if (!j.contains(key)) return fallback;
  const Json& a = j.at(key);
  if (!a.is_array() || a.size() != 3)
    throw ContractViolation(std::string("field '") + key + "' must be an array of three numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!a[i].is_number()) throw ContractViolation(std::string("field '") + key + "' must hold numbers");
    v[i] = a[i].get<double>();
  }
  return v;
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& what) {
  for (const auto& [k, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ContractViolation(what + ": unknown field '" + k + "'");
  }
}

void put_le(std::string& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

double get_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int b = 7; b >= 0; --b) bits = (bits << 8) | p[b];
  return std::bit_cast<double>(bits);
}

Json mask_rle(const std::vector<std::uint8_t>& mask) {
  Json runs = Json::array();
  std::size_t i = 0;
  while (i < mask.size()) {
    std::size_t k = i;
    while (k < mask.size() && mask[k] == mask[i]) ++k;
    runs.push_back(Json::array({static_cast<int>(mask[i]), k - i}));
    i = k;
  }
  return runs;
}

}  // namespace

DomainSpec domain_from_json(const Json& j) {
  if (!j.is_object()) throw ContractViolation("domain must be a JSON object");
  if (!j.contains("kind") || !j.at("kind").is_string()) throw ContractViolation("missing field 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  const double scale = num_or(j, "scale", 1.0);
  try {
    if (kind == "ball") {
      check_keys(j, {"kind", "scale", "center", "radius"}, "ball");
      return DomainSpec(shapes::Ball{vec(j, "center"), num(j, "radius")}, scale);
    }
    if (kind == "annulus") {
      check_keys(j, {"kind", "scale", "center", "inner", "outer"}, "annulus");
      return DomainSpec(shapes::Annulus{vec(j, "center"), num(j, "inner"), num(j, "outer")}, scale);
    }
    if (kind == "box") {
      check_keys(j, {"kind", "scale", "lo", "hi"}, "box");
      if (!j.contains("lo") || !j.contains("hi")) throw ContractViolation("box: missing field 'lo' or 'hi'");
      return DomainSpec(shapes::Box{vec(j, "lo"), vec(j, "hi")}, scale);
    }
    if (kind == "solid_torus") {
      check_keys(j, {"kind", "scale", "center", "major", "minor"}, "solid_torus");
      return DomainSpec(shapes::SolidTorus{vec(j, "center"), num(j, "major"), num(j, "minor")}, scale);
    }
    if (kind == "truncated_space") {
      check_keys(j, {"kind", "scale", "radius"}, "truncated_space");
      return DomainSpec(shapes::TruncatedSpace{num(j, "radius")}, scale);
    }
  } catch (const DomainError& e) {
    throw ContractViolation(std::string("domain: ") + e.what());
  }
  throw ContractViolation("field 'kind': unknown domain kind '" + kind + "'");
}

Json domain_to_json(const DomainSpec& d) {
  Json j;
  j["kind"] = d.kind();
  j["scale"] = d.scale();
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, shapes::Ball>) {
          j["center"] = to_json(s.center);
          j["radius"] = s.radius;
        } else if constexpr (std::is_same_v<S, shapes::Annulus>) {
          j["center"] = to_json(s.center);
          j["inner"] = s.inner;
          j["outer"] = s.outer;
        } else if constexpr (std::is_same_v<S, shapes::Box>) {
          j["lo"] = to_json(s.lo);
          j["hi"] = to_json(s.hi);
        } else if constexpr (std::is_same_v<S, shapes::SolidTorus>) {
          j["center"] = to_json(s.center);
          j["major"] = s.major;
          j["minor"] = s.minor;
        } else {
          j["radius"] = s.radius;
        }
      },
      d.base());
  return j;
}

DomainSpec domain_preset(const std::string& name) {
  if (name == "ball") return DomainSpec(shapes::Ball{{}, 1.0});
  if (name == "box") return DomainSpec(shapes::Box{{-2, -2, -2}, {2, 2, 2}});
  if (name == "annulus") return DomainSpec(shapes::Annulus{{}, 1.0, 8.0});
  if (name == "torus") return DomainSpec(shapes::SolidTorus{{}, 2.0, 0.75});
  throw ContractViolation("unknown domain preset '" + name + "'");
}

Json to_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

Json to_json(const EnergyBreakdown& e) {
  return {{"kinetic", e.kinetic}, {"nonlocal", e.nonlocal}, {"power", e.power},
          {"total", e.total},     {"p", e.p},               {"mass", e.mass}};
}

Json to_json(const MultiplierEstimate& m) { return {{"omega", m.omega}, {"residual", m.residual}}; }

Json to_json(const SolveTrace& t) {
  return {{"iterations", t.iterations},
          {"grad_norm", t.grad_norm},
          {"status", to_string(t.status)},
          {"initial_energy", t.initial_energy},
          {"max_mass_drift", t.max_mass_drift},
          {"monotone", t.monotone},
          {"restart_index", t.restart_index}};
}

Json to_json(const SolveResult& r) {
  return {{"energy", to_json(r.energy)},       {"omega", to_json(r.omega)},
          {"barycenter", to_json(r.barycenter)}, {"min_value", r.min_value},
          {"nonnegative", r.nonnegative},      {"trace", to_json(r.trace)},
          {"h", r.u.grid ? r.u.grid->h() : 0.0}};
}

Json to_json(const RadialSolveResult& r) {
  return {{"energy", to_json(r.energy)}, {"omega", to_json(r.omega)},   {"min_value", r.min_value},
          {"nonnegative", r.nonnegative}, {"trace", to_json(r.trace)}, {"h", r.u.h},
          {"outer", r.u.outer_radius()}};
}

Json to_json(const AuditRow& r) {
  Json j{{"property", r.property}, {"domain", r.domain}, {"lambda", r.lambda}, {"lhs", r.lhs},
         {"rhs", r.rhs},           {"tolerance", r.tolerance}, {"pass", r.pass}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

Json to_json(const AuditReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) rows.push_back(to_json(row));
  return {{"suite", r.suite}, {"pass", r.pass()}, {"rows", rows}};
}

Json to_json(const EmbeddingReport& e) {
  return {{"q", e.q},           {"C_D", e.c_d},        {"mu1", e.mu1},           {"C_tilde", e.c_tilde},
          {"rho_D", e.rho_d},   {"iterations", e.iterations}, {"converged", e.converged},
          {"one_sided", "C_D lower estimate, rho_D upper estimate"}};
}

SolverOptions solver_options_from_json(const Json& j, SolverOptions o) {
  if (!j.is_object()) throw ContractViolation("solver options must be a JSON object");
  check_keys(j,
             {"max_iters", "grad_tol", "step0", "armijo", "backtrack", "restarts", "seed", "precondition",
              "conjugate", "min_step"},
             "solver");
  auto get_int = [&](const char* k, auto& dst) {
    if (!j.contains(k)) return;
    if (!j.at(k).is_number_integer()) throw ContractViolation(std::string("field '") + k + "' must be an integer");
    dst = j.at(k).get<std::decay_t<decltype(dst)>>();
  };
  auto get_bool = [&](const char* k, bool& dst) {
    if (!j.contains(k)) return;
    if (!j.at(k).is_boolean()) throw ContractViolation(std::string("field '") + k + "' must be a boolean");
    dst = j.at(k).get<bool>();
  };
  get_int("max_iters", o.max_iters);
  get_int("restarts", o.restarts);
  get_int("seed", o.seed);
  o.grad_tol = num_or(j, "grad_tol", o.grad_tol);
  o.step0 = num_or(j, "step0", o.step0);
  o.armijo = num_or(j, "armijo", o.armijo);
  o.backtrack = num_or(j, "backtrack", o.backtrack);
  o.min_step = num_or(j, "min_step", o.min_step);
  get_bool("precondition", o.precondition);
  get_bool("conjugate", o.conjugate);
  o.validate();
  return o;
}

Json to_json(const SolverOptions& o) {
  return {{"max_iters", o.max_iters}, {"grad_tol", o.grad_tol},         {"step0", o.step0},
          {"armijo", o.armijo},       {"backtrack", o.backtrack},       {"restarts", o.restarts},
          {"seed", o.seed},           {"precondition", o.precondition}, {"conjugate", o.conjugate},
          {"min_step", o.min_step}};
}

void write_field(const std::filesystem::path& path, const ScalarField& u) {
  const Grid& g = *u.grid;
  Json head;
  head["format"] = "splab-field";
  head["version"] = 1;
  head["dims"] = g.dims();
  head["h"] = g.h();
  head["origin"] = to_json(g.origin());
  head["domain"] = domain_to_json(g.spec());
  head["mask_rle"] = mask_rle(g.mask());
  head["dtype"] = "float64-le";
  head["count"] = u.values.size();
  std::string out = head.dump();
  out.push_back('\n');
  out.reserve(out.size() + 8 * u.values.size());
  for (double v : u.values) put_le(out, v);
  write_text_atomic(path, out);
}

ScalarField read_field(const std::filesystem::path& path) {
  const std::string bytes = read_text(path);
  const auto nl = bytes.find('\n');
  if (nl == std::string::npos) throw ContractViolation("read_field: missing header");
  Json head;
  try {
    head = Json::parse(bytes.substr(0, nl));
  } catch (const Json::parse_error& e) {
    throw ContractViolation(std::string("read_field: bad header: ") + e.what());
  }
  if (head.value("format", "") != "splab-field") throw ContractViolation("read_field: not a field file");
  const auto dims = head.at("dims").get<std::array<int, 3>>();
  const Vec3 origin = vec(head, "origin");
  const double h = head.at("h").get<double>();
  auto grid = std::make_shared<const Grid>(domain_from_json(head.at("domain")), h, origin, dims);
  if (mask_rle(grid->mask()) != head.at("mask_rle"))
    throw ContractViolation("read_field: rebuilt mask differs from the stored one");
  const std::size_t n = head.at("count").get<std::size_t>();
  if (n != grid->size() || bytes.size() - nl - 1 != 8 * n) throw ContractViolation("read_field: truncated payload");
  std::vector<double> values(n);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + nl + 1);
  for (std::size_t i = 0; i < n; ++i) values[i] = get_le(p + 8 * i);
  return ScalarField(grid, std::move(values));
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open " + tmp.string() + " for writing");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ContractViolation("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

}  // namespace splab
