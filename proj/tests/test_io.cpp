#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "splab/errors.hpp"
#include "splab/io.hpp"

using namespace splab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto d = fs::temp_directory_path() / "splab_test_io";
  fs::create_directories(d);
  return d / name;
}

}  // namespace

TEST_CASE("field dump round trip is byte identical") {
  for (const DomainSpec& d : {DomainSpec(shapes::Ball{{0.1, 0, 0}, 1.0}), DomainSpec(shapes::SolidTorus{{}, 2.0, 0.6}),
                              DomainSpec(shapes::Annulus{{}, 0.5, 1.5}, 2.0)}) {
    auto g = build_grid(d, 6, 1, {0.013, -0.02, 0.0});
    auto u = ScalarField::sample(g, [](Vec3 x) { return std::sin(x.x) * std::exp(-x.y * x.y) + 1e-300 * x.z; });
    const auto a = scratch("a.field"), b = scratch("b.field");
    write_field(a, u);
    const auto v = read_field(a);
    CHECK(v.values == u.values);
    CHECK(v.grid->h() == g->h());
    CHECK(v.grid->mask() == g->mask());
    write_field(b, v);
    CHECK(read_text(a) == read_text(b));
  }
}

TEST_CASE("field reader rejects corrupted files") {
  auto g = build_grid(DomainSpec(shapes::Ball{{}, 1.0}), 4, 1);
  const auto a = scratch("c.field");
  write_field(a, ScalarField(g));
  std::string bytes = read_text(a);
  write_text_atomic(a, bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_field(a), ContractViolation);
  write_text_atomic(a, "not a header");
  CHECK_THROWS_AS(read_field(a), ContractViolation);
}

TEST_CASE("domain JSON: round trip and diagnostics") {
  for (const char* name : {"ball", "box", "annulus", "torus"}) {
    const auto d = domain_preset(name);
    CHECK(domain_from_json(domain_to_json(d)) == d);
  }
  CHECK(domain_from_json(Json::parse(R"({"kind":"ball","radius":2,"scale":3})")) ==
        DomainSpec(shapes::Ball{{}, 2.0}, 3.0));
  auto msg = [](const char* text) {
    try {
      domain_from_json(Json::parse(text));
    } catch (const ContractViolation& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(msg(R"({"kind":"ball"})").find("radius") != std::string::npos);
  CHECK(msg(R"({"kind":"ball","radius":"x"})").find("radius") != std::string::npos);
  CHECK(msg(R"({"kind":"blob"})").find("kind") != std::string::npos);
  CHECK(msg(R"({"kind":"ball","radius":1,"color":1})").find("color") != std::string::npos);
  CHECK(msg(R"({"kind":"ball","radius":-1})").size() > 0);
  CHECK_THROWS_AS(domain_preset("cube"), ContractViolation);
}

TEST_CASE("solver options JSON") {
  const auto o = solver_options_from_json(Json::parse(R"({"max_iters":10,"grad_tol":1e-4,"conjugate":false})"));
  CHECK(o.max_iters == 10);
  CHECK(o.grad_tol == 1e-4);
  CHECK_FALSE(o.conjugate);
  CHECK(solver_options_from_json(to_json(o)).grad_tol == o.grad_tol);
  CHECK_THROWS_AS(solver_options_from_json(Json::parse(R"({"iters":10})")), ContractViolation);
  CHECK_THROWS_AS(solver_options_from_json(Json::parse(R"({"max_iters":1.5})")), ContractViolation);
  CHECK_THROWS_AS(solver_options_from_json(Json::parse(R"({"armijo":2})")), ContractViolation);
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}
