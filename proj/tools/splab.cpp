#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "splab/appendix.hpp"
#include "splab/errors.hpp"
#include "splab/greens.hpp"
#include "splab/io.hpp"
#include "splab/minimize.hpp"
#include "splab/sweeps.hpp"
#include "splab/verify.hpp"

using namespace splab;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit : int { ok = 0, error = 1, stagnated = 2, partial = 3 };

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// File path, inline JSON object or preset name.
Json json_arg(const std::string& arg) {
  if (!arg.empty() && arg.front() == '{') return Json::parse(arg);
  return Json::parse(read_text(arg));
}

DomainSpec domain_arg(const std::string& arg) {
  if (arg.empty() || arg.front() == '{' || fs::exists(arg)) {
    Json j;
    try {
      j = json_arg(arg);
    } catch (const Json::parse_error& e) {
      throw ContractViolation(std::string("field 'domain': malformed JSON (") + e.what() + ")");
    }
    return domain_from_json(j);
  }
  return domain_preset(arg);
}

Vec3 point_arg(const std::vector<double>& v, const char* name) {
  if (v.size() != 3) throw ContractViolation(std::string("field '") + name + "' needs three coordinates");
  return {v[0], v[1], v[2]};
}

/// Every regular file under `dir` except the manifest, relative and sorted.
std::vector<std::string> listing(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != "manifest.json")
      out.push_back(fs::relative(e.path(), dir).generic_string());
  std::sort(out.begin(), out.end());
  return out;
}

struct Manifest {
  std::string command;
  std::string config_text;
  std::uint64_t seed = 0;
  std::string started = utc_now();

  void write(const fs::path& dir, int status, bool incomplete) const {
    Json j{{"tool", "splab"},
           {"version", kVersion},
           {"command", command},
           {"config_hash", sha256_hex(config_text)},
           {"seed", seed},
           {"started", started},
           {"finished", incomplete ? Json(nullptr) : Json(utc_now())},
           {"exit_status", status},
           {"incomplete", incomplete},
           {"files", listing(dir)}};
    write_text_atomic(dir / "manifest.json", j.dump(2) + "\n");
  }
};

// solve ----------------------------------------------------------------------

struct SolveArgs {
  std::string domain = "ball";
  double p = 2.5, rho = 0.5, lambda = 1.0, resolution = 0.0;
  std::string init = "gaussian", solver;
  std::uint64_t seed = 1;
  int restarts = 1;
  std::string out;
};

int cmd_solve(const SolveArgs& a) {
  const DomainSpec base = domain_arg(a.domain);
  if (!(a.lambda >= 1.0)) throw ContractViolation("field 'lambda' must be >= 1");
  if (!(a.rho > 0.0)) throw ContractViolation("field 'rho' must be positive");
  check_exponent(a.p);
  SolverOptions so;
  if (!a.solver.empty()) so = solver_options_from_json(json_arg(a.solver));
  so.seed = a.seed;
  so.restarts = a.restarts;
  so.validate();
  InitPreset init;
  if (a.init == "gaussian") init.kind = InitKind::gaussian;
  else if (a.init == "eigenfield") init.kind = InitKind::eigenfield;
  else if (a.init == "random") init.kind = InitKind::random;
  else throw ContractViolation("field 'init' must be gaussian, eigenfield or random");
  const double cpu = a.resolution > 0.0 ? a.resolution : ResolutionRule{16.0, 1.0}.at(a.lambda);
  const DomainSpec dom = scale_domain(base, a.lambda);

  const Json config{{"domain", domain_to_json(base)}, {"p", a.p},     {"rho", a.rho},
                    {"lambda", a.lambda},             {"cells_per_unit", cpu},
                    {"init", a.init},                 {"solver", to_json(so)}};
  auto grid = build_grid(dom, cpu, 1);
  const auto res = minimize_constrained(grid, a.p, a.rho, init, so);

  Json result = to_json(res);
  result["config"] = config;
  result["status"] = to_string(res.trace.status);
  const int status = res.trace.status == SolveStatus::converged ? Exit::ok : Exit::stagnated;

  const fs::path out(a.out);
  fs::create_directories(out);
  const std::string cfg = config.dump(2) + "\n";
  write_text_atomic(out / "config.json", cfg);
  write_text_atomic(out / "result.json", result.dump(2) + "\n");
  write_field(out / "u.field", res.u);
  Manifest m{"solve", cfg, a.seed};
  m.write(out, status, false);
  std::cout << "energy " << res.energy.total << "  omega " << res.omega.omega << "  status "
            << to_string(res.trace.status) << "\n";
  if (status == Exit::stagnated) std::cerr << "warning: solver stagnated; result written\n";
  return status;
}

// sweep ----------------------------------------------------------------------

int cmd_sweep(const std::string& config_path, int workers, const std::string& out_dir) {
  SweepConfig cfg;
  if (!config_path.empty()) {
    Json j;
    try {
      j = Json::parse(read_text(config_path));
    } catch (const Json::parse_error& e) {
      throw ContractViolation(std::string("sweep config: malformed JSON (") + e.what() + ")");
    }
    cfg = sweep_config_from_json(j);
  }
  cfg.validate();
  if (workers < 1) throw ContractViolation("field 'workers' must be >= 1");
  const fs::path out(out_dir);
  fs::create_directories(out);
  const std::string text = to_json(cfg).dump(2) + "\n";
  write_text_atomic(out / "config.json", text);
  Manifest m{"sweep", text, cfg.seed};
  m.write(out, Exit::ok, true);

  SweepRunOptions ro;
  ro.workers = workers;
  ro.cache_dir = out / "cache";
  ro.on_record = [](const SweepRecord& r) {
    std::cerr << r.quantity << " lambda=" << r.lambda << " rho=" << r.rho << " value=" << r.value
              << (r.failed ? "  FAILED: " + r.note : "") << "\n";
  };
  const auto res = run_sweep(cfg, ro);

  for (const auto& q : cfg.quantities) write_text_atomic(out / (q + ".csv"), sweep_csv(res.records, q));
  write_text_atomic(out / "audits.json", to_json(res.audits).dump(2) + "\n");
  Json conv = Json::array();
  for (double rho : cfg.rho) {
    try {
      const auto c = convergence_report(res, rho);
      Json gaps = Json::array();
      for (const auto& [lam, g] : c.profile_gaps) gaps.push_back({{"lambda", lam}, {"gap", g}});
      conv.push_back({{"rho", rho},
                      {"lambda", c.lambda},
                      {"omega", c.omega},
                      {"omega_inf", c.omega_inf},
                      {"omega_gap", c.omega_gap},
                      {"energy", c.energy},
                      {"profile_gaps", gaps},
                      {"report", to_json(c.report)}});
    } catch (const ContractViolation&) {
      // Not enough quantities for this rho.
    }
  }
  write_text_atomic(out / "convergence.json", conv.dump(2) + "\n");
  Json flags = Json::array();
  for (const auto& r : res.records)
    if (r.failed || r.stagnated || !r.nonnegative || !r.contained || !r.constraint_met)
      flags.push_back({{"quantity", r.quantity}, {"lambda", r.lambda}, {"rho", r.rho},
                       {"failed", r.failed}, {"stagnated", r.stagnated}, {"nonnegative", r.nonnegative},
                       {"contained", r.contained}, {"constraint_met", r.constraint_met}, {"note", r.note}});
  write_text_atomic(out / "flags.json", flags.dump(2) + "\n");

  const int status = res.failures > 0 ? Exit::partial : Exit::ok;
  m.write(out, status, false);
  std::cerr << res.records.size() << " records, " << res.resumed << " resumed, " << res.failures << " failed; audits "
            << (res.audits.pass() ? "pass" : "FAIL") << "\n";
  return status;
}

// verify ---------------------------------------------------------------------

int cmd_verify(const std::string& suite, bool quick, const std::string& out_dir) {
  VerifyOptions vo;
  vo.quick = quick;
  std::vector<std::string> names;
  if (suite == "all") names = suite_names();
  else names = {suite};
  std::cout << "suite\tproperty\tdomain\tlambda\tlhs\trhs\tpass\tnote\n";
  Json all = Json::array();
  int failed = 0;
  for (const auto& n : names) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = run_suite(n, vo);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& r : rep.rows) {
      char line[512];
      std::snprintf(line, sizeof line, "%s\t%s\t%s\t%g\t%.10g\t%.10g\t%s\t%s\n", n.c_str(), r.property.c_str(),
                    r.domain.c_str(), r.lambda, r.lhs, r.rhs, r.pass ? "pass" : "FAIL", r.note.c_str());
      std::cout << line;
      if (!r.pass) {
        ++failed;
        std::cerr << "failed: " << n << "/" << r.property << " (lambda " << r.lambda << ")\n";
      }
    }
    Json j = to_json(rep);
    j["seconds"] = secs;
    all.push_back(j);
  }
  if (!out_dir.empty()) {
    const fs::path out(out_dir);
    fs::create_directories(out);
    write_text_atomic(out / "verify.json", all.dump(2) + "\n");
    Manifest m{"verify", Json{{"suite", suite}, {"quick", quick}}.dump(), vo.seed};
    m.write(out, failed ? Exit::error : Exit::ok, false);
  }
  return failed ? Exit::error : Exit::ok;
}

// greens ---------------------------------------------------------------------

Json to_json_bound(const RegularBoundReport& r) {
  return {{"delta", r.delta},      {"M", r.m_value},           {"samples", r.samples},
          {"method", to_string(r.method)}, {"argmax_x", to_json(r.argmax_x)}, {"argmax_y", to_json(r.argmax_y)}};
}

int cmd_greens(const std::string& domain, double cpu, std::vector<double> deltas, int sources,
               const std::vector<double>& x, const std::vector<double>& y, const std::string& out_dir) {
  const DomainSpec d = domain_arg(domain);
  auto grid = build_grid(d, cpu, 1);
  const Json dj = domain_to_json(d);
  const bool ball = dj.at("kind") == "ball";
  Json rep{{"domain", dj}, {"cells_per_unit", cpu}, {"h", grid->h()}};
  const auto fam = regular_bound_family(grid, deltas, sources);
  Json rows = Json::array();
  for (const auto& r : fam.reports) {
    Json row = to_json_bound(r);
    if (ball) row["M_exact"] = sup_regular_part_ball(dj.at("radius").get<double>() * d.scale(), r.delta).m_value;
    rows.push_back(row);
  }
  rep["margin_family"] = rows;
  rep["log_slope"] = fam.log_slope;
  rep["diverging"] = fam.diverging;
  if (!y.empty()) {
    const Vec3 py = point_arg(y, "y");
    const auto h = regular_part_numeric(grid, py);
    Json ev{{"y", to_json(py)}};
    if (!x.empty()) {
      const Vec3 px = point_arg(x, "x");
      if (!d.contains(px)) throw DomainError("point x lies outside the domain");
      std::size_t best = 0;
      double bd = 1e300;
      for (std::size_t c = 0; c < grid->size(); ++c)
        if (grid->inside(c) && norm(grid->center(c) - px) < bd) {
          bd = norm(grid->center(c) - px);
          best = c;
        }
      ev["x"] = to_json(grid->center(best));
      ev["H_numeric"] = h[best];
      ev["Gamma"] = newton_kernel(grid->center(best), py);
      if (ball) {
        const Vec3 ctr{dj.at("center")[0].get<double>(), dj.at("center")[1].get<double>(), dj.at("center")[2].get<double>()};
        ev["H_exact"] = regular_part_ball(grid->center(best), py, dj.at("radius").get<double>() * d.scale(), ctr);
      }
    }
    rep["evaluation"] = ev;
  }
  std::cout << rep.dump(2) << "\n";
  if (!out_dir.empty()) {
    const fs::path out(out_dir);
    fs::create_directories(out);
    write_text_atomic(out / "greens.json", rep.dump(2) + "\n");
    Manifest{"greens", rep.at("domain").dump(), 0}.write(out, Exit::ok, false);
  }
  return Exit::ok;
}

// appendix -------------------------------------------------------------------

int cmd_appendix(const std::string& domain, double p, double cpu, double rho, std::vector<double> lambdas,
                 const std::string& out_dir) {
  const DomainSpec d = domain_arg(domain);
  const auto pos = positivity_audit(build_grid(d, cpu, 1), p, rho);
  DivergenceOptions dopt;
  dopt.cells_per_unit_base = cpu;
  const auto div = divergence_audit(d, lambdas, p, dopt);
  Json entries = Json::array();
  for (const auto& e : div.entries)
    entries.push_back({{"lambda", e.lambda}, {"h", e.h}, {"embedding", to_json(e.embedding)},
                       {"bump_quotient", e.bump_quotient}});
  const Json rep{{"domain", domain_to_json(d)},
                 {"p", p},
                 {"embedding", to_json(pos.embedding)},
                 {"positivity",
                  {{"rho", pos.rho}, {"in_range", pos.in_range}, {"bound", pos.bound},
                   {"solve", to_json(pos.solve)}, {"report", to_json(pos.report)}}},
                 {"divergence", {{"entries", entries}, {"ratios", div.ratios}, {"report", to_json(div.report)}}}};
  std::cout << rep.dump(2) << "\n";
  if (!out_dir.empty()) {
    const fs::path out(out_dir);
    fs::create_directories(out);
    write_text_atomic(out / "appendix.json", rep.dump(2) + "\n");
    Manifest{"appendix", rep.at("domain").dump(), 0}.write(out, Exit::ok, false);
  }
  return Exit::ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"splab: Schrodinger-Poisson ground states on expanding domains"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "one constrained minimization");
  solve->add_option("--domain", sa.domain, "preset name, JSON file or inline JSON");
  solve->add_option("--p", sa.p, "exponent in (2, 3)");
  solve->add_option("--rho", sa.rho, "mass parameter (mass = rho^2)");
  solve->add_option("--lambda", sa.lambda, "dilation factor >= 1");
  solve->add_option("--resolution", sa.resolution, "cells per unit length on the dilated domain (0 = auto)");
  solve->add_option("--init", sa.init, "gaussian | eigenfield | random");
  solve->add_option("--seed", sa.seed);
  solve->add_option("--restarts", sa.restarts);
  solve->add_option("--solver", sa.solver, "solver options: JSON file or inline JSON");
  solve->add_option("--out", sa.out)->required();

  std::string sweep_config, sweep_out;
  int workers = 1;
  auto* sweep = app.add_subcommand("sweep", "lambda / rho parameter study");
  sweep->add_option("--config", sweep_config, "JSON config (defaults when omitted)");
  sweep->add_option("--workers", workers);
  sweep->add_option("--out", sweep_out)->required();

  std::string suite = "all", verify_out;
  bool quick = false;
  auto* verify = app.add_subcommand("verify", "property suites");
  verify->add_option("--suite", suite, "all | elliptic | greens | energy | minimize | topology | scalings | appendix");
  verify->add_flag("--quick", quick, "coarser grids");
  verify->add_option("--out", verify_out);

  std::string g_domain = "ball", g_out;
  double g_cpu = 12;
  std::vector<double> g_deltas{0.2, 0.3, 0.4}, g_x, g_y;
  int g_sources = 16;
  auto* greens = app.add_subcommand("greens", "regular part of the Dirichlet Green's function");
  greens->add_option("--domain", g_domain);
  greens->add_option("--resolution", g_cpu);
  greens->add_option("--delta", g_deltas)->delimiter(',');
  greens->add_option("--sources", g_sources);
  greens->add_option("--x", g_x)->delimiter(',');
  greens->add_option("--y", g_y)->delimiter(',');
  greens->add_option("--out", g_out);

  std::string a_domain = "ball", a_out;
  double a_p = 2.5, a_cpu = 16, a_rho = 0.0;
  std::vector<double> a_lambdas{1, 2, 4, 8};
  auto* appendix = app.add_subcommand("appendix", "embedding constants and positivity on a bounded domain");
  appendix->add_option("--domain", a_domain);
  appendix->add_option("--p", a_p);
  appendix->add_option("--resolution", a_cpu);
  appendix->add_option("--rho", a_rho, "0 selects rho_D / 2");
  appendix->add_option("--lambdas", a_lambdas)->delimiter(',');
  appendix->add_option("--out", a_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? Exit::ok : Exit::error;
  }

  try {
    if (*solve) return cmd_solve(sa);
    if (*sweep) return cmd_sweep(sweep_config, workers, sweep_out);
    if (*verify) return cmd_verify(suite, quick, verify_out);
    if (*greens) return cmd_greens(g_domain, g_cpu, g_deltas, g_sources, g_x, g_y, g_out);
    if (*appendix) return cmd_appendix(a_domain, a_p, a_cpu, a_rho, a_lambdas, a_out);
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return Exit::error;
}
