#include "splab/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>

#include "splab/elliptic.hpp"
#include "splab/errors.hpp"
#include "splab/kernels.hpp"
#include "splab/topology.hpp"

namespace splab {

namespace {

using Vec = std::vector<double>;

// Smooth functional on a weighted vector space. `evaluate` remembers the
// point it was called at; `gradient` refers to the last evaluated point.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual double inner(const Vec& a, const Vec& b) const = 0;
  virtual double evaluate(const Vec& u) = 0;
  virtual void gradient(Vec& g) = 0;
  /// z ~ (-Delta + sigma)^{-1} r.
  virtual void precondition(const Vec& r, double sigma, Vec& z) = 0;
  /// Called when the last evaluated point becomes the current iterate.
  virtual void accept() {}
};

void add_scaled(Vec& y, double a, const Vec& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

struct CoreResult {
  Vec u;
  double value = 0.0;
  SolveTrace trace;
};

CoreResult descend(Objective& f, Vec u, double rho, const SolverOptions& o) {
  const double rho2 = rho * rho;
  auto project = [&](Vec& v) {
    const double m = f.inner(v, v);
    if (!(m > 0.0)) throw ContractViolation("project_mass: zero field");
    const double s = rho / std::sqrt(m);
    for (double& e : v) e *= s;
  };
  auto tangent = [&](Vec& v, const Vec& at) { add_scaled(v, -f.inner(v, at) / rho2, at); };

  CoreResult out;
  SolveTrace& tr = out.trace;
  project(u);
  double e = f.evaluate(u);
  f.accept();
  tr.initial_energy = e;
  tr.energies.push_back(e);
  tr.max_mass_drift = std::abs(f.inner(u, u) - rho2) / rho2;

  const std::size_t n = u.size();
  Vec g(n), gt(n), z(n), d(n), trial(n), d_prev, gt_prev;
  double zg_prev = 0.0;
  double s_init = o.step0;
  // A preconditioned step of 1 damps every high-frequency mode; longer steps
  // are left to the conjugate directions.
  const double s_max = o.precondition ? o.step0 : 1e6 * o.step0;
  f.gradient(g);
  tr.status = SolveStatus::max_iters;
  for (int it = 0;; ++it) {
    const double omega = f.inner(g, u) / rho2;
    gt = g;
    add_scaled(gt, -omega, u);
    tr.grad_norm = std::sqrt(f.inner(gt, gt));
    tr.iterations = it;
    if (tr.grad_norm <= o.grad_tol) {
      tr.status = SolveStatus::converged;
      break;
    }
    if (it >= o.max_iters) break;

    const double sigma = std::max(-omega, 0.0);
    if (o.precondition)
      f.precondition(gt, sigma, z);
    else
      z = gt;
    tangent(z, u);
    for (std::size_t i = 0; i < n; ++i) d[i] = -z[i];
    const double zg = f.inner(z, gt);
    if (o.conjugate && !d_prev.empty() && zg_prev > 0.0) {
      Vec dy = gt;
      add_scaled(dy, -1.0, gt_prev);
      const double beta = std::max(0.0, f.inner(z, dy) / zg_prev);
      if (beta > 0.0) {
        tangent(d_prev, u);
        add_scaled(d, beta, d_prev);
      }
    }
    double slope = f.inner(gt, d);
    bool steepest = false;
    if (!(slope < 0.0)) {
      for (std::size_t i = 0; i < n; ++i) d[i] = -z[i];
      slope = -zg;
      steepest = true;
    }

    // Armijo backtracking along the normalized ray. A failed conjugate
    // direction is retried once as plain preconditioned descent.
    double s = s_init, et = 0.0;
    bool accepted = false;
    int trials = 0;
    for (;;) {
      trial = u;
      add_scaled(trial, s, d);
      project(trial);
      et = f.evaluate(trial);
      ++trials;
      if (et <= e + o.armijo * s * slope) {
        accepted = true;
        break;
      }
      s *= o.backtrack;
      if (s < o.min_step) {
        if (steepest) break;
        for (std::size_t i = 0; i < n; ++i) d[i] = -z[i];
        slope = -zg;
        steepest = true;
        s = s_init;
      }
    }
    if (!accepted) {
      // Leave the oracle at the current iterate.
      f.evaluate(u);
      f.accept();
      tr.status = SolveStatus::stagnated;
      break;
    }
    if (et > e) tr.monotone = false;
    u.swap(trial);
    e = et;
    f.accept();
    tr.energies.push_back(e);
    tr.max_mass_drift = std::max(tr.max_mass_drift, std::abs(f.inner(u, u) - rho2) / rho2);
    s_init = trials == 1 ? std::min(2.0 * s, s_max) : s;

    d_prev = d;
    gt_prev = gt;
    zg_prev = zg;
    f.gradient(g);
  }
  out.u = std::move(u);
  out.value = e;
  return out;
}

// -- 3D ---------------------------------------------------------------------

class DomainObjective : public Objective {
 public:
  DomainObjective(GridPtr grid, double p) : grid_(std::move(grid)), p_(p), trial_(grid_), current_phi_(grid_) {}

  void set_penalty(double mu, Vec3 target) {
    mu_ = mu;
    target_ = target;
  }

  double inner(const Vec& a, const Vec& b) const override { return kernels::dot(*grid_, a, b) * grid_->cell_volume(); }

  double evaluate(const Vec& u) override {
    trial_.values = u;
    last_ = evaluate_domain(trial_, p_, 1.0, has_phi_ ? &current_phi_ : nullptr);
    double v = last_.energy.total;
    if (mu_ > 0.0) {
      const Vec3 off = barycenter(trial_).beta - target_;
      v += mu_ * dot(off, off);
    }
    return v;
  }

  void accept() override {
    current_phi_ = last_.phi;
    current_energy_ = last_.energy;
    has_phi_ = true;
  }

  void gradient(Vec& g) override {
    ScalarField gf = gradient_from(trial_, current_phi_, p_);
    if (mu_ > 0.0) add_scaled(gf.values, mu_, barycenter_penalty_gradient(trial_, target_).values);
    g = std::move(gf.values);
  }

  void precondition(const Vec& r, double sigma, Vec& z) override {
    z.assign(r.size(), 0.0);
    try {
      conjugate_gradient(*grid_, BoundaryKind::dirichlet, sigma, r, z, 1e-3, 200);
    } catch (const NumericError&) {
      // Loose solve; the partial iterate is still a descent-compatible
      // preconditioned residual.
    }
  }

  const ScalarField& phi() const { return current_phi_; }
  const EnergyBreakdown& energy() const { return current_energy_; }

 private:
  GridPtr grid_;
  double p_;
  ScalarField trial_;
  ScalarField current_phi_;
  DomainEvaluation last_;
  EnergyBreakdown current_energy_;
  bool has_phi_ = false;
  double mu_ = 0.0;
  Vec3 target_;
};

SolveResult finish(GridPtr grid, double p, CoreResult core, const DomainObjective& f) {
  SolveResult r;
  r.u = ScalarField(grid, std::move(core.u));
  r.phi = f.phi();
  r.energy = f.energy();
  r.omega = multiplier_from(r.u, gradient_from(r.u, r.phi, p));
  if (dirichlet_integral(r.u) > 0.0) r.barycenter = barycenter(r.u).beta;
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < grid->size(); ++c)
    if (grid->inside(c)) lo = std::min(lo, r.u[c]);
  r.min_value = lo;
  r.nonnegative = lo >= -1e-8;
  r.trace = std::move(core.trace);
  return r;
}

SolveResult run_single(GridPtr grid, double p, double rho, const ScalarField& init, const SolverOptions& o) {
  DomainObjective f(grid, p);
  auto core = descend(f, init.values, rho, o);
  return finish(grid, p, std::move(core), f);
}

// -- radial -----------------------------------------------------------------

class RadialObjective : public Objective {
 public:
  RadialObjective(const RadialProblem& pr, double h, std::size_t points)
      : pr_(pr), trial_(h, points), weights_(points, 0.0) {
    for (std::size_t j = 1; j < points; ++j) weights_[j] = trial_.weight(j);
    const double pi4 = 4.0 * std::numbers::pi;
    c_.assign(points, 0.0);
    for (std::size_t j = 1; j + 1 < points; ++j) {
      const double rm = (static_cast<double>(j) + 0.5) * h;
      c_[j] = pi4 * rm * rm / h;
    }
  }

  double inner(const Vec& a, const Vec& b) const override {
    double s = 0.0;
    for (std::size_t j = 1; j < a.size(); ++j) s += weights_[j] * a[j] * b[j];
    return s;
  }

  double evaluate(const Vec& u) override {
    trial_.values = u;
    last_ = evaluate_radial(trial_, pr_.p, pr_.potential, pr_.coupling);
    return last_.energy.total;
  }

  void accept() override { current_ = last_; }

  void gradient(Vec& g) override { g = gradient_radial(trial_, current_.phi, pr_.p, pr_.coupling).values; }

  // Tridiagonal solve of (K + sigma M) z = M r on nodes 1..J-1.
  void precondition(const Vec& r, double sigma, Vec& z) override {
    const std::size_t n = r.size();
    z.assign(n, 0.0);
    if (n < 3) return;
    const std::size_t last = n - 2;
    Vec cp(n, 0.0), dp(n, 0.0);
    for (std::size_t j = 1; j <= last; ++j) {
      const double diag = (j > 1 ? c_[j - 1] : 0.0) + c_[j] + sigma * weights_[j];
      const double lower = j > 1 ? -c_[j - 1] : 0.0;
      const double upper = j < last ? -c_[j] : 0.0;
      const double rhs = weights_[j] * r[j];
      const double m = diag - lower * cp[j - 1];
      cp[j] = upper / m;
      dp[j] = (rhs - lower * dp[j - 1]) / m;
    }
    for (std::size_t j = last; j >= 1; --j) {
      z[j] = dp[j] - (j < last ? cp[j] * z[j + 1] : 0.0);
      if (j == 1) break;
    }
  }

  const RadialEvaluation& current() const { return current_; }

 private:
  RadialProblem pr_;
  RadialField trial_;
  Vec weights_;
  Vec c_;
  RadialEvaluation last_, current_;
};

void check_radial(const RadialProblem& pr) {
  check_exponent(pr.p);
  if (!(pr.outer > 0.0)) throw ContractViolation("radial_minimize: outer radius must be positive");
  if (pr.intervals < 512) throw ContractViolation("radial_minimize: need at least 512 mesh intervals");
  if (!(pr.rho > 0.0)) throw ContractViolation("radial_minimize: rho must be positive");
}

RadialSolveResult radial_single(const RadialProblem& pr, RadialField init, const SolverOptions& o) {
  init[init.last()] = 0.0;
  init[0] = 0.0;
  RadialObjective f(pr, init.h, init.size());
  auto core = descend(f, init.values, pr.rho, o);
  RadialSolveResult r;
  r.u = RadialField(init.h, init.size());
  r.u.values = std::move(core.u);
  r.u[0] = r.u[1];
  r.phi = f.current().phi;
  r.energy = f.current().energy;
  r.omega = multiplier_radial(r.u, gradient_radial(r.u, r.phi, pr.p, pr.coupling));
  r.min_value = *std::min_element(r.u.values.begin(), r.u.values.end());
  r.nonnegative = r.min_value >= -1e-8;
  r.trace = std::move(core.trace);
  return r;
}

}  // namespace

void SolverOptions::validate() const {
  if (max_iters <= 0 || !(grad_tol > 0.0) || !(step0 > 0.0) || !(armijo > 0.0 && armijo < 1.0) ||
      !(backtrack > 0.0 && backtrack < 1.0) || restarts <= 0 || !(min_step > 0.0))
    throw ContractViolation("SolverOptions: invalid option values");
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::stagnated: return "stagnated";
    case SolveStatus::max_iters: return "max_iters";
  }
  return "unknown";
}

ScalarField project_mass(const ScalarField& u, double rho) {
  const double m = mass(u);
  if (!(m > 0.0)) throw ContractViolation("project_mass: zero field");
  ScalarField out = u;
  const double s = rho / std::sqrt(m);
  for (double& v : out.values) v *= s;
  return out;
}

RadialField project_mass(const RadialField& u, double rho) {
  double m = 0.0;
  for (std::size_t j = 1; j < u.size(); ++j) m += u.weight(j) * u[j] * u[j];
  if (!(m > 0.0)) throw ContractViolation("project_mass: zero field");
  RadialField out = u;
  const double s = rho / std::sqrt(m);
  for (double& v : out.values) v *= s;
  return out;
}

ScalarField make_initial(GridPtr grid, const InitPreset& preset, std::uint64_t seed) {
  const DomainSpec& spec = grid->spec();
  const double inr = spec.inradius();
  switch (preset.kind) {
    case InitKind::gaussian: {
      if (!spec.contains(preset.center)) throw DomainError("initial Gaussian centre lies outside the domain");
      const double w = preset.width > 0.0 ? preset.width : 0.3 * inr;
      const Vec3 c = preset.center;
      return ScalarField::sample(grid, [&](Vec3 x) {
        const Vec3 d = x - c;
        return std::exp(-dot(d, d) / (w * w));
      });
    }
    case InitKind::eigenfield: return first_eigenvalue(grid, 1e-6).field;
    case InitKind::random: {
      std::mt19937_64 rng(seed);
      const auto box = spec.bounding_box();
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::vector<std::array<double, 5>> bumps;
      for (int tries = 0; bumps.size() < 5 && tries < 10000; ++tries) {
        Vec3 x;
        for (int a = 0; a < 3; ++a) x[a] = box[0][a] + unit(rng) * (box[1][a] - box[0][a]);
        if (spec.signed_distance(x) > -0.2 * inr) continue;
        bumps.push_back({x.x, x.y, x.z, (0.15 + 0.25 * unit(rng)) * inr, 0.5 + 0.5 * unit(rng)});
      }
      if (bumps.empty()) throw GeometryError("random initial field: no interior points found");
      return ScalarField::sample(grid, [&](Vec3 x) {
        double s = 0.0;
        for (const auto& b : bumps) {
          const Vec3 d = x - Vec3{b[0], b[1], b[2]};
          s += b[4] * std::exp(-dot(d, d) / (b[3] * b[3]));
        }
        return s;
      });
    }
  }
  throw ContractViolation("make_initial: unknown preset");
}

SolveResult minimize_constrained(GridPtr grid, double p, double rho, const ScalarField& init,
                                 const SolverOptions& opts) {
  opts.validate();
  check_exponent(p);
  if (!(rho > 0.0)) throw ContractViolation("minimize_constrained: rho must be positive");
  if (init.grid.get() != grid.get() && init.values.size() != grid->size())
    throw ContractViolation("minimize_constrained: initial field lives on another grid");
  SolveResult best;
  for (int k = 0; k < opts.restarts; ++k) {
    ScalarField start = k == 0 ? ScalarField(grid, init.values)
                               : make_initial(grid, {InitKind::random, {}, 0.0}, opts.seed + static_cast<std::uint64_t>(k));
    SolveResult r = run_single(grid, p, rho, start, opts);
    r.trace.restart_index = k;
    if (k == 0 || r.energy.total < best.energy.total) best = std::move(r);
  }
  return best;
}

SolveResult minimize_constrained(GridPtr grid, double p, double rho, const InitPreset& init,
                                 const SolverOptions& opts) {
  return minimize_constrained(grid, p, rho, make_initial(grid, init, opts.seed), opts);
}

BarycenterSolveResult minimize_with_barycenter(GridPtr grid, double p, double rho, Vec3 target,
                                               const ScalarField& init, const SolverOptions& opts,
                                               const BarycenterSolveOptions& bopts) {
  opts.validate();
  check_exponent(p);
  const double tol = bopts.tolerance > 0.0 ? bopts.tolerance : grid->h();
  ScalarField u = project_mass(ScalarField(grid, init.values), rho);
  double mu = bopts.mu0;
  if (!(mu > 0.0)) {
    const double e0 = std::abs(energy_domain(u, p).total);
    const double len = grid->spec().diameter();
    mu = 10.0 * std::max(e0, 1e-10) / (len * len);
  }
  BarycenterSolveResult out;
  for (int stage = 0; stage < std::max(1, bopts.stages); ++stage) {
    DomainObjective f(grid, p);
    f.set_penalty(mu, target);
    auto core = descend(f, u.values, rho, opts);
    const double penalized = core.value;
    out.result = finish(grid, p, std::move(core), f);
    out.penalized = penalized;
    out.mu = mu;
    out.stages = stage + 1;
    out.violation = norm(out.result.barycenter - target);
    u = out.result.u;
    if (out.violation <= tol) {
      out.constraint_met = true;
      break;
    }
    mu *= bopts.mu_factor;
  }
  return out;
}

RadialSolveResult radial_minimize(const RadialProblem& pr, const RadialField& init, const SolverOptions& opts) {
  opts.validate();
  check_radial(pr);
  RadialField start = RadialField::on_interval(pr.outer, pr.intervals);
  for (std::size_t j = 0; j < start.size(); ++j) start[j] = init.at(start.r(j));
  return radial_single(pr, std::move(start), opts);
}

RadialSolveResult radial_minimize(const RadialProblem& pr, const SolverOptions& opts) {
  opts.validate();
  check_radial(pr);
  RadialSolveResult best;
  for (int k = 0; k < opts.restarts; ++k) {
    RadialField start = RadialField::on_interval(pr.outer, pr.intervals);
    double w = pr.init_width > 0.0 ? pr.init_width : std::min(pr.outer / 3.0, 6.0);
    if (k > 0) {
      std::mt19937_64 rng(opts.seed + static_cast<std::uint64_t>(k));
      w *= std::uniform_real_distribution<double>(0.3, 2.0)(rng);
    }
    for (std::size_t j = 0; j < start.size(); ++j) start[j] = std::exp(-start.r(j) * start.r(j) / (w * w));
    RadialSolveResult r = radial_single(pr, std::move(start), opts);
    r.trace.restart_index = k;
    if (k == 0 || r.energy.total < best.energy.total) best = std::move(r);
  }
  return best;
}

}  // namespace splab
