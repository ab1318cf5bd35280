#include "splab/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "splab/errors.hpp"
#include "splab/kernels.hpp"

namespace splab {

CgReport conjugate_gradient(const Grid& grid, BoundaryKind kind, double shift,
                            std::span<const double> rhs, std::span<double> x, double tol,
                            int max_iters) {
  namespace k = kernels;
  const std::size_t n = grid.size();
  if (rhs.size() != n || x.size() != n) throw ContractViolation("conjugate_gradient: shape mismatch");
  if (max_iters <= 0) max_iters = 20 * static_cast<int>(std::cbrt(static_cast<double>(grid.masked_count()))) + 2000;

  auto apply = [&](std::span<const double> in, std::span<double> out) {
    if (kind == BoundaryKind::dirichlet)
      k::dirichlet_apply(grid, in, out, shift);
    else
      k::neumann_apply(grid, in, out, shift);
  };

  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  std::vector<double> inv_diag(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    if (!grid.inside(c)) continue;
    const double d = kind == BoundaryKind::dirichlet ? grid.dirichlet_diagonal()[c]
                                                     : static_cast<double>(grid.inside_neighbours()[c]);
    inv_diag[c] = 1.0 / (d * inv_h2 + shift);
  }

  CgReport report;
  const double bnorm = std::sqrt(k::dot(grid, rhs, rhs));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return report;
  }

  std::vector<double> r(n), z(n), p(n), q(n);
  apply(x, r);
  for (std::size_t c = 0; c < n; ++c) r[c] = grid.inside(c) ? rhs[c] - r[c] : 0.0;
  double rnorm = std::sqrt(k::dot(grid, r, r));
  report.history.push_back(rnorm / bnorm);
  if (rnorm <= tol * bnorm) {
    report.relative_residual = rnorm / bnorm;
    return report;
  }
  k::multiply(inv_diag, r, z);
  p = z;
  double rz = k::dot(grid, r, z);
  for (int it = 1; it <= max_iters; ++it) {
    apply(p, q);
    const double pq = k::dot(grid, p, q);
    if (!(pq > 0.0)) throw NumericError("conjugate_gradient: operator not positive definite", report.history);
    const double alpha = rz / pq;
    k::axpy(alpha, p, x);
    k::axpy(-alpha, q, r);
    rnorm = std::sqrt(k::dot(grid, r, r));
    report.history.push_back(rnorm / bnorm);
    report.iterations = it;
    if (rnorm <= tol * bnorm) {
      report.relative_residual = rnorm / bnorm;
      return report;
    }
    k::multiply(inv_diag, r, z);
    const double rz_new = k::dot(grid, r, z);
    k::xpby(z, rz_new / rz, p);
    rz = rz_new;
  }
  std::ostringstream msg;
  msg << "conjugate_gradient: no convergence in " << max_iters << " iterations (relative residual "
      << rnorm / bnorm << ", tol " << tol << ")";
  throw NumericError(msg.str(), report.history);
}

ScalarField poisson_dirichlet(const ScalarField& source, double tol, const ScalarField* guess,
                              CgReport* report) {
  if (!(tol > 0.0)) throw ContractViolation("poisson_dirichlet: tol must be positive");
  const Grid& g = *source.grid;
  ScalarField phi(source.grid);
  if (guess) {
    if (guess->values.size() != g.size()) throw ContractViolation("poisson_dirichlet: guess shape mismatch");
    phi.values = guess->values;
  }
  auto rep = conjugate_gradient(g, BoundaryKind::dirichlet, 0.0, source.values, phi.values, tol);
  if (report) *report = std::move(rep);
  return phi;
}

Eigenpair first_eigenvalue(GridPtr grid, double tol, int max_iters) {
  namespace k = kernels;
  const Grid& g = *grid;
  const std::size_t n = g.size();
  const double dv = g.cell_volume();

  // Positive start that vanishes towards the boundary.
  std::vector<double> x(n, 0.0), y(n, 0.0), ax(n, 0.0);
  for (std::size_t c = 0; c < n; ++c)
    if (g.inside(c)) x[c] = std::max(-g.spec().signed_distance(g.center(c)), g.h());

  auto normalize = [&](std::vector<double>& v) {
    const double m = std::sqrt(k::dot(g, v, v) * dv);
    for (double& e : v) e /= m;
  };
  normalize(x);

  Eigenpair out;
  double mu = 0.0;
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  std::vector<double> history;
  for (int it = 1; it <= max_iters; ++it) {
    // Warm start from the previous iterate scaled by the current estimate.
    for (std::size_t c = 0; c < n; ++c) y[c] = mu > 0.0 ? x[c] / mu : 0.0;
    // Inner accuracy tracks the outer residual; inverse iteration tolerates
    // loose early solves.
    const double inner_tol = std::clamp(1e-3 * (history.empty() ? 1.0 : history.back()), 1e-13, 1e-4);
    conjugate_gradient(g, BoundaryKind::dirichlet, 0.0, x, y, inner_tol);
    x.swap(y);
    normalize(x);
    k::dirichlet_apply(g, x, ax);
    mu = k::dot(g, x, ax) / k::dot(g, x, x);
    for (std::size_t c = 0; c < n; ++c) y[c] = ax[c] - mu * x[c];
    const double res = std::sqrt(k::dot(g, y, y) / k::dot(g, x, x)) / mu;
    history.push_back(res);
    out.iterations = it;
    out.residual = res;
    if (res <= tol) break;
    if (res < 0.9 * best) {
      best = res;
      since_best = 0;
    } else if (++since_best > 20) {
      throw NumericError("first_eigenvalue: inverse iteration stagnated", history);
    }
    if (it == max_iters) throw NumericError("first_eigenvalue: iteration cap reached", history);
  }
  // Nonnegative in bulk.
  if (k::sum(g, x) < 0.0)
    for (double& e : x) e = -e;
  out.value = mu;
  out.field = ScalarField(std::move(grid), std::move(x));
  return out;
}

namespace {

// phi_j = sum_k q_k / max(r_j, r_k) - shift, where q_k = w_k f_k / (4 pi).
RadialField radial_kernel_potential(const RadialField& density, std::size_t last, double inv_outer) {
  RadialField phi(density.h, last + 1);
  std::vector<double> q(last + 1, 0.0);
  for (std::size_t k = 0; k <= last; ++k) {
    double w = 4.0 * std::numbers::pi * density.r(k) * density.r(k) * density.h;
    if (k == last) w *= 0.5;
    q[k] = w * density[k] / (4.0 * std::numbers::pi);
  }
  // Tail sums of q_k / r_k for k > j, accumulated from the outside in.
  std::vector<double> tail(last + 1, 0.0);
  for (std::size_t k = last; k-- > 0;) tail[k] = tail[k + 1] + q[k + 1] / density.r(k + 1);
  double inner = 0.0, total = 0.0;
  for (double v : q) total += v;
  for (std::size_t j = 0; j <= last; ++j) {
    inner += q[j];
    const double near = j == 0 ? 0.0 : inner / density.r(j);
    phi[j] = near + tail[j] - total * inv_outer;
  }
  return phi;
}

}  // namespace

RadialField newton_potential_of_density(const RadialField& density) {
  if (density.size() < 2) throw ContractViolation("newton_potential_radial: mesh too small");
  return radial_kernel_potential(density, density.last(), 0.0);
}

RadialField newton_potential_radial(const RadialField& u) {
  RadialField dens = u;
  for (double& v : dens.values) v *= v;
  return newton_potential_of_density(dens);
}

RadialField poisson_dirichlet_radial(const RadialField& source, double a) {
  if (!(a > 0.0)) throw ContractViolation("poisson_dirichlet_radial: a must be positive");
  const double s = a / source.h;
  const auto last = static_cast<std::size_t>(std::llround(s));
  if (std::abs(s - static_cast<double>(last)) > 1e-9 * std::max(1.0, s) || last >= source.size() || last < 1)
    throw ContractViolation("poisson_dirichlet_radial: a must be a mesh node of the source");
  return radial_kernel_potential(source, last, 1.0 / a);
}

}  // namespace splab
