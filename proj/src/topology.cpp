#include "splab/topology.hpp"

#include <cmath>

#include "splab/errors.hpp"
#include "splab/kernels.hpp"

namespace splab {

namespace {

struct Moments {
  double w = 0.0;
  Vec3 wx;
};

// Visits every stencil edge: interior edges as (cell, neighbour, weight
// location), boundary edges separately. Weights are the edge's share of
// int |grad u|^2.
template <class Interior, class Boundary>
void for_each_edge(const Grid& g, Interior&& interior, Boundary&& boundary) {
  for (std::size_t c = 0; c < g.size(); ++c) {
    if (!g.inside(c)) continue;
    for (int a = 0; a < 3; ++a) {
      const std::size_t n = c + g.stride(a);
      if (g.inside(n)) interior(c, n, a);
    }
  }
  for (const auto& e : g.boundary_edges()) boundary(e);
}

Moments moments(const ScalarField& u) {
  const Grid& g = *u.grid;
  const double h = g.h();
  Moments m;
  for_each_edge(
      g,
      [&](std::size_t c, std::size_t n, int a) {
        const double d = u[c] - u[n];
        const double w = d * d * h;
        Vec3 x = g.center(c);
        x[a] += 0.5 * h;
        m.w += w;
        m.wx = m.wx + w * x;
      },
      [&](const BoundaryEdge& e) {
        const double w = u[e.cell] * u[e.cell] * h / e.theta;
        Vec3 x = g.center(e.cell);
        x[e.axis] += 0.5 * e.sign * e.theta * h;
        m.w += w;
        m.wx = m.wx + w * x;
      });
  return m;
}

}  // namespace

BarycenterReport barycenter(const ScalarField& u) {
  const Moments m = moments(u);
  if (!(m.w > 0.0)) throw ContractViolation("barycenter: zero kinetic mass");
  BarycenterReport r;
  r.beta = m.wx / m.w;
  r.kinetic_mass = m.w;
  return r;
}

ScalarField barycenter_penalty_gradient(const ScalarField& u, Vec3 target) {
  const Grid& g = *u.grid;
  const double h = g.h();
  const Moments m = moments(u);
  if (!(m.w > 0.0)) throw ContractViolation("barycenter: zero kinetic mass");
  const Vec3 beta = m.wx / m.w;
  const Vec3 off = beta - target;
  const double scale = 2.0 / (m.w * g.cell_volume());
  ScalarField out(u.grid);
  for_each_edge(
      g,
      [&](std::size_t c, std::size_t n, int a) {
        Vec3 x = g.center(c);
        x[a] += 0.5 * h;
        const double s = dot(x - beta, off);
        const double dw = 2.0 * h * (u[c] - u[n]);
        out[c] += scale * s * dw;
        out[n] -= scale * s * dw;
      },
      [&](const BoundaryEdge& e) {
        Vec3 x = g.center(e.cell);
        x[e.axis] += 0.5 * e.sign * e.theta * h;
        const double s = dot(x - beta, off);
        out[e.cell] += scale * s * 2.0 * h * u[e.cell] / e.theta;
      });
  return out;
}

ScalarField transplant(const RadialField& w, Vec3 y, GridPtr grid, const RegionPredicate& eroded, double rho) {
  if (!eroded.contains(y)) throw DomainError("transplant: centre lies outside the eroded region");
  if (!(rho > 0.0)) throw ContractViolation("transplant: rho must be positive");
  auto u = ScalarField::sample(grid, [&](Vec3 x) { return w.at(norm(x - y)); });
  const double m = mass(u);
  if (!(m > 0.0)) throw ContractViolation("transplant: profile has no mass on the grid");
  const double s = rho / std::sqrt(m);
  for (double& v : u.values) v *= s;
  return u;
}

SublevelThreshold sublevel_threshold(double b_star, double lambda, double rho, double m_term, double delta) {
  if (!(lambda > 1.0)) throw ContractViolation("sublevel_threshold: lambda must exceed 1");
  if (!(m_term >= 0.0)) throw ContractViolation("sublevel_threshold: M term must be nonnegative");
  (void)rho;
  SublevelThreshold t;
  t.lambda = lambda;
  t.b_star = b_star;
  t.m_term = m_term;
  t.level = b_star + (1.0 + m_term) / lambda;
  t.delta = delta;
  return t;
}

ContainmentReport containment_audit(const std::vector<SublevelCandidate>& candidates, double level,
                                    const RegionPredicate& dilated, double slack) {
  ContainmentReport rep;
  rep.level = level;
  rep.slack = slack;
  for (const auto& c : candidates) {
    ContainmentItem it;
    it.label = c.label;
    it.beta = c.beta;
    it.energy = c.energy;
    it.audited = c.energy <= level;
    it.margin = -dilated.depth(c.beta);
    it.contained = it.margin <= slack;
    if (it.audited && !it.contained) ++rep.violations;
    rep.items.push_back(it);
  }
  rep.pass = rep.violations == 0;
  return rep;
}

std::vector<Vec3> target_lattice(const RegionPredicate& eroded, const std::array<Vec3, 2>& box, double spacing,
                                 int max_per_axis) {
  std::array<int, 3> n{};
  for (int a = 0; a < 3; ++a) {
    const double len = box[1][a] - box[0][a];
    n[a] = static_cast<int>(std::floor(len / spacing + 1e-9)) + 1;
    n[a] = std::max(1, std::min(n[a], max_per_axis));
  }
  auto coord = [&](int a, int i) {
    if (n[a] == 1) return 0.5 * (box[0][a] + box[1][a]);
    return box[0][a] + (box[1][a] - box[0][a]) * i / (n[a] - 1);
  };
  std::vector<Vec3> pts;
  for (int i = 0; i < n[0]; ++i)
    for (int j = 0; j < n[1]; ++j)
      for (int k = 0; k < n[2]; ++k) {
        const Vec3 y{coord(0, i), coord(1, j), coord(2, k)};
        if (eroded.contains(y)) pts.push_back(y);
      }
  return pts;
}

}  // namespace splab
