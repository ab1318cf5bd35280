#include "splab/greens.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "splab/elliptic.hpp"
#include "splab/errors.hpp"
#include "splab/kernels.hpp"

namespace splab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDefaultPairBudget = 3e8;

}  // namespace

std::string to_string(RegularMethod m) { return m == RegularMethod::image_charge ? "image_charge" : "numeric"; }

double newton_kernel(Vec3 x, Vec3 y) { return 1.0 / (4.0 * kPi * norm(x - y)); }

double regular_part_ball(Vec3 x, Vec3 y, double a, Vec3 center) {
  if (!(a > 0.0)) throw DomainError("regular_part_ball: radius must be positive");
  const Vec3 xs = x - center, ys = y - center;
  const double slack = a * (1.0 + 1e-12);
  if (norm(xs) > slack || norm(ys) > slack) throw DomainError("regular_part_ball: point outside the closed ball");
  // |y'| |x' - a^2 y'/|y'|^2| written without the division, so y' = 0 is regular.
  const double q = dot(xs, xs) * dot(ys, ys) / (a * a) - 2.0 * dot(xs, ys) + a * a;
  return 1.0 / (4.0 * kPi * std::sqrt(q));
}

ScalarField harmonic_extension(GridPtr grid, const std::function<double(Vec3)>& data, double tol) {
  const Grid& g = *grid;
  const double inv_h2 = 1.0 / (g.h() * g.h());
  ScalarField rhs(grid);
  for (const auto& e : g.boundary_edges()) rhs[e.cell] += data(g.crossing(e)) * inv_h2 / e.theta;
  ScalarField out(grid);
  conjugate_gradient(g, BoundaryKind::dirichlet, 0.0, rhs.values, out.values, tol);
  return out;
}

ScalarField regular_part_numeric(GridPtr grid, Vec3 y, double tol) {
  const double depth = -grid->spec().signed_distance(y);
  if (depth < 2.0 * grid->h() * (1.0 - 1e-12))
    throw DomainError("regular_part_numeric: source point closer than 2h to the boundary");
  return harmonic_extension(grid, [&](Vec3 x) { return newton_kernel(x, y); }, tol);
}

double pair_energy_regular(const ScalarField& u, int sample_stride) {
  const GridPtr grid = u.grid;
  const Grid& g = *grid;
  const double dv = g.cell_volume();
  const auto& dims = g.dims();
  const double edges = static_cast<double>(g.boundary_edges().size());

  auto source_count = [&](int s) {
    double n = 1.0;
    for (int a = 0; a < 3; ++a) n *= std::ceil(static_cast<double>(dims[a]) / s);
    return std::min(n, static_cast<double>(g.masked_count()));
  };
  if (sample_stride <= 0) {
    sample_stride = 1;
    while (edges * source_count(sample_stride) > kDefaultPairBudget) ++sample_stride;
  }
  if (edges * source_count(sample_stride) > kPairBudget)
    throw ResourceError("pair_energy_regular: stride " + std::to_string(sample_stride) + " exceeds the solve budget");

  // Aggregate u^2 h^3 over stride^3 blocks at the block's mass centroid.
  struct Source {
    Vec3 x;
    double m;
  };
  std::vector<Source> sources;
  const int s = sample_stride;
  for (int bi = 0; bi < dims[0]; bi += s)
    for (int bj = 0; bj < dims[1]; bj += s)
      for (int bk = 0; bk < dims[2]; bk += s) {
        double m = 0.0;
        Vec3 mx;
        for (int i = bi; i < std::min(bi + s, dims[0]); ++i)
          for (int j = bj; j < std::min(bj + s, dims[1]); ++j)
            for (int k = bk; k < std::min(bk + s, dims[2]); ++k) {
              const std::size_t c = g.index(i, j, k);
              if (!g.inside(c) || u[c] == 0.0) continue;
              const double w = u[c] * u[c] * dv;
              m += w;
              mx = mx + w * g.center(c);
            }
        if (m > 0.0) sources.push_back({mx / m, m});
      }
  if (sources.empty()) return 0.0;

  const auto& bedges = g.boundary_edges();
  std::vector<double> data(bedges.size(), 0.0);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t e = 0; e < static_cast<std::ptrdiff_t>(bedges.size()); ++e) {
    const Vec3 xb = g.crossing(bedges[e]);
    double acc = 0.0;
    for (const auto& src : sources) acc += src.m / norm(xb - src.x);
    data[e] = acc / (4.0 * kPi);
  }

  const double inv_h2 = 1.0 / (g.h() * g.h());
  ScalarField rhs(grid);
  for (std::size_t e = 0; e < bedges.size(); ++e) rhs[bedges[e].cell] += data[e] * inv_h2 / bedges[e].theta;
  ScalarField psi(grid);
  conjugate_gradient(g, BoundaryKind::dirichlet, 0.0, rhs.values, psi.values, 1e-10);
  ScalarField u2(grid);
  kernels::multiply(u.values, u.values, u2.values);
  return kernels::dot(g, psi.values, u2.values) * dv;
}

RegularBoundReport sup_regular_part(GridPtr grid, double delta, int max_sources) {
  const Grid& g = *grid;
  if (delta < 2.0 * g.h() * (1.0 - 1e-12)) throw ContractViolation("sup_regular_part: delta must be at least 2h");
  const DomainSpec& spec = g.spec();
  std::vector<std::pair<double, std::size_t>> cand;
  std::vector<double> depth(g.size(), -1.0);
  for (std::size_t c = 0; c < g.size(); ++c) {
    if (!g.inside(c)) continue;
    depth[c] = -spec.signed_distance(g.center(c));
    if (depth[c] >= delta) cand.push_back({depth[c], c});
  }
  if (cand.empty()) throw GeometryError("sup_regular_part: no cells at the requested depth");
  std::sort(cand.begin(), cand.end());
  cand.resize(std::min(cand.size(), static_cast<std::size_t>(std::max(max_sources, 1))));

  RegularBoundReport rep;
  rep.delta = delta;
  rep.method = RegularMethod::numeric;
  rep.m_value = -1.0;
  for (const auto& [d, cy] : cand) {
    const Vec3 y = g.center(cy);
    const ScalarField h = regular_part_numeric(grid, y);
    for (std::size_t c = 0; c < g.size(); ++c) {
      if (depth[c] < delta) continue;
      ++rep.samples;
      if (h[c] > rep.m_value) {
        rep.m_value = h[c];
        rep.argmax_x = g.center(c);
        rep.argmax_y = y;
      }
    }
  }
  return rep;
}

RegularBoundReport sup_regular_part_ball(double a, double delta) {
  if (!(delta > 0.0 && delta < a)) throw ContractViolation("sup_regular_part_ball: delta must lie in (0, a)");
  RegularBoundReport rep;
  rep.delta = delta;
  rep.method = RegularMethod::image_charge;
  const double r = a - delta;
  rep.m_value = a / (4.0 * kPi * (a * a - r * r));
  rep.samples = 1;
  rep.argmax_x = rep.argmax_y = Vec3{r, 0.0, 0.0};
  return rep;
}

MarginFamily regular_bound_family(GridPtr grid, std::vector<double> deltas, int max_sources) {
  if (deltas.size() < 2) throw ContractViolation("regular_bound_family: need at least two margins");
  std::sort(deltas.rbegin(), deltas.rend());
  MarginFamily fam;
  for (double d : deltas) fam.reports.push_back(sup_regular_part(grid, d, max_sources));
  const auto& a = fam.reports.front();
  const auto& b = fam.reports.back();
  fam.log_slope = std::log(b.m_value / a.m_value) / std::log(b.delta / a.delta);
  fam.diverging = fam.log_slope <= -0.5;
  return fam;
}

}  // namespace splab
