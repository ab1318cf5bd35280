#include "splab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "splab/errors.hpp"
#include "splab/kernels.hpp"

namespace splab {

namespace {

// Fraction of the edge x -> x + h*e lying inside the domain; the caller
// guarantees x inside and x + h*e outside.
double boundary_fraction(const DomainSpec& spec, Vec3 x, int axis, int sign, double h) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    Vec3 p = x;
    p[axis] += sign * mid * h;
    (spec.contains(p) ? lo : hi) = mid;
  }
  return std::max(0.5 * (lo + hi), Grid::kMinTheta);
}

}  // namespace

Grid::Grid(DomainSpec spec, double h, Vec3 origin, std::array<int, 3> dims)
    : spec_(std::move(spec)), h_(h), origin_(origin), dims_(dims) {
  if (!(h > 0.0)) throw DomainError("grid spacing must be positive");
  for (int a = 0; a < 3; ++a)
    if (dims[a] < 3) throw GeometryError("grid needs at least 3 cells per axis");
  const std::size_t n = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  mask_.assign(n, 0);
  boundary_.assign(n, 0);
  nbr_.assign(n, 0);
  diag_.assign(n, 0.0);

  // Outermost layer always stays masked out so stencils never leave the array.
  for (int i = 1; i + 1 < dims[0]; ++i)
    for (int j = 1; j + 1 < dims[1]; ++j)
      for (int k = 1; k + 1 < dims[2]; ++k)
        if (spec_.contains(center(i, j, k))) mask_[index(i, j, k)] = 1;

  for (std::size_t c = 0; c < n; ++c) {
    if (!mask_[c]) continue;
    ++masked_count_;
    double d = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
      for (int sign : {-1, 1}) {
        const std::size_t nb = c + sign * stride(axis);
        if (mask_[nb]) {
          d += 1.0;
          ++nbr_[c];
        } else {
          const double theta = boundary_fraction(spec_, center(c), axis, sign, h_);
          edges_.push_back({c, axis, sign, theta});
          d += 1.0 / theta;
          boundary_[c] = 1;
        }
      }
    }
    diag_[c] = d;
  }
  if (masked_count_ == 0) throw GeometryError("grid mask is empty for " + spec_.kind());
}

int cell_cap() {
  if (const char* env = std::getenv("SPLAB_CELL_CAP")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<int>(v);
  }
  return 192;
}

GridPtr build_grid(const DomainSpec& spec, double cells_per_unit, int pad_cells, Vec3 shift) {
  if (!(cells_per_unit > 0.0)) throw DomainError("cells_per_unit must be positive");
  if (pad_cells < 0) throw DomainError("pad_cells must be non-negative");
  const double h = 1.0 / cells_per_unit;
  const auto box = spec.bounding_box();
  const int cap = cell_cap();
  std::array<int, 3> lo{}, dims{};
  Vec3 origin;
  static constexpr const char* kAxis[] = {"x", "y", "z"};
  for (int a = 0; a < 3; ++a) {
    // Lattice cells whose centres can fall inside [box.lo, box.hi].
    const int first = static_cast<int>(std::ceil((box[0][a] - shift[a]) / h - 0.5));
    const int last = static_cast<int>(std::floor((box[1][a] - shift[a]) / h - 0.5));
    const int span = std::max(last - first + 1, 1);
    if (span > cap)
      throw ResourceError("build_grid: axis " + std::string(kAxis[a]) + " needs " +
                          std::to_string(span) + " cells, cap is " + std::to_string(cap));
    const int pad = std::max(pad_cells, 1);
    lo[a] = first - pad;
    dims[a] = span + 2 * pad;
    origin[a] = (lo[a] + 0.5) * h + shift[a];
  }
  return std::make_shared<const Grid>(spec, h, origin, dims);
}

ScalarField::ScalarField(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid->size()) throw ContractViolation("ScalarField: value count does not match grid");
  for (std::size_t c = 0; c < values.size(); ++c)
    if (!grid->inside(c)) values[c] = 0.0;
}

ScalarField ScalarField::sample(GridPtr g, const std::function<double(Vec3)>& f) {
  ScalarField out(g);
  for (std::size_t c = 0; c < g->size(); ++c)
    if (g->inside(c)) out.values[c] = f(g->center(c));
  return out;
}

double integrate(const ScalarField& field, const Grid& grid) {
  if (field.values.size() != grid.size()) throw ContractViolation("integrate: field/grid shape mismatch");
  return kernels::sum(grid, field.values) * grid.cell_volume();
}

double integrate(const ScalarField& field) { return integrate(field, *field.grid); }

double mass(const ScalarField& field) {
  return kernels::dot(*field.grid, field.values, field.values) * field.grid->cell_volume();
}

Vec3 lattice_shift(const Grid& g) {
  Vec3 s;
  const double h = g.h();
  for (int a = 0; a < 3; ++a) {
    const double t = g.origin()[a] - 0.5 * h;
    s[a] = t - std::floor(t / h) * h;
    if (s[a] >= h * (1.0 - 1e-9)) s[a] = 0.0;
  }
  return s;
}

ScalarField transfer(const ScalarField& u, GridPtr target, double* dropped_mass) {
  const Grid& src = *u.grid;
  const Grid& dst = *target;
  const double h = src.h();
  if (std::abs(dst.h() - h) > 1e-12 * h) throw ContractViolation("transfer: grids have different spacing");
  std::array<long, 3> offset{};
  for (int a = 0; a < 3; ++a) {
    const double s = (src.origin()[a] - dst.origin()[a]) / h;
    offset[a] = std::lround(s);
    if (std::abs(s - static_cast<double>(offset[a])) > 1e-6) throw ContractViolation("transfer: lattices are not aligned");
  }
  ScalarField out(target);
  double dropped = 0.0;
  const auto& sd = src.dims();
  const auto& dd = dst.dims();
  for (int i = 0; i < sd[0]; ++i)
    for (int j = 0; j < sd[1]; ++j)
      for (int k = 0; k < sd[2]; ++k) {
        const std::size_t c = src.index(i, j, k);
        if (!src.inside(c) || u[c] == 0.0) continue;
        const long ti = i + offset[0], tj = j + offset[1], tk = k + offset[2];
        const bool in_box = ti >= 0 && tj >= 0 && tk >= 0 && ti < dd[0] && tj < dd[1] && tk < dd[2];
        const std::size_t t = in_box ? dst.index(static_cast<int>(ti), static_cast<int>(tj), static_cast<int>(tk)) : 0;
        if (in_box && dst.inside(t))
          out[t] = u[c];
        else
          dropped += u[c] * u[c] * src.cell_volume();
      }
  if (dropped_mass) *dropped_mass = dropped;
  return out;
}

}  // namespace splab
