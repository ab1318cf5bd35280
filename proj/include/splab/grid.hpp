#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "splab/geometry.hpp"

namespace splab {

/// One stencil edge that leaves the domain: the cell at `cell` has its
/// neighbour in direction (axis, sign) masked out, and the analytic boundary
/// crosses the edge at fraction `theta` of the spacing.
struct BoundaryEdge {
  std::size_t cell;
  int axis;
  int sign;
  double theta;
};

/// Cell-centred masked grid on the global lattice x_i = (i + 1/2) h + shift.
/// Immutable after construction.
class Grid {
 public:
  /// Smallest admissible boundary fraction; closer crossings are clamped.
  static constexpr double kMinTheta = 1e-2;

  Grid(DomainSpec spec, double h, Vec3 origin, std::array<int, 3> dims);

  const DomainSpec& spec() const noexcept { return spec_; }
  double h() const noexcept { return h_; }
  double cell_volume() const noexcept { return h_ * h_ * h_; }
  Vec3 origin() const noexcept { return origin_; }
  const std::array<int, 3>& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return mask_.size(); }
  std::size_t masked_count() const noexcept { return masked_count_; }

  std::size_t index(int i, int j, int k) const noexcept {
    return (static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + k;
  }
  std::array<int, 3> ijk(std::size_t idx) const noexcept {
    const int k = static_cast<int>(idx % dims_[2]);
    const std::size_t r = idx / dims_[2];
    return {static_cast<int>(r / dims_[1]), static_cast<int>(r % dims_[1]), k};
  }
  Vec3 center(int i, int j, int k) const noexcept {
    return {origin_.x + i * h_, origin_.y + j * h_, origin_.z + k * h_};
  }
  Vec3 center(std::size_t idx) const noexcept {
    const auto c = ijk(idx);
    return center(c[0], c[1], c[2]);
  }
  /// Linear offset between neighbours along `axis`.
  std::ptrdiff_t stride(int axis) const noexcept {
    return axis == 2 ? 1 : (axis == 1 ? dims_[2] : static_cast<std::ptrdiff_t>(dims_[1]) * dims_[2]);
  }

  const std::vector<std::uint8_t>& mask() const noexcept { return mask_; }
  bool inside(std::size_t idx) const noexcept { return mask_[idx] != 0; }
  /// Masked-in cells with at least one masked-out neighbour.
  const std::vector<std::uint8_t>& boundary_flag() const noexcept { return boundary_; }
  /// Diagonal of h^2 * (-Delta_h) with Dirichlet data at the analytic boundary.
  const std::vector<double>& dirichlet_diagonal() const noexcept { return diag_; }
  /// Number of masked-in neighbours (diagonal of the Neumann operator).
  const std::vector<std::uint8_t>& inside_neighbours() const noexcept { return nbr_; }
  const std::vector<BoundaryEdge>& boundary_edges() const noexcept { return edges_; }

  /// Point where a boundary edge meets the analytic boundary.
  Vec3 crossing(const BoundaryEdge& e) const noexcept {
    Vec3 x = center(e.cell);
    x[e.axis] += e.sign * e.theta * h_;
    return x;
  }

 private:
  DomainSpec spec_;
  double h_;
  Vec3 origin_;
  std::array<int, 3> dims_;
  std::vector<std::uint8_t> mask_;
  std::vector<std::uint8_t> boundary_;
  std::vector<std::uint8_t> nbr_;
  std::vector<double> diag_;
  std::vector<BoundaryEdge> edges_;
  std::size_t masked_count_ = 0;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Per-axis cell cap: SPLAB_CELL_CAP when set, 192 otherwise.
int cell_cap();

/// Masked grid covering `spec` plus `pad_cells` exterior layers (at least one
/// is always kept so the stencil never leaves the array). `shift` offsets the
/// global lattice.
GridPtr build_grid(const DomainSpec& spec, double cells_per_unit, int pad_cells = 1,
                   Vec3 shift = {});

/// Real field on a grid; values outside the mask are kept at zero.
struct ScalarField {
  GridPtr grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(GridPtr g) : grid(std::move(g)), values(grid->size(), 0.0) {}
  ScalarField(GridPtr g, std::vector<double> v);

  /// Samples f at masked-in cell centres.
  static ScalarField sample(GridPtr g, const std::function<double(Vec3)>& f);

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

/// Midpoint rule: sum over masked-in cells of field * h^3.
double integrate(const ScalarField& field, const Grid& grid);
double integrate(const ScalarField& field);

/// Squared L2 norm, the "mass" rho^2.
double mass(const ScalarField& field);

/// Offset of the global lattice a grid lives on, reduced to [0, h).
Vec3 lattice_shift(const Grid& g);

/// Copies values between two grids on the same lattice. Masked-in cells of `u`
/// that fall outside the target mask are dropped; their mass goes to
/// `dropped_mass` when given. Throws ContractViolation for unaligned lattices.
ScalarField transfer(const ScalarField& u, GridPtr target, double* dropped_mass = nullptr);

}  // namespace splab
