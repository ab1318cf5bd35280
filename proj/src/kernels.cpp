#include "splab/kernels.hpp"

#include <omp.h>

#include <vector>

namespace splab::kernels {

namespace {

// Plane partial sums; planes are combined serially in index order.
template <class F>
double plane_reduce(const Grid& g, F&& term) {
  const int n0 = g.dims()[0];
  const std::size_t plane = static_cast<std::size_t>(g.dims()[1]) * g.dims()[2];
  std::vector<double> partial(n0, 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n0; ++i) {
    double s = 0.0;
    const std::size_t base = i * plane;
    for (std::size_t q = 0; q < plane; ++q) s += term(base + q);
    partial[i] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

template <bool Dirichlet>
void stencil_plane(const Grid& g, CSpan u, Span out, double shift, int i) {
  const auto& d = g.dims();
  const auto& mask = g.mask();
  const auto& diag = g.dirichlet_diagonal();
  const auto& nbr = g.inside_neighbours();
  const double inv_h2 = 1.0 / (g.h() * g.h());
  const std::ptrdiff_t sx = g.stride(0), sy = g.stride(1);
  for (int j = 0; j < d[1]; ++j) {
    const std::size_t row = g.index(i, j, 0);
    for (int k = 0; k < d[2]; ++k) {
      const std::size_t c = row + k;
      if (!mask[c]) {
        out[c] = 0.0;
        continue;
      }
      // Outside values are zero.
      const double nsum = u[c - sx] + u[c + sx] + u[c - sy] + u[c + sy] + u[c - 1] + u[c + 1];
      const double dd = Dirichlet ? diag[c] : static_cast<double>(nbr[c]);
      out[c] = (dd * u[c] - nsum) * inv_h2 + shift * u[c];
    }
  }
}

template <bool Dirichlet>
void stencil_apply_parallel(const Grid& g, CSpan u, Span out, double shift) {
  const int n0 = g.dims()[0];
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n0; ++i) stencil_plane<Dirichlet>(g, u, out, shift, i);
}

}  // namespace

double dot(const Grid& g, CSpan a, CSpan b) {
  return plane_reduce(g, [&](std::size_t c) { return a[c] * b[c]; });
}

double sum(const Grid& g, CSpan a) {
  const auto& mask = g.mask();
  return plane_reduce(g, [&](std::size_t c) { return mask[c] ? a[c] : 0.0; });
}

void dirichlet_apply(const Grid& g, CSpan u, Span out, double shift) {
  stencil_apply_parallel<true>(g, u, out, shift);
}

void neumann_apply(const Grid& g, CSpan u, Span out, double shift) {
  stencil_apply_parallel<false>(g, u, out, shift);
}

void axpy(double a, CSpan x, Span y) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(y.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < n; ++c) y[c] += a * x[c];
}

void xpby(CSpan x, double b, Span y) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(y.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < n; ++c) y[c] = x[c] + b * y[c];
}

void multiply(CSpan a, CSpan b, Span out) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < n; ++c) out[c] = a[c] * b[c];
}

int thread_count() { return omp_get_max_threads(); }

namespace serial {

double dot(const Grid&, CSpan a, CSpan b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) s += a[c] * b[c];
  return s;
}

double sum(const Grid& g, CSpan a) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c)
    if (g.inside(c)) s += a[c];
  return s;
}

// Edge-by-edge assembly: interior edges from the mask, boundary edges from the
// grid's edge list. Independent of the precomputed diagonal.
void dirichlet_apply(const Grid& g, CSpan u, Span out, double shift) {
  neumann_apply(g, u, out, shift);
  const double inv_h2 = 1.0 / (g.h() * g.h());
  for (const auto& e : g.boundary_edges()) out[e.cell] += u[e.cell] * inv_h2 / e.theta;
}

void neumann_apply(const Grid& g, CSpan u, Span out, double shift) {
  const double inv_h2 = 1.0 / (g.h() * g.h());
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c] = 0.0;
    if (!g.inside(c)) continue;
    for (int axis = 0; axis < 3; ++axis) {
      for (int sign : {-1, 1}) {
        const std::size_t n = c + sign * g.stride(axis);
        if (g.inside(n)) out[c] += (u[c] - u[n]) * inv_h2;
      }
    }
    out[c] += shift * u[c];
  }
}

void axpy(double a, CSpan x, Span y) {
  for (std::size_t c = 0; c < y.size(); ++c) y[c] += a * x[c];
}

void xpby(CSpan x, double b, Span y) {
  for (std::size_t c = 0; c < y.size(); ++c) y[c] = x[c] + b * y[c];
}

void multiply(CSpan a, CSpan b, Span out) {
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = a[c] * b[c];
}

}  // namespace serial

}  // namespace splab::kernels
