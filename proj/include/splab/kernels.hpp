#pragma once

// Grid kernels. The default versions are OpenMP-parallel over the outermost
// grid axis; reductions accumulate one partial sum per x-plane and combine the
// planes in order, so results do not depend on the thread count. The
// `serial` namespace holds straightforward single-loop references used by the
// tests and the benchmark.

#include <span>

#include "splab/grid.hpp"

namespace splab::kernels {

using CSpan = std::span<const double>;
using Span = std::span<double>;

double dot(const Grid& g, CSpan a, CSpan b);
double sum(const Grid& g, CSpan a);

/// out = (-Delta_h + shift) u on masked-in cells, 0 elsewhere. Dirichlet data
/// sits on the analytic boundary.
void dirichlet_apply(const Grid& g, CSpan u, Span out, double shift = 0.0);

/// out = (-Delta_N + shift) u with only interior edges (no boundary condition).
void neumann_apply(const Grid& g, CSpan u, Span out, double shift = 0.0);

/// y += a * x
void axpy(double a, CSpan x, Span y);
/// y = x + b * y
void xpby(CSpan x, double b, Span y);
/// out = a .* b
void multiply(CSpan a, CSpan b, Span out);

/// Number of worker threads the parallel kernels will use.
int thread_count();

namespace serial {

double dot(const Grid& g, CSpan a, CSpan b);
double sum(const Grid& g, CSpan a);
void dirichlet_apply(const Grid& g, CSpan u, Span out, double shift = 0.0);
void neumann_apply(const Grid& g, CSpan u, Span out, double shift = 0.0);
void axpy(double a, CSpan x, Span y);
void xpby(CSpan x, double b, Span y);
void multiply(CSpan a, CSpan b, Span out);

}  // namespace serial

}  // namespace splab::kernels
