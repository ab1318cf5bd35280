// Serial reference kernels against the OpenMP ones on a box grid.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "splab/kernels.hpp"

using namespace splab;

namespace {

double best_of(int reps, const std::function<void()>& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const double cpu = argc > 1 ? std::atof(argv[1]) : 32.0;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 20;
  auto g = build_grid(DomainSpec(shapes::Ball{{}, 1.0}), cpu, 1);
  std::vector<double> u(g->size()), v(g->size()), out(g->size()), ref(g->size());
  for (std::size_t c = 0; c < g->size(); ++c) {
    const Vec3 x = g->center(c);
    u[c] = g->inside(c) ? std::sin(3 * x.x) * std::cos(2 * x.y) + x.z : 0.0;
    v[c] = g->inside(c) ? std::exp(-dot(x, x)) : 0.0;
  }
  std::printf("grid %zu cells, %d threads\n", g->size(), kernels::thread_count());
  std::printf("%-16s %12s %12s %9s %12s\n", "kernel", "serial [ms]", "openmp [ms]", "speedup", "max diff");

  auto row = [&](const char* name, const std::function<void()>& s, const std::function<void()>& p, double diff) {
    const double ts = best_of(reps, s), tp = best_of(reps, p);
    std::printf("%-16s %12.3f %12.3f %9.2f %12.3g\n", name, 1e3 * ts, 1e3 * tp, ts / tp, diff);
  };
  auto max_diff = [&] {
    double d = 0.0;
    for (std::size_t c = 0; c < out.size(); ++c) d = std::max(d, std::abs(out[c] - ref[c]));
    return d;
  };

  kernels::serial::dirichlet_apply(*g, u, ref, 0.5);
  kernels::dirichlet_apply(*g, u, out, 0.5);
  row("dirichlet_apply", [&] { kernels::serial::dirichlet_apply(*g, u, ref, 0.5); },
      [&] { kernels::dirichlet_apply(*g, u, out, 0.5); }, max_diff());

  kernels::serial::neumann_apply(*g, u, ref, 1.0);
  kernels::neumann_apply(*g, u, out, 1.0);
  row("neumann_apply", [&] { kernels::serial::neumann_apply(*g, u, ref, 1.0); },
      [&] { kernels::neumann_apply(*g, u, out, 1.0); }, max_diff());

  double ds = 0.0, dp = 0.0;
  row("dot", [&] { ds = kernels::serial::dot(*g, u, v); }, [&] { dp = kernels::dot(*g, u, v); }, std::abs(ds - dp));
  row("sum", [&] { ds = kernels::serial::sum(*g, u); }, [&] { dp = kernels::sum(*g, u); }, std::abs(ds - dp));

  ref = v;
  out = v;
  row("axpy", [&] { kernels::serial::axpy(1e-3, u, ref); }, [&] { kernels::axpy(1e-3, u, out); }, max_diff());
  row("multiply", [&] { kernels::serial::multiply(u, v, ref); }, [&] { kernels::multiply(u, v, out); }, max_diff());
  return 0;
}
