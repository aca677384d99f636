// Compares the serial reference kernels against the OpenMP production
// kernels: wall time, speedup, and max deviation (expected exactly 0, since
// the parallel kernels keep the per-element operation order).

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "near/graph.hpp"
#include "near/matrix.hpp"
#include "near/near_ops.hpp"
#include "near/rng.hpp"

using namespace near;

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

template <typename F>
double time_ms(F&& fn, int repeats) {
  const double t0 = now_ms();
  for (int r = 0; r < repeats; ++r) fn();
  return (now_ms() - t0) / repeats;
}

Graph random_graph(int nodes, int avg_degree, SplitMix64& rng) {
  std::vector<Edge> edges;
  const long long target = static_cast<long long>(nodes) * avg_degree / 2;
  for (long long i = 0; i < target; ++i) {
    const int u = static_cast<int>(rng.next_below(nodes));
    const int v = static_cast<int>(rng.next_below(nodes));
    if (u != v) edges.emplace_back(u, v);
  }
  Graph::CleanStats stats;
  return Graph::cleaned(nodes, edges, &stats);
}

void report(const char* name, double serial_ms, double parallel_ms, double deviation) {
  std::printf("%-24s serial %9.2f ms   openmp %9.2f ms   speedup %5.2fx   max|diff| %g\n",
              name, serial_ms, parallel_ms, serial_ms / parallel_ms, deviation);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both columns run serial code\n");
#endif

  SplitMix64 rng(12345);

  {
    const int n = 384;
    const Matrix a = Matrix::random_uniform(n, n, -1.0, 1.0, rng);
    const Matrix b = Matrix::random_uniform(n, n, -1.0, 1.0, rng);
    Matrix ref, out;
    const double ts = time_ms([&] { ref = serial::matmul(a, b); }, 5);
    const double tp = time_ms([&] { out = matmul(a, b); }, 5);
    report("matmul 384x384", ts, tp, max_abs_diff(ref, out));
  }

  {
    Graph g = random_graph(20000, 16, rng);
    const Matrix h = Matrix::random_uniform(g.num_nodes(), 64, -1.0, 1.0, rng);
    Matrix ref, out;
    const double ts = time_ms([&] { ref = serial::aggregate_neighbors_sum(g, h); }, 5);
    const double tp = time_ms([&] { out = aggregate_neighbors_sum(g, h); }, 5);
    report("neighbor sum 20k nodes", ts, tp, max_abs_diff(ref, out));
  }

  {
    Graph g = random_graph(4000, 24, rng);
    const Matrix h = Matrix::random_uniform(g.num_nodes(), 64, -1.0, 1.0, rng);
    for (const NearVariant variant : {NearVariant::C, NearVariant::E, NearVariant::M}) {
      Matrix ref, out;
      const double ts = time_ms([&] { ref = serial::near_batch(g, h, variant); }, 3);
      const double tp = time_ms([&] { out = near_batch(g, h, variant); }, 3);
      char label[64];
      std::snprintf(label, sizeof label, "near-%s 4k nodes", to_string(variant).c_str());
      report(label, ts, tp, max_abs_diff(ref, out));
    }
  }

  return 0;
}
