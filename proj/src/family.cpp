#include "near/family.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace near {

namespace {

// Removes two distinct black-node values from the stub multiset, chosen
// uniformly without replacement among the distinct values present.
std::pair<int, int> draw_two_distinct(GeneratorState& state, SplitMix64& rng) {
  std::vector<int> values = state.pending_stubs.distinct_values();
  const std::size_t i = rng.next_below(values.size());
  const int a = values[i];
  values.erase(values.begin() + i);
  const int b = values[rng.next_below(values.size())];
  state.pending_stubs.remove_one(a);
  state.pending_stubs.remove_one(b);
  return {a, b};
}

void attach_white(std::vector<Edge>& edges, int white, int black_a, int black_b) {
  edges.emplace_back(black_a, white);
  edges.emplace_back(black_b, white);
}

}  // namespace

FamilyGraph generate_family_graph(int n, SplitMix64& rng) {
  if (n < 1) throw std::domain_error("generate_family_graph: n must be >= 1");
  const int num_black = 2 * n;
  const int num_nodes = 4 * n;

  std::vector<Edge> edges;
  edges.reserve(5 * n);
  for (int k = 0; k < n; ++k) edges.emplace_back(2 * k, 2 * k + 1);

  GeneratorState state;
  for (int b = 0; b < num_black; ++b) state.pending_stubs.add(b, 2);
  state.next_white = num_black;

  while (state.pending_stubs.total_size() > 4) {
    auto [a, b] = draw_two_distinct(state, rng);
    attach_white(edges, state.next_white++, a, b);
  }

  // Terminal cases for the last four stubs over two remaining whites.
  const std::vector<int> values = state.pending_stubs.distinct_values();
  const int w1 = state.next_white;
  const int w2 = state.next_white + 1;
  if (values.size() == 2) {  // {p,p,q,q}
    attach_white(edges, w1, values[0], values[1]);
    attach_white(edges, w2, values[0], values[1]);
  } else if (values.size() == 3) {  // {p,p,q,r}
    int p = -1;
    std::vector<int> singles;
    for (int v : values) {
      if (state.pending_stubs.multiplicity(v) == 2)
        p = v;
      else
        singles.push_back(v);
    }
    attach_white(edges, w1, p, singles[0]);
    attach_white(edges, w2, p, singles[1]);
  } else {  // four distinct: random 2 + 2 split
    std::vector<int> pool = values;
    const std::size_t i = rng.next_below(pool.size());
    const int a = pool[i];
    pool.erase(pool.begin() + i);
    const std::size_t j = rng.next_below(pool.size());
    const int b = pool[j];
    pool.erase(pool.begin() + j);
    attach_white(edges, w1, a, b);
    attach_white(edges, w2, pool[0], pool[1]);
  }

  FamilyGraph fg;
  fg.graph = Graph(num_nodes, edges);
  fg.colors.assign(num_nodes, NodeColor::White);
  std::fill(fg.colors.begin(), fg.colors.begin() + num_black, NodeColor::Black);
  fg.n_param = n;
  return fg;
}

std::vector<std::string> verify_family(const FamilyGraph& fg) {
  std::vector<std::string> violations;
  const Graph& g = fg.graph;
  const int n = fg.n_param;

  if (n < 1) {
    violations.push_back("n_param must be >= 1");
    return violations;
  }
  if (fg.colors.size() != std::size_t(g.num_nodes())) {
    violations.push_back("color list length does not match node count");
    return violations;
  }
  if (g.num_nodes() != 4 * n)
    violations.push_back("|V| != 4N (" + std::to_string(g.num_nodes()) + " vs " +
                         std::to_string(4 * n) + ")");
  if (g.num_edges() != 5 * n)
    violations.push_back("|E| != 5N (" + std::to_string(g.num_edges()) + " vs " +
                         std::to_string(5 * n) + ")");

  const std::size_t blacks = count_color(fg.colors, NodeColor::Black);
  const std::size_t whites = count_color(fg.colors, NodeColor::White);
  if (blacks != std::size_t(2 * n))
    violations.push_back("black node count != 2N (" + std::to_string(blacks) + ")");
  if (whites != std::size_t(2 * n))
    violations.push_back("white node count != 2N (" + std::to_string(whites) + ")");

  for (int v = 0; v < g.num_nodes(); ++v) {
    int black_neighbors = 0, white_neighbors = 0;
    for (int u : g.neighbors(v))
      (fg.colors[u] == NodeColor::Black ? black_neighbors : white_neighbors)++;

    if (fg.colors[v] == NodeColor::White) {
      if (g.degree(v) != 2)
        violations.push_back("white node " + std::to_string(v) + " has degree " +
                             std::to_string(g.degree(v)) + " != 2");
      if (white_neighbors != 0)
        violations.push_back("white node " + std::to_string(v) + " has a white neighbor");
    } else {
      if (g.degree(v) != 3)
        violations.push_back("black node " + std::to_string(v) + " has degree " +
                             std::to_string(g.degree(v)) + " != 3");
      if (black_neighbors == 0)
        violations.push_back("black node " + std::to_string(v) + " lacks a black neighbor");
      else if (black_neighbors != 1 || white_neighbors != 2)
        violations.push_back("black node " + std::to_string(v) + " has neighbor colors " +
                             std::to_string(black_neighbors) + " black / " +
                             std::to_string(white_neighbors) + " white (want 1/2)");
    }
  }
  return violations;
}

std::vector<FamilyGraph> sample_dataset(const SamplerConfig& cfg) {
  if (cfg.count < 1) throw std::invalid_argument("sample_dataset: count must be >= 1");
  if (!(cfg.poisson_mean > 0.0))
    throw std::invalid_argument("sample_dataset: poisson_mean must be positive");

  std::vector<FamilyGraph> out(cfg.count);
  const SplitMix64 master(cfg.seed);
  bool failed = false;
#pragma omp parallel for schedule(dynamic, 16)
  for (int i = 0; i < cfg.count; ++i) {
    SplitMix64 rng = master.split(i);
    try {
      const int n = 1 + rng.poisson(cfg.poisson_mean);
      out[i] = generate_family_graph(n, rng);
    } catch (...) {
#pragma omp atomic write
      failed = true;
    }
  }
  if (failed) throw std::runtime_error("sample_dataset: generation failed");
  return out;
}

int label_artfcc(const Graph& g, double threshold) {
  return global_clustering_coefficient(g) >= threshold ? 1 : 0;
}

int label_artfcycle6(const Graph& g) {
  for (const auto& cycle : cycle_basis(g))
    if (cycle.size() >= 6) return 1;
  return 0;
}

Matrix initial_features(const FamilyGraph& fg) {
  Matrix h(fg.graph.num_nodes(), 2);
  for (int v = 0; v < fg.graph.num_nodes(); ++v)
    h(v, fg.colors[v] == NodeColor::Black ? 0 : 1) = 1.0;
  return h;
}

std::vector<NodeColor> infer_colors_by_degree(const Graph& g) {
  std::vector<NodeColor> colors(g.num_nodes(), NodeColor::White);
  for (int v = 0; v < g.num_nodes(); ++v)
    if (g.degree(v) == 3) colors[v] = NodeColor::Black;
  return colors;
}

std::size_t count_color(const std::vector<NodeColor>& colors, NodeColor c) {
  return std::count(colors.begin(), colors.end(), c);
}

}  // namespace near
