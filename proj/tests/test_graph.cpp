#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "near/graph.hpp"
#include "near/rng.hpp"

using namespace near;

namespace {

Graph complete_graph(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return Graph(n, edges);
}

Graph path_graph(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Graph(n, edges);
}

Graph cycle_graph(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return Graph(n, edges);
}

// The N=1 family graph: blacks {0,1}, whites {2,3}.
Graph prop1_n1_graph() { return Graph(4, {{0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}}); }

Graph random_graph(int n, double p, SplitMix64& rng) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.bernoulli(p)) edges.emplace_back(i, j);
  return Graph(n, edges);
}

// Brute-force oracles, deliberately independent of the library internals.
long long brute_triangles(const Graph& g) {
  long long count = 0;
  for (int i = 0; i < g.num_nodes(); ++i)
    for (int j = i + 1; j < g.num_nodes(); ++j)
      for (int k = j + 1; k < g.num_nodes(); ++k)
        if (g.has_edge(i, j) && g.has_edge(j, k) && g.has_edge(i, k)) ++count;
  return count;
}

std::vector<Edge> brute_inner_edges(const Graph& g, int v) {
  std::vector<int> members;
  for (int u = 0; u < g.num_nodes(); ++u)
    if (u != v && g.has_edge(u, v)) members.push_back(u);
  std::vector<Edge> inner;
  for (std::size_t a = 0; a < members.size(); ++a)
    for (std::size_t b = a + 1; b < members.size(); ++b)
      if (g.has_edge(members[a], members[b])) inner.emplace_back(members[a], members[b]);
  return inner;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  void merge(int a, int b) { parent[find(a)] = find(b); }
};

int union_find_components(const Graph& g) {
  UnionFind uf(g.num_nodes());
  for (const auto& [u, v] : g.edges()) uf.merge(u, v);
  int count = 0;
  for (int v = 0; v < g.num_nodes(); ++v)
    if (uf.find(v) == v) ++count;
  return count;
}

bool cycle_is_valid(const Graph& g, const std::vector<int>& cycle) {
  if (cycle.size() < 3) return false;
  std::vector<int> sorted = cycle;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
  for (std::size_t i = 0; i < cycle.size(); ++i)
    if (!g.has_edge(cycle[i], cycle[(i + 1) % cycle.size()])) return false;
  return true;
}

}  // namespace

TEST_CASE("graph construction validates input") {
  CHECK_THROWS_AS(Graph(3, {{0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Graph(3, {{0, 1}, {1, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Graph(3, {{0, 3}}), std::out_of_range);
  CHECK_THROWS_AS(Graph(3, {{-1, 0}}), std::out_of_range);

  Graph::CleanStats stats;
  const Graph g = Graph::cleaned(3, {{0, 1}, {1, 0}, {2, 2}, {0, 1}}, &stats);
  CHECK(g.num_edges() == 1);
  CHECK(stats.self_loops_dropped == 1);
  CHECK(stats.duplicates_dropped == 2);
}

TEST_CASE("neighborhood on the worked examples") {
  const Graph k3 = complete_graph(3);
  const auto view = neighborhood(k3, 0);
  CHECK(view.members == std::vector<int>{1, 2});
  CHECK(view.inner_edges == std::vector<Edge>{{1, 2}});

  const Graph path = path_graph(3);
  const auto mid = neighborhood(path, 1);
  CHECK(mid.members == std::vector<int>{0, 2});
  CHECK(mid.inner_edges.empty());

  const Graph g(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {2, 3}});
  const auto v0 = neighborhood(g, 0);
  CHECK(v0.members == std::vector<int>{1, 2, 3});
  CHECK(v0.inner_edges == std::vector<Edge>{{1, 2}, {2, 3}});

  CHECK_THROWS_AS(neighborhood(k3, 5), std::out_of_range);
}

TEST_CASE("restricted degree") {
  const Graph k4 = complete_graph(4);
  CHECK(restricted_degree(neighborhood(k4, 0), 1) == 2);

  const Graph path = path_graph(3);
  CHECK(restricted_degree(neighborhood(path, 1), 0) == 0);

  const Graph g(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {2, 3}});
  CHECK(restricted_degree(neighborhood(g, 0), 2) == 2);

  CHECK_THROWS_AS(restricted_degree(neighborhood(path, 1), 1), std::domain_error);
}

TEST_CASE("triangle count on known graphs") {
  CHECK(triangle_count(complete_graph(3)) == 1);
  CHECK(triangle_count(complete_graph(4)) == 4);
  CHECK(triangle_count(path_graph(6)) == 0);
}

TEST_CASE("global clustering coefficient") {
  CHECK(global_clustering_coefficient(complete_graph(3)) == doctest::Approx(1.0));
  const Graph star(4, {{0, 1}, {0, 2}, {0, 3}});
  CHECK(global_clustering_coefficient(star) == doctest::Approx(0.0));
  // Brute-force oracle for the N=1 family graph: 2 triangles, 8 triples.
  const Graph p1 = prop1_n1_graph();
  CHECK(brute_triangles(p1) == 2);
  CHECK(global_clustering_coefficient(p1) == doctest::Approx(0.75));
  // No connected triple at all.
  const Graph single_edge(2, {{0, 1}});
  CHECK(global_clustering_coefficient(single_edge) == 0.0);
}

TEST_CASE("cycle basis on known graphs") {
  CHECK(cycle_basis(path_graph(5)).empty());

  const auto c6 = cycle_basis(cycle_graph(6));
  REQUIRE(c6.size() == 1);
  CHECK(c6[0].size() == 6);

  const auto p1 = cycle_basis(prop1_n1_graph());
  REQUIRE(p1.size() == 2);
  CHECK(p1[0].size() == 3);
  CHECK(p1[1].size() == 3);
}

TEST_CASE("property: inner edges match the brute-force enumeration") {
  SplitMix64 rng(7);
  for (int round = 0; round < 60; ++round) {
    const int n = 2 + static_cast<int>(rng.next_below(14));
    const Graph g = random_graph(n, rng.uniform(0.05, 0.6), rng);
    for (int v = 0; v < n; ++v) {
      const auto view = neighborhood(g, v);
      CHECK(view.inner_edges == brute_inner_edges(g, v));
      for (int u : view.members) CHECK(g.has_edge(u, v));
    }
  }
}

TEST_CASE("property: sum of inner edge counts equals three times the triangles") {
  SplitMix64 rng(8);
  for (int round = 0; round < 40; ++round) {
    const int n = 3 + static_cast<int>(rng.next_below(15));
    const Graph g = random_graph(n, rng.uniform(0.05, 0.7), rng);
    long long inner_total = 0;
    for (int v = 0; v < n; ++v)
      inner_total += static_cast<long long>(neighborhood(g, v).inner_edges.size());
    CHECK(inner_total == 3 * triangle_count(g));
    CHECK(triangle_count(g) == brute_triangles(g));
  }
}

TEST_CASE("property: cycle basis size and simplicity on random graphs") {
  SplitMix64 rng(9);
  for (int round = 0; round < 40; ++round) {
    const int n = 2 + static_cast<int>(rng.next_below(16));
    const Graph g = random_graph(n, rng.uniform(0.05, 0.5), rng);
    const auto basis = cycle_basis(g);
    const int components = union_find_components(g);
    CHECK(static_cast<int>(basis.size()) == g.num_edges() - g.num_nodes() + components);
    CHECK(num_components(g) == components);
    for (const auto& cycle : basis) CHECK(cycle_is_valid(g, cycle));
  }
}

TEST_CASE("property: clustering coefficient stays in range") {
  SplitMix64 rng(10);
  for (int round = 0; round < 40; ++round) {
    const int n = 3 + static_cast<int>(rng.next_below(12));
    const Graph g = random_graph(n, rng.uniform(0.0, 1.0), rng);
    const double cc = global_clustering_coefficient(g);
    CHECK(cc >= 0.0);
    CHECK(cc <= 1.0);
  }
  for (int n = 3; n <= 8; ++n)
    CHECK(global_clustering_coefficient(complete_graph(n)) == doctest::Approx(1.0));
}

TEST_CASE("neighborhood output is independent of edge insertion order") {
  SplitMix64 rng(11);
  std::vector<Edge> edges{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {2, 3}, {3, 4}, {1, 4}};
  const Graph reference(5, edges);
  for (int round = 0; round < 10; ++round) {
    for (std::size_t i = edges.size(); i > 1; --i)
      std::swap(edges[i - 1], edges[rng.next_below(i)]);
    const Graph shuffled(5, edges);
    CHECK(shuffled == reference);
    for (int v = 0; v < 5; ++v) {
      CHECK(neighborhood(shuffled, v).members == neighborhood(reference, v).members);
      CHECK(neighborhood(shuffled, v).inner_edges == neighborhood(reference, v).inner_edges);
    }
  }
}

TEST_CASE("edge list serialization round trip") {
  const Graph g = prop1_n1_graph();
  std::stringstream buffer;
  write_edge_list(g, buffer);
  const Graph back = read_edge_list(buffer);
  CHECK(back == g);

  std::stringstream broken("4 3\n0 1\n");
  CHECK_THROWS_AS(read_edge_list(broken), std::runtime_error);
}
