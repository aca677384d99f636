#include "near/graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>

namespace near {

namespace {

Edge canonical(int u, int v) { return u < v ? Edge{u, v} : Edge{v, u}; }

void check_range(int node, int num_nodes) {
  if (node < 0 || node >= num_nodes)
    throw std::out_of_range("graph: node index " + std::to_string(node) +
                            " out of range [0, " + std::to_string(num_nodes) + ")");
}

}  // namespace

Graph::Graph(int num_nodes, const std::vector<Edge>& edges) : num_nodes_(num_nodes) {
  if (num_nodes < 0) throw std::invalid_argument("graph: negative node count");
  edges_.reserve(edges.size());
  for (const auto& [u, v] : edges) {
    check_range(u, num_nodes);
    check_range(v, num_nodes);
    if (u == v)
      throw std::invalid_argument("graph: self-loop at node " + std::to_string(u));
    edges_.push_back(canonical(u, v));
  }
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
    throw std::invalid_argument("graph: duplicate edge");
  build_adjacency();
}

Graph Graph::cleaned(int num_nodes, const std::vector<Edge>& edges, CleanStats* stats) {
  CleanStats local;
  std::vector<Edge> kept;
  kept.reserve(edges.size());
  for (const auto& [u, v] : edges) {
    check_range(u, num_nodes);
    check_range(v, num_nodes);
    if (u == v) {
      ++local.self_loops_dropped;
      continue;
    }
    kept.push_back(canonical(u, v));
  }
  std::sort(kept.begin(), kept.end());
  auto last = std::unique(kept.begin(), kept.end());
  local.duplicates_dropped = static_cast<int>(kept.end() - last);
  kept.erase(last, kept.end());
  if (stats) *stats = local;
  return Graph(num_nodes, kept);
}

void Graph::build_adjacency() {
  adj_.assign(num_nodes_, {});
  for (const auto& [u, v] : edges_) {
    adj_[u].push_back(v);
    adj_[v].push_back(u);
  }
  for (auto& list : adj_) std::sort(list.begin(), list.end());
}

const std::vector<int>& Graph::neighbors(int v) const {
  check_range(v, num_nodes_);
  return adj_[v];
}

int Graph::degree(int v) const { return static_cast<int>(neighbors(v).size()); }

bool Graph::has_edge(int u, int v) const {
  check_range(u, num_nodes_);
  check_range(v, num_nodes_);
  const auto& list = adj_[u];
  return std::binary_search(list.begin(), list.end(), v);
}

NeighborhoodView neighborhood(const Graph& g, int v) {
  NeighborhoodView view;
  view.center = v;
  view.members = g.neighbors(v);
  for (int i : view.members) {
    for (int j : g.neighbors(i)) {
      if (j <= i) continue;
      if (std::binary_search(view.members.begin(), view.members.end(), j))
        view.inner_edges.emplace_back(i, j);
    }
  }
  std::sort(view.inner_edges.begin(), view.inner_edges.end());
  return view;
}

int restricted_degree(const NeighborhoodView& view, int i) {
  if (!std::binary_search(view.members.begin(), view.members.end(), i))
    throw std::domain_error("restricted_degree: node " + std::to_string(i) +
                            " is not in the neighborhood of " + std::to_string(view.center));
  int count = 0;
  for (const auto& [a, b] : view.inner_edges)
    if (a == i || b == i) ++count;
  return count;
}

long long triangle_count(const Graph& g) {
  long long common = 0;
  for (const auto& [u, v] : g.edges()) {
    const auto& nu = g.neighbors(u);
    const auto& nv = g.neighbors(v);
    std::size_t i = 0, j = 0;
    while (i < nu.size() && j < nv.size()) {
      if (nu[i] < nv[j]) {
        ++i;
      } else if (nu[i] > nv[j]) {
        ++j;
      } else {
        ++common;
        ++i;
        ++j;
      }
    }
  }
  return common / 3;  // each triangle has one common neighbor per edge
}

double global_clustering_coefficient(const Graph& g) {
  long long triples = 0;
  for (int v = 0; v < g.num_nodes(); ++v) {
    const long long d = g.degree(v);
    triples += d * (d - 1) / 2;
  }
  if (triples == 0) return 0.0;
  return 3.0 * static_cast<double>(triangle_count(g)) / static_cast<double>(triples);
}

std::vector<std::vector<int>> cycle_basis(const Graph& g) {
  const int n = g.num_nodes();
  std::vector<int> parent(n, -1), depth(n, 0);
  std::vector<char> visited(n, 0);

  for (int root = 0; root < n; ++root) {
    if (visited[root]) continue;
    visited[root] = 1;
    std::queue<int> frontier;
    frontier.push(root);
    while (!frontier.empty()) {
      int u = frontier.front();
      frontier.pop();
      for (int w : g.neighbors(u)) {
        if (visited[w]) continue;
        visited[w] = 1;
        parent[w] = u;
        depth[w] = depth[u] + 1;
        frontier.push(w);
      }
    }
  }

  std::vector<std::vector<int>> cycles;
  for (const auto& [u, v] : g.edges()) {
    if (parent[u] == v || parent[v] == u) continue;  // tree edge
    // Walk both endpoints up to their lowest common ancestor.
    std::vector<int> path_u{u}, path_v{v};
    int a = u, b = v;
    while (depth[a] > depth[b]) {
      a = parent[a];
      path_u.push_back(a);
    }
    while (depth[b] > depth[a]) {
      b = parent[b];
      path_v.push_back(b);
    }
    while (a != b) {
      a = parent[a];
      path_u.push_back(a);
      b = parent[b];
      path_v.push_back(b);
    }
    // path_u ends at the LCA; append path_v reversed, excluding the LCA.
    std::vector<int> cycle = path_u;
    for (auto it = path_v.rbegin() + 1; it != path_v.rend(); ++it) cycle.push_back(*it);
    cycles.push_back(std::move(cycle));
  }
  return cycles;
}

int num_components(const Graph& g) {
  const int n = g.num_nodes();
  std::vector<char> visited(n, 0);
  int components = 0;
  for (int root = 0; root < n; ++root) {
    if (visited[root]) continue;
    ++components;
    std::queue<int> frontier;
    frontier.push(root);
    visited[root] = 1;
    while (!frontier.empty()) {
      int u = frontier.front();
      frontier.pop();
      for (int w : g.neighbors(u))
        if (!visited[w]) {
          visited[w] = 1;
          frontier.push(w);
        }
    }
  }
  return components;
}

void write_edge_list(const Graph& g, std::ostream& out) {
  out << g.num_nodes() << ' ' << g.num_edges() << '\n';
  for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

Graph read_edge_list(std::istream& in) {
  int num_nodes = 0, num_edges = 0;
  if (!(in >> num_nodes >> num_edges))
    throw std::runtime_error("edge list: malformed header");
  std::vector<Edge> edges;
  edges.reserve(num_edges);
  for (int i = 0; i < num_edges; ++i) {
    int u = 0, v = 0;
    if (!(in >> u >> v))
      throw std::runtime_error("edge list: expected " + std::to_string(num_edges) +
                               " edges, got " + std::to_string(i));
    edges.emplace_back(u, v);
  }
  return Graph(num_nodes, edges);
}

}  // namespace near
