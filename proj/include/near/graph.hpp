#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

namespace near {

// Unordered edge, stored canonically as (min, max).
using Edge = std::pair<int, int>;

// Undirected simple graph. Immutable after construction; adjacency lists are
// sorted ascending and the edge list is canonical (u < v, lexicographic), so
// every derived quantity is independent of edge insertion order.
class Graph {
 public:
  Graph() = default;

  // Strict constructor: throws on out-of-range endpoints, self-loops and
  // duplicate edges.
  Graph(int num_nodes, const std::vector<Edge>& edges);

  struct CleanStats {
    int self_loops_dropped = 0;
    int duplicates_dropped = 0;
  };

  // Lenient factory for file loaders: drops self-loops and duplicates,
  // counting them instead of throwing.
  static Graph cleaned(int num_nodes, const std::vector<Edge>& edges,
                       CleanStats* stats = nullptr);

  int num_nodes() const { return num_nodes_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int v) const;
  int degree(int v) const;
  bool has_edge(int u, int v) const;

  bool operator==(const Graph&) const = default;

 private:
  void build_adjacency();

  int num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adj_;
};

// 1-hop neighborhood of `center` together with the edges that connect
// neighborhood members to each other (the center is excluded).
struct NeighborhoodView {
  int center = -1;
  std::vector<int> members;       // ascending
  std::vector<Edge> inner_edges;  // canonical, lexicographic
};

NeighborhoodView neighborhood(const Graph& g, int v);

// Number of `i`'s neighbors inside the view. Throws std::domain_error when
// i is not a member.
int restricted_degree(const NeighborhoodView& view, int i);

long long triangle_count(const Graph& g);

// Transitivity: 3 * triangles / connected triples. Graphs with no connected
// triple map to 0.
double global_clustering_coefficient(const Graph& g);

// Fundamental cycle basis from a BFS spanning forest rooted at the smallest
// node index of each component, neighbors visited in ascending order. Each
// cycle is a simple node sequence; the closing edge is implied. Basis size is
// |E| - |V| + #components.
std::vector<std::vector<int>> cycle_basis(const Graph& g);

int num_components(const Graph& g);

// Plain-text edge-list format: "num_nodes num_edges" then one "u v" per line.
void write_edge_list(const Graph& g, std::ostream& out);
Graph read_edge_list(std::istream& in);

}  // namespace near
