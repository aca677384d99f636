#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "near/graph.hpp"
#include "near/matrix.hpp"
#include "near/multiset.hpp"
#include "near/rng.hpp"

namespace near {

enum class NodeColor : std::uint8_t { Black, White };

// A member of the adversarial family: 2N degree-3 black nodes (two white
// neighbors and one black), 2N degree-2 white nodes (two black neighbors).
// |V| = 4N, |E| = 5N. Indistinguishable by any 1-hop aggregator.
struct FamilyGraph {
  Graph graph;
  std::vector<NodeColor> colors;
  int n_param = 0;
};

// Intermediate state of the constructive generator: the multiset of black
// nodes with remaining attachment slots (multiplicity <= 2) and the next
// white node to wire up.
struct GeneratorState {
  Multiset<int> pending_stubs;
  int next_white = 0;
};

// Builds a random family member for the given N. Black nodes are 0..2N-1
// (partners (2k, 2k+1) joined by an edge), white nodes 2N..4N-1. Each white
// consumes two distinct black stubs; the final four stubs are resolved by
// the three terminal cases. Throws std::domain_error for n < 1.
FamilyGraph generate_family_graph(int n, SplitMix64& rng);

// Checks every family condition; returns one message per violation
// (empty result = pass). Violations are data, not errors.
std::vector<std::string> verify_family(const FamilyGraph& fg);

struct SamplerConfig {
  int count = 1;
  double poisson_mean = 2.0;
  std::uint64_t seed = 0;
};

// count graphs with N = 1 + Poisson(poisson_mean). Each graph draws from its
// own RNG substream, so parallel generation is bit-identical to serial.
std::vector<FamilyGraph> sample_dataset(const SamplerConfig& cfg);

// 1 iff the global clustering coefficient reaches the threshold.
int label_artfcc(const Graph& g, double threshold = 0.2);

// 1 iff the BFS fundamental cycle basis contains a cycle of length >= 6.
int label_artfcycle6(const Graph& g);

// One-hot rows: black -> (1, 0), white -> (0, 1).
Matrix initial_features(const FamilyGraph& fg);

// Colors implied by degree (3 -> black, 2 -> white) for graphs reloaded from
// edge-list files. Any other degree is reported by verify_family afterwards;
// such nodes default to white here.
std::vector<NodeColor> infer_colors_by_degree(const Graph& g);

std::size_t count_color(const std::vector<NodeColor>& colors, NodeColor c);

}  // namespace near
