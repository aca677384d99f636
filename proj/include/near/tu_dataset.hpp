#pragma once

#include <string>
#include <vector>

#include "near/graph.hpp"
#include "near/matrix.hpp"

namespace near {

// A TU-Dortmund-format dataset as loaded from disk: per-graph topology,
// class labels remapped to 0..C-1 (sorted original order preserved), and
// optional node labels / attributes.
struct RawTuDataset {
  std::string name;
  std::vector<Graph> graphs;
  std::vector<int> graph_labels;
  std::vector<int> class_original_labels;
  bool has_node_labels = false;
  std::vector<std::vector<int>> node_labels;
  bool has_node_attributes = false;
  std::vector<Matrix> node_attributes;
  Graph::CleanStats clean_stats;

  int num_classes() const { return static_cast<int>(class_original_labels.size()); }
};

// Reads {name}_A.txt, {name}_graph_indicator.txt, {name}_graph_labels.txt
// (mandatory) and {name}_node_labels.txt / {name}_node_attributes.txt when
// present. Edge endpoints are 1-based global node ids; they are remapped to
// per-graph 0-based ids, reversed duplicates are merged and self-loops
// dropped (counted in clean_stats). Missing mandatory files and
// indicator/edge inconsistencies throw std::runtime_error naming the file
// (and line).
RawTuDataset load_tu_dataset(const std::string& directory, const std::string& name);

enum class FeatureBlock { OneHotLabel, RawAttributes, OneHotDegree, DummyConstant };

FeatureBlock feature_block_from_string(const std::string& s);
std::string to_string(FeatureBlock b);

struct FeatureRecipe {
  std::vector<FeatureBlock> blocks;
  // One-hot degree cap; -1 means the max degree observed in the dataset.
  // Degrees above the cap are clipped to it.
  int degree_cap = -1;
};

// Labels and attributes when the dataset has them, a dummy constant column
// otherwise, plus the one-hot degree block.
FeatureRecipe default_recipe(const RawTuDataset& raw);

struct DatasetBundle {
  std::string name;
  std::vector<Graph> graphs;
  std::vector<int> graph_labels;
  std::vector<Matrix> node_features;
  int num_classes = 0;
  int feature_dim = 0;
  FeatureRecipe recipe;
};

// Builds per-node feature matrices from the recipe blocks, in block order.
// One-hot label alphabet is the sorted set observed across the whole dataset;
// attributes are passed through unmodified.
DatasetBundle encode_node_features(const RawTuDataset& raw, const FeatureRecipe& recipe);

}  // namespace near
