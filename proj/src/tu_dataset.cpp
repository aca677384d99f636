#include "near/tu_dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace near {

namespace {

std::string path_join(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

// Splits a TU line on commas and/or whitespace.
std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string token;
  for (char ch : line) {
    if (ch == ',' || ch == ' ' || ch == '\t' || ch == '\r') {
      if (!token.empty()) fields.push_back(std::move(token));
      token.clear();
    } else {
      token.push_back(ch);
    }
  }
  if (!token.empty()) fields.push_back(std::move(token));
  return fields;
}

std::vector<std::string> read_lines(const std::string& path, bool mandatory) {
  std::ifstream in(path);
  if (!in) {
    if (mandatory) throw std::runtime_error("load error: missing file " + path);
    return {};
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  // trailing blank lines are common in the published archives
  while (!lines.empty() && split_fields(lines.back()).empty()) lines.pop_back();
  return lines;
}

int parse_int(const std::string& token, const std::string& path, std::size_t line_no) {
  try {
    return std::stoi(token);
  } catch (const std::exception&) {
    throw std::runtime_error("format error: " + path + " line " + std::to_string(line_no) +
                             ": expected integer, got '" + token + "'");
  }
}

}  // namespace

FeatureBlock feature_block_from_string(const std::string& s) {
  if (s == "labels") return FeatureBlock::OneHotLabel;
  if (s == "attributes") return FeatureBlock::RawAttributes;
  if (s == "degree") return FeatureBlock::OneHotDegree;
  if (s == "dummy") return FeatureBlock::DummyConstant;
  throw std::invalid_argument("unknown feature block '" + s +
                              "' (want labels|attributes|degree|dummy)");
}

std::string to_string(FeatureBlock b) {
  switch (b) {
    case FeatureBlock::OneHotLabel: return "labels";
    case FeatureBlock::RawAttributes: return "attributes";
    case FeatureBlock::OneHotDegree: return "degree";
    case FeatureBlock::DummyConstant: return "dummy";
  }
  return "?";
}

RawTuDataset load_tu_dataset(const std::string& directory, const std::string& name) {
  RawTuDataset raw;
  raw.name = name;

  const std::string indicator_path = path_join(directory, name + "_graph_indicator.txt");
  const std::string edges_path = path_join(directory, name + "_A.txt");
  const std::string labels_path = path_join(directory, name + "_graph_labels.txt");

  const auto indicator_lines = read_lines(indicator_path, true);
  const auto edge_lines = read_lines(edges_path, true);
  const auto label_lines = read_lines(labels_path, true);

  const int num_nodes_total = static_cast<int>(indicator_lines.size());
  const int num_graphs = static_cast<int>(label_lines.size());

  // Node -> graph assignment; local ids in file order within each graph.
  std::vector<int> graph_of_node(num_nodes_total);
  std::vector<int> local_id(num_nodes_total);
  std::vector<int> graph_size(num_graphs, 0);
  for (int i = 0; i < num_nodes_total; ++i) {
    const auto fields = split_fields(indicator_lines[i]);
    if (fields.size() != 1)
      throw std::runtime_error("format error: " + indicator_path + " line " +
                               std::to_string(i + 1) + ": expected one graph id");
    const int gid = parse_int(fields[0], indicator_path, i + 1);
    if (gid < 1 || gid > num_graphs)
      throw std::runtime_error("format error: " + indicator_path + " line " +
                               std::to_string(i + 1) + ": graph id " + std::to_string(gid) +
                               " out of range 1.." + std::to_string(num_graphs));
    graph_of_node[i] = gid - 1;
    local_id[i] = graph_size[gid - 1]++;
  }

  // Edges, remapped per graph.
  std::vector<std::vector<Edge>> edges(num_graphs);
  for (std::size_t ln = 0; ln < edge_lines.size(); ++ln) {
    const auto fields = split_fields(edge_lines[ln]);
    if (fields.empty()) continue;
    if (fields.size() != 2)
      throw std::runtime_error("format error: " + edges_path + " line " +
                               std::to_string(ln + 1) + ": expected 'u, v'");
    const int gu = parse_int(fields[0], edges_path, ln + 1);
    const int gv = parse_int(fields[1], edges_path, ln + 1);
    if (gu < 1 || gu > num_nodes_total || gv < 1 || gv > num_nodes_total)
      throw std::runtime_error("format error: " + edges_path + " line " +
                               std::to_string(ln + 1) + ": node id out of range");
    const int u = gu - 1, v = gv - 1;
    if (graph_of_node[u] != graph_of_node[v])
      throw std::runtime_error("format error: " + edges_path + " line " +
                               std::to_string(ln + 1) +
                               ": edge endpoints belong to different graphs");
    edges[graph_of_node[u]].emplace_back(local_id[u], local_id[v]);
  }

  raw.graphs.reserve(num_graphs);
  for (int g = 0; g < num_graphs; ++g) {
    Graph::CleanStats stats;
    raw.graphs.push_back(Graph::cleaned(graph_size[g], edges[g], &stats));
    raw.clean_stats.self_loops_dropped += stats.self_loops_dropped;
    raw.clean_stats.duplicates_dropped += stats.duplicates_dropped;
  }

  // Graph labels remapped to 0..C-1, preserving sorted original order.
  std::vector<int> originals(num_graphs);
  std::set<int> unique_labels;
  for (int g = 0; g < num_graphs; ++g) {
    const auto fields = split_fields(label_lines[g]);
    if (fields.size() != 1)
      throw std::runtime_error("format error: " + labels_path + " line " +
                               std::to_string(g + 1) + ": expected one label");
    originals[g] = parse_int(fields[0], labels_path, g + 1);
    unique_labels.insert(originals[g]);
  }
  raw.class_original_labels.assign(unique_labels.begin(), unique_labels.end());
  std::map<int, int> remap;
  for (std::size_t c = 0; c < raw.class_original_labels.size(); ++c)
    remap[raw.class_original_labels[c]] = static_cast<int>(c);
  raw.graph_labels.resize(num_graphs);
  for (int g = 0; g < num_graphs; ++g) raw.graph_labels[g] = remap[originals[g]];

  // Optional node labels.
  const std::string node_labels_path = path_join(directory, name + "_node_labels.txt");
  const auto node_label_lines = read_lines(node_labels_path, false);
  if (!node_label_lines.empty()) {
    if (node_label_lines.size() != std::size_t(num_nodes_total))
      throw std::runtime_error("format error: " + node_labels_path + ": has " +
                               std::to_string(node_label_lines.size()) + " lines for " +
                               std::to_string(num_nodes_total) + " nodes");
    raw.has_node_labels = true;
    raw.node_labels.resize(num_graphs);
    for (int g = 0; g < num_graphs; ++g) raw.node_labels[g].resize(graph_size[g]);
    for (int i = 0; i < num_nodes_total; ++i) {
      const auto fields = split_fields(node_label_lines[i]);
      if (fields.empty())
        throw std::runtime_error("format error: " + node_labels_path + " line " +
                                 std::to_string(i + 1) + ": empty");
      // Some archives carry several columns; the node label is the last one.
      const int value = parse_int(fields.back(), node_labels_path, i + 1);
      raw.node_labels[graph_of_node[i]][local_id[i]] = value;
    }
  }

  // Optional node attributes.
  const std::string attrs_path = path_join(directory, name + "_node_attributes.txt");
  const auto attr_lines = read_lines(attrs_path, false);
  if (!attr_lines.empty()) {
    if (attr_lines.size() != std::size_t(num_nodes_total))
      throw std::runtime_error("format error: " + attrs_path + ": has " +
                               std::to_string(attr_lines.size()) + " lines for " +
                               std::to_string(num_nodes_total) + " nodes");
    raw.has_node_attributes = true;
    const int dim = static_cast<int>(split_fields(attr_lines[0]).size());
    raw.node_attributes.reserve(num_graphs);
    for (int g = 0; g < num_graphs; ++g) raw.node_attributes.emplace_back(graph_size[g], dim);
    for (int i = 0; i < num_nodes_total; ++i) {
      const auto fields = split_fields(attr_lines[i]);
      if (static_cast<int>(fields.size()) != dim)
        throw std::runtime_error("format error: " + attrs_path + " line " +
                                 std::to_string(i + 1) + ": expected " + std::to_string(dim) +
                                 " attributes");
      for (int c = 0; c < dim; ++c) {
        char* end = nullptr;
        const double value = std::strtod(fields[c].c_str(), &end);
        if (end == fields[c].c_str() || !std::isfinite(value))
          throw std::runtime_error("format error: " + attrs_path + " line " +
                                   std::to_string(i + 1) + ": bad attribute '" + fields[c] +
                                   "'");
        raw.node_attributes[graph_of_node[i]](local_id[i], c) = value;
      }
    }
  }

  return raw;
}

FeatureRecipe default_recipe(const RawTuDataset& raw) {
  FeatureRecipe recipe;
  if (raw.has_node_labels) recipe.blocks.push_back(FeatureBlock::OneHotLabel);
  if (raw.has_node_attributes) recipe.blocks.push_back(FeatureBlock::RawAttributes);
  if (!raw.has_node_labels && !raw.has_node_attributes)
    recipe.blocks.push_back(FeatureBlock::DummyConstant);
  recipe.blocks.push_back(FeatureBlock::OneHotDegree);
  return recipe;
}

DatasetBundle encode_node_features(const RawTuDataset& raw, const FeatureRecipe& recipe) {
  DatasetBundle bundle;
  bundle.name = raw.name;
  bundle.graphs = raw.graphs;
  bundle.graph_labels = raw.graph_labels;
  bundle.num_classes = raw.num_classes();
  bundle.recipe = recipe;

  // Label alphabet over the whole dataset.
  std::map<int, int> label_index;
  if (std::count(recipe.blocks.begin(), recipe.blocks.end(), FeatureBlock::OneHotLabel)) {
    if (!raw.has_node_labels)
      throw std::invalid_argument("recipe: dataset " + raw.name + " has no node labels");
    std::set<int> alphabet;
    for (const auto& per_graph : raw.node_labels)
      alphabet.insert(per_graph.begin(), per_graph.end());
    int idx = 0;
    for (int value : alphabet) label_index[value] = idx++;
  }

  int max_degree = 0;
  for (const Graph& g : raw.graphs)
    for (int v = 0; v < g.num_nodes(); ++v) max_degree = std::max(max_degree, g.degree(v));
  const int degree_cap = recipe.degree_cap >= 0 ? recipe.degree_cap : max_degree;

  int attr_dim = 0;
  if (std::count(recipe.blocks.begin(), recipe.blocks.end(), FeatureBlock::RawAttributes)) {
    if (!raw.has_node_attributes)
      throw std::invalid_argument("recipe: dataset " + raw.name + " has no node attributes");
    attr_dim = raw.node_attributes[0].cols();
  }

  int width = 0;
  for (FeatureBlock block : recipe.blocks) {
    switch (block) {
      case FeatureBlock::OneHotLabel: width += static_cast<int>(label_index.size()); break;
      case FeatureBlock::RawAttributes: width += attr_dim; break;
      case FeatureBlock::OneHotDegree: width += degree_cap + 1; break;
      case FeatureBlock::DummyConstant: width += 1; break;
    }
  }
  bundle.feature_dim = width;

  bundle.node_features.reserve(raw.graphs.size());
  for (std::size_t g = 0; g < raw.graphs.size(); ++g) {
    const Graph& graph = raw.graphs[g];
    Matrix features(graph.num_nodes(), width);
    int col = 0;
    for (FeatureBlock block : recipe.blocks) {
      switch (block) {
        case FeatureBlock::OneHotLabel:
          for (int v = 0; v < graph.num_nodes(); ++v)
            features(v, col + label_index.at(raw.node_labels[g][v])) = 1.0;
          col += static_cast<int>(label_index.size());
          break;
        case FeatureBlock::RawAttributes:
          for (int v = 0; v < graph.num_nodes(); ++v)
            for (int c = 0; c < attr_dim; ++c)
              features(v, col + c) = raw.node_attributes[g](v, c);
          col += attr_dim;
          break;
        case FeatureBlock::OneHotDegree:
          for (int v = 0; v < graph.num_nodes(); ++v)
            features(v, col + std::min(graph.degree(v), degree_cap)) = 1.0;
          col += degree_cap + 1;
          break;
        case FeatureBlock::DummyConstant:
          for (int v = 0; v < graph.num_nodes(); ++v) features(v, col) = 1.0;
          col += 1;
          break;
      }
    }
    if (!features.all_finite())
      throw std::runtime_error("encode: non-finite feature value in graph " +
                               std::to_string(g));
    bundle.node_features.push_back(std::move(features));
  }
  return bundle;
}

}  // namespace near
