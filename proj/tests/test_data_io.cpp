#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "near/tu_dataset.hpp"

using namespace near;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  fs::path dir;

  explicit Fixture(const std::string& name) {
    dir = fs::temp_directory_path() / ("near_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Fixture() { fs::remove_all(dir); }

  void write(const std::string& file, const std::string& text) const {
    std::ofstream out(dir / file);
    out << text;
  }
};

// Two triangles-with-a-tail style graphs, handwritten.
void write_basic_fixture(const Fixture& fx, const std::string& name) {
  fx.write(name + "_graph_indicator.txt", "1\n1\n1\n2\n2\n2\n");
  // graph 1: path 0-1-2 (with the reversed duplicate of one edge);
  // graph 2: triangle
  fx.write(name + "_A.txt",
           "1, 2\n"
           "2, 1\n"
           "2, 3\n"
           "3, 2\n"
           "4, 5\n"
           "5, 4\n"
           "5, 6\n"
           "6, 5\n"
           "4, 6\n"
           "6, 4\n");
  fx.write(name + "_graph_labels.txt", "1\n-1\n");
  fx.write(name + "_node_labels.txt", "0\n1\n2\n0\n0\n1\n");
  fx.write(name + "_node_attributes.txt",
           "0.125, -2.5\n"
           "1.0, 0.5\n"
           "-0.25, 4.0\n"
           "2.0, 2.0\n"
           "0.0, 1.0\n"
           "-1.5, -1.5\n");
}

}  // namespace

TEST_CASE("loads the handwritten fixture with exact adjacency") {
  Fixture fx("basic");
  write_basic_fixture(fx, "TINY");
  const RawTuDataset raw = load_tu_dataset(fx.dir.string(), "TINY");

  REQUIRE(raw.graphs.size() == 2);
  CHECK(raw.num_classes() == 2);
  // labels: original 1 -> class 1, original -1 -> class 0 (sorted order)
  CHECK(raw.graph_labels == std::vector<int>{1, 0});
  CHECK(raw.class_original_labels == std::vector<int>{-1, 1});

  CHECK(raw.graphs[0].edges() == std::vector<Edge>{{0, 1}, {1, 2}});
  CHECK(raw.graphs[1].edges() == std::vector<Edge>{{0, 1}, {0, 2}, {1, 2}});
  // every undirected edge appeared twice in the file
  CHECK(raw.clean_stats.duplicates_dropped == 5);

  CHECK(raw.has_node_labels);
  CHECK(raw.node_labels[0] == std::vector<int>{0, 1, 2});
  CHECK(raw.has_node_attributes);
  CHECK(raw.node_attributes[0](0, 0) == 0.125);
  CHECK(raw.node_attributes[0](0, 1) == -2.5);
  CHECK(raw.node_attributes[1](2, 0) == -1.5);
}

TEST_CASE("missing mandatory files and bad rows are reported") {
  Fixture fx("errors");
  CHECK_THROWS_WITH_AS(load_tu_dataset(fx.dir.string(), "NOPE"),
                       doctest::Contains("NOPE_graph_indicator.txt"), std::runtime_error);

  write_basic_fixture(fx, "BAD");
  // edge crossing graphs 1 and 2 on line 3
  fx.write("BAD_A.txt", "1, 2\n2, 3\n3, 4\n");
  try {
    load_tu_dataset(fx.dir.string(), "BAD");
    FAIL("expected a format error");
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    CHECK(what.find("line 3") != std::string::npos);
    CHECK(what.find("different graphs") != std::string::npos);
  }
}

TEST_CASE("loading is independent of edge line order") {
  Fixture fx("order");
  write_basic_fixture(fx, "ORD");
  const RawTuDataset before = load_tu_dataset(fx.dir.string(), "ORD");
  fx.write("ORD_A.txt",
           "6, 4\n5, 6\n4, 6\n5, 4\n4, 5\n"
           "3, 2\n2, 1\n1, 2\n2, 3\n6, 5\n");
  const RawTuDataset after = load_tu_dataset(fx.dir.string(), "ORD");
  CHECK(before.graphs[0] == after.graphs[0]);
  CHECK(before.graphs[1] == after.graphs[1]);
}

TEST_CASE("one-hot label features") {
  Fixture fx("labels");
  write_basic_fixture(fx, "LAB");
  const RawTuDataset raw = load_tu_dataset(fx.dir.string(), "LAB");

  FeatureRecipe recipe;
  recipe.blocks = {FeatureBlock::OneHotLabel};
  const DatasetBundle bundle = encode_node_features(raw, recipe);
  CHECK(bundle.feature_dim == 3);  // labels {0,1,2}
  for (const Matrix& features : bundle.node_features)
    for (int v = 0; v < features.rows(); ++v) {
      double sum = 0.0;
      for (int c = 0; c < features.cols(); ++c) {
        CHECK((features(v, c) == 0.0 || features(v, c) == 1.0));
        sum += features(v, c);
      }
      CHECK(sum == 1.0);
    }
  CHECK(bundle.node_features[0](1, 1) == 1.0);  // node 1 of graph 1 has label 1
}

TEST_CASE("attribute features are passed through bit-identically") {
  Fixture fx("attrs");
  write_basic_fixture(fx, "ATT");
  const RawTuDataset raw = load_tu_dataset(fx.dir.string(), "ATT");

  FeatureRecipe recipe;
  recipe.blocks = {FeatureBlock::RawAttributes};
  const DatasetBundle bundle = encode_node_features(raw, recipe);
  CHECK(bundle.feature_dim == 2);
  CHECK(bundle.node_features[0](0, 0) == 0.125);
  CHECK(bundle.node_features[0](2, 1) == 4.0);
  CHECK(bundle.node_features[1](0, 0) == 2.0);
}

TEST_CASE("degree one-hot with default cap and explicit clipping") {
  Fixture fx("degree");
  write_basic_fixture(fx, "DEG");
  const RawTuDataset raw = load_tu_dataset(fx.dir.string(), "DEG");

  FeatureRecipe recipe;
  recipe.blocks = {FeatureBlock::OneHotDegree};
  const DatasetBundle bundle = encode_node_features(raw, recipe);
  CHECK(bundle.feature_dim == 3);  // max degree 2 -> slots 0,1,2
  CHECK(bundle.node_features[0](0, 1) == 1.0);  // path endpoint, degree 1
  CHECK(bundle.node_features[0](1, 2) == 1.0);  // path middle, degree 2

  FeatureRecipe clipped;
  clipped.blocks = {FeatureBlock::OneHotDegree};
  clipped.degree_cap = 1;
  const DatasetBundle clipped_bundle = encode_node_features(raw, clipped);
  CHECK(clipped_bundle.feature_dim == 2);
  CHECK(clipped_bundle.node_features[0](1, 1) == 1.0);  // degree 2 clipped to 1
}

TEST_CASE("dummy constant column and default recipes") {
  Fixture fx("dummy");
  // social-network style: no node labels or attributes
  fx.write("SOC_graph_indicator.txt", "1\n1\n1\n");
  fx.write("SOC_A.txt", "1, 2\n2, 3\n");
  fx.write("SOC_graph_labels.txt", "0\n");
  const RawTuDataset social = load_tu_dataset(fx.dir.string(), "SOC");
  CHECK_FALSE(social.has_node_labels);
  CHECK_FALSE(social.has_node_attributes);

  const FeatureRecipe recipe = default_recipe(social);
  REQUIRE(recipe.blocks.size() == 2);
  CHECK(recipe.blocks[0] == FeatureBlock::DummyConstant);
  CHECK(recipe.blocks[1] == FeatureBlock::OneHotDegree);

  const DatasetBundle bundle = encode_node_features(social, recipe);
  CHECK(bundle.feature_dim == 1 + 3);  // ones + degrees 0..2
  for (int v = 0; v < 3; ++v) CHECK(bundle.node_features[0](v, 0) == 1.0);

  CHECK_THROWS_AS(
      encode_node_features(social, FeatureRecipe{{FeatureBlock::OneHotLabel}, -1}),
      std::invalid_argument);
  CHECK_THROWS_AS(feature_block_from_string("spectral"), std::invalid_argument);
}

TEST_CASE("labeled fixture default recipe includes labels, attributes and degree") {
  Fixture fx("default");
  write_basic_fixture(fx, "DEF");
  const RawTuDataset raw = load_tu_dataset(fx.dir.string(), "DEF");
  const FeatureRecipe recipe = default_recipe(raw);
  REQUIRE(recipe.blocks.size() == 3);
  CHECK(recipe.blocks[0] == FeatureBlock::OneHotLabel);
  CHECK(recipe.blocks[1] == FeatureBlock::RawAttributes);
  CHECK(recipe.blocks[2] == FeatureBlock::OneHotDegree);

  const DatasetBundle bundle = encode_node_features(raw, recipe);
  CHECK(bundle.feature_dim == 3 + 2 + 3);
  for (const Matrix& m : bundle.node_features) CHECK(m.all_finite());
}

TEST_CASE("round trip through the edge-list serializer preserves the edge multiset") {
  Fixture fx("roundtrip");
  write_basic_fixture(fx, "RT");
  const RawTuDataset raw = load_tu_dataset(fx.dir.string(), "RT");
  for (const Graph& g : raw.graphs) {
    std::stringstream buffer;
    write_edge_list(g, buffer);
    const Graph back = read_edge_list(buffer);
    CHECK(back.edges() == g.edges());
    CHECK(back.num_nodes() == g.num_nodes());
  }
}
