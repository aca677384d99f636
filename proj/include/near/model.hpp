#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "near/graph.hpp"
#include "near/matrix.hpp"
#include "near/near_ops.hpp"
#include "near/nn.hpp"

namespace near {

enum class ReadoutMode { Sum, Mean };
ReadoutMode readout_from_string(const std::string& s);
std::string to_string(ReadoutMode m);

// Which NEAR variant a layer runs and the width of its embedded channel.
// The multiset reducer is fixed to summation.
struct AggregatorSpec {
  NearVariant variant = NearVariant::None;
  int embed_dim(int feature_dim) const { return near_embed_dim(variant, feature_dim); }
};

struct ModelConfig {
  int num_gnn_layers = 5;
  int hidden_dim = 32;
  AggregatorSpec aggregator;
  ReadoutMode readout = ReadoutMode::Sum;
  double dropout_rate = 0.5;       // prediction layers only
  int classifier_hidden = 32;
  int input_dim = 2;
  int num_classes = 2;
  bool layer_output_batchnorm = true;  // extra BN on each GNN layer output
  bool batchnorm_per_graph = false;    // batch statistics per graph instead of whole batch
  AdamConfig adam;

  int representation_width() const { return input_dim + num_gnn_layers * hidden_dim; }
};

// Several graphs stacked into one node-feature matrix; graph i owns rows
// [offsets[i], offsets[i+1]).
struct GraphBatch {
  std::vector<const Graph*> graphs;
  std::vector<int> offsets;
  Matrix features;
  std::vector<int> labels;

  int num_graphs() const { return static_cast<int>(graphs.size()); }
  int total_nodes() const { return offsets.empty() ? 0 : offsets.back(); }
};

GraphBatch make_batch(const std::vector<const Graph*>& graphs,
                      const std::vector<const Matrix*>& features,
                      const std::vector<int>& labels);

// Per-level graph readouts h_G^(0..K) and their concatenation h_G^(rep).
struct GraphRepresentation {
  std::vector<std::vector<double>> per_layer;
  std::vector<double> concatenated;
};

// Column-wise sum or mean. Throws std::domain_error for an empty matrix.
std::vector<double> readout(const Matrix& h, ReadoutMode mode);

// One GNN layer: COMBINE(h_v + h_{N_v} [, h_{NE_v}]) with a 2-layer MLP.
// GIN epsilon is fixed to 0.
class GnnLayer {
 public:
  GnnLayer() = default;
  GnnLayer(const ModelConfig& cfg, int in_dim);

  void init(SplitMix64& rng);
  Matrix forward(const GraphBatch& batch, const Matrix& h_in, Mode mode);
  Matrix backward(const GraphBatch& batch, const Matrix& dh_out);
  void collect_params(const std::string& prefix, ParamRegistry& reg);
  void collect_state(const std::string& prefix, ParamRegistry& reg);
  void zero_grads();

 private:
  const std::vector<int>& group_offsets(const GraphBatch& batch) const;

  NearVariant variant_ = NearVariant::None;
  int in_dim_ = 0;
  int near_dim_ = 0;
  bool per_graph_bn_ = false;
  bool has_out_bn_ = true;
  Mlp2 combine_;
  BatchNormLayer out_bn_;
  Matrix h_in_cache_;
  std::vector<int> whole_batch_offsets_;
};

// The full stack of Figure-style GIN-0 + NEAR layers, per-level readouts,
// concatenated representation and the 2-layer prediction MLP.
class GinNearModel {
 public:
  GinNearModel() = default;
  GinNearModel(const ModelConfig& cfg, SplitMix64& rng);

  // Returns logits (num_graphs x num_classes). rng feeds dropout only; eval
  // mode never draws from it.
  Matrix forward(const GraphBatch& batch, Mode mode, SplitMix64& rng);
  void backward(const GraphBatch& batch, const Matrix& dlogits);
  void zero_grads();

  ParamRegistry params();        // learnable tensors, stable order
  ParamRegistry state_params();  // learnable + batchnorm running statistics

  GraphRepresentation representation(int graph_index) const;
  const ModelConfig& config() const { return cfg_; }

  void save(std::ostream& out);
  void load(std::istream& in);

 private:
  ModelConfig cfg_;
  std::vector<GnnLayer> layers_;
  DropoutLayer drop_input_, drop_hidden_;
  LinearLayer pred_l1_, pred_l2_;

  Matrix pred_pre_relu_;
  Matrix rep_cache_;
  std::vector<std::vector<std::vector<double>>> readouts_;  // [level][graph]
  std::vector<int> graph_sizes_cache_;

  void store_readouts(int level, const GraphBatch& batch, const Matrix& h);
  Matrix readout_backward(const GraphBatch& batch, const Matrix& drep, int level) const;
  int level_width(int level) const { return level == 0 ? cfg_.input_dim : cfg_.hidden_dim; }
  int level_col_offset(int level) const;
};

struct ForwardResult {
  GraphRepresentation rep;
  Matrix logits;
};

// Single-graph convenience wrapper (batch of one).
ForwardResult model_forward(const Graph& g, const Matrix& h0, GinNearModel& model,
                            Mode mode, SplitMix64& rng);

}  // namespace near
