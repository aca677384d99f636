#include "near/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace near {

ReadoutMode readout_from_string(const std::string& s) {
  if (s == "sum") return ReadoutMode::Sum;
  if (s == "mean") return ReadoutMode::Mean;
  throw std::invalid_argument("unknown readout '" + s + "' (want sum|mean)");
}

std::string to_string(ReadoutMode m) { return m == ReadoutMode::Sum ? "sum" : "mean"; }

GraphBatch make_batch(const std::vector<const Graph*>& graphs,
                      const std::vector<const Matrix*>& features,
                      const std::vector<int>& labels) {
  if (graphs.size() != features.size())
    throw std::invalid_argument("make_batch: graph/feature count mismatch");
  if (!labels.empty() && labels.size() != graphs.size())
    throw std::invalid_argument("make_batch: label count mismatch");
  if (graphs.empty()) throw std::invalid_argument("make_batch: empty batch");

  GraphBatch batch;
  batch.graphs = graphs;
  batch.labels = labels;
  batch.offsets.resize(graphs.size() + 1, 0);
  const int width = features[0]->cols();
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    if (features[i]->cols() != width)
      throw std::invalid_argument("make_batch: inconsistent feature widths");
    if (features[i]->rows() != graphs[i]->num_nodes())
      throw std::invalid_argument("make_batch: feature rows != node count");
    batch.offsets[i + 1] = batch.offsets[i] + graphs[i]->num_nodes();
  }
  batch.features = Matrix(batch.offsets.back(), width);
  for (std::size_t i = 0; i < graphs.size(); ++i)
    std::copy(features[i]->data().begin(), features[i]->data().end(),
              batch.features.row_ptr(batch.offsets[i]));
  return batch;
}

std::vector<double> readout(const Matrix& h, ReadoutMode mode) {
  if (h.rows() == 0) throw std::domain_error("readout: empty feature matrix");
  std::vector<double> out = column_sums(h);
  if (mode == ReadoutMode::Mean)
    for (double& x : out) x /= h.rows();
  return out;
}

GnnLayer::GnnLayer(const ModelConfig& cfg, int in_dim)
    : variant_(cfg.aggregator.variant),
      in_dim_(in_dim),
      near_dim_(cfg.aggregator.embed_dim(in_dim)),
      per_graph_bn_(cfg.batchnorm_per_graph),
      has_out_bn_(cfg.layer_output_batchnorm),
      combine_(in_dim + near_dim_, cfg.hidden_dim, cfg.hidden_dim),
      out_bn_(cfg.hidden_dim) {}

void GnnLayer::init(SplitMix64& rng) { combine_.init(rng); }

const std::vector<int>& GnnLayer::group_offsets(const GraphBatch& batch) const {
  return per_graph_bn_ ? batch.offsets : whole_batch_offsets_;
}

Matrix GnnLayer::forward(const GraphBatch& batch, const Matrix& h_in, Mode mode) {
  const int total = batch.total_nodes();
  if (h_in.rows() != total || h_in.cols() != in_dim_)
    throw std::invalid_argument("gnn layer: input shape mismatch");

  h_in_cache_ = h_in;
  whole_batch_offsets_ = {0, total};
  Matrix x(total, in_dim_ + near_dim_);

  const int num_graphs = batch.num_graphs();
#pragma omp parallel for schedule(dynamic) if (num_graphs > 1)
  for (int gi = 0; gi < num_graphs; ++gi) {
    const Graph& g = *batch.graphs[gi];
    const int off = batch.offsets[gi];
    for (int v = 0; v < g.num_nodes(); ++v) {
      double* xrow = x.row_ptr(off + v);
      const double* hrow = h_in.row_ptr(off + v);
      for (int c = 0; c < in_dim_; ++c) xrow[c] = hrow[c];  // h_v (GIN-0, eps = 0)
      for (int u : g.neighbors(v)) {
        const double* nrow = h_in.row_ptr(off + u);
        for (int c = 0; c < in_dim_; ++c) xrow[c] += nrow[c];
      }
    }
    if (variant_ != NearVariant::None)
      near_batch_into(g, h_in, off, variant_, x, in_dim_);
  }

  Matrix y = combine_.forward_grouped(x, group_offsets(batch), mode);
  if (has_out_bn_) y = out_bn_.forward_grouped(y, group_offsets(batch), mode);
  return y;
}

Matrix GnnLayer::backward(const GraphBatch& batch, const Matrix& dh_out) {
  Matrix d = dh_out;
  if (has_out_bn_) d = out_bn_.backward(d);
  d = combine_.backward(d);  // total x (in + near)

  const int total = batch.total_nodes();
  Matrix dh_in(total, in_dim_);
  Matrix dnear;
  if (variant_ != NearVariant::None && variant_ != NearVariant::C) {
    dnear = Matrix(total, near_dim_);
    for (int r = 0; r < total; ++r)
      std::copy(d.row_ptr(r) + in_dim_, d.row_ptr(r) + in_dim_ + near_dim_,
                dnear.row_ptr(r));
  }

  const int num_graphs = batch.num_graphs();
#pragma omp parallel for schedule(dynamic) if (num_graphs > 1)
  for (int gi = 0; gi < num_graphs; ++gi) {
    const Graph& g = *batch.graphs[gi];
    const int off = batch.offsets[gi];
    // d(h_v + sum_{u in N_v} h_u): identity plus the symmetric adjacency.
    for (int v = 0; v < g.num_nodes(); ++v) {
      double* drow = dh_in.row_ptr(off + v);
      const double* srow = d.row_ptr(off + v);
      for (int c = 0; c < in_dim_; ++c) drow[c] = srow[c];
      for (int u : g.neighbors(v)) {
        const double* urow = d.row_ptr(off + u);
        for (int c = 0; c < in_dim_; ++c) drow[c] += urow[c];
      }
    }
    if (variant_ != NearVariant::None && variant_ != NearVariant::C)
      near_backward_accumulate(g, h_in_cache_, variant_, dnear, dh_in, off);
  }
  return dh_in;
}

void GnnLayer::collect_params(const std::string& prefix, ParamRegistry& reg) {
  combine_.collect_params(prefix + ".combine", reg);
  if (has_out_bn_) out_bn_.collect_params(prefix + ".out_bn", reg);
}

void GnnLayer::collect_state(const std::string& prefix, ParamRegistry& reg) {
  reg.push_back({prefix + ".combine.bn.running_mean", combine_.bn.running_mean.data(),
                 nullptr, combine_.bn.running_mean.size()});
  reg.push_back({prefix + ".combine.bn.running_var", combine_.bn.running_var.data(),
                 nullptr, combine_.bn.running_var.size()});
  if (has_out_bn_) {
    reg.push_back({prefix + ".out_bn.running_mean", out_bn_.running_mean.data(), nullptr,
                   out_bn_.running_mean.size()});
    reg.push_back({prefix + ".out_bn.running_var", out_bn_.running_var.data(), nullptr,
                   out_bn_.running_var.size()});
  }
}

void GnnLayer::zero_grads() {
  combine_.zero_grads();
  if (has_out_bn_) out_bn_.zero_grads();
}

GinNearModel::GinNearModel(const ModelConfig& cfg, SplitMix64& rng)
    : cfg_(cfg),
      drop_input_(cfg.dropout_rate),
      drop_hidden_(cfg.dropout_rate),
      pred_l1_(cfg.representation_width(), cfg.classifier_hidden),
      pred_l2_(cfg.classifier_hidden, cfg.num_classes) {
  if (cfg.num_gnn_layers < 1)
    throw std::invalid_argument("model: num_gnn_layers must be >= 1");
  if (cfg.hidden_dim < 1) throw std::invalid_argument("model: hidden_dim must be >= 1");
  layers_.reserve(cfg.num_gnn_layers);
  for (int k = 0; k < cfg.num_gnn_layers; ++k) {
    const int in_dim = k == 0 ? cfg.input_dim : cfg.hidden_dim;
    layers_.emplace_back(cfg, in_dim);
    layers_.back().init(rng);
  }
  pred_l1_.init(rng);
  pred_l2_.init(rng);
}

void GinNearModel::store_readouts(int level, const GraphBatch& batch, const Matrix& h) {
  for (int gi = 0; gi < batch.num_graphs(); ++gi) {
    const int off = batch.offsets[gi];
    const int rows = batch.offsets[gi + 1] - off;
    if (rows == 0) throw std::domain_error("readout: graph with no nodes");
    std::vector<double> vec(h.cols(), 0.0);
    for (int r = off; r < off + rows; ++r) {
      const double* row = h.row_ptr(r);
      for (int c = 0; c < h.cols(); ++c) vec[c] += row[c];
    }
    if (cfg_.readout == ReadoutMode::Mean)
      for (double& x : vec) x /= rows;
    readouts_[level][gi] = std::move(vec);
  }
}

int GinNearModel::level_col_offset(int level) const {
  return level == 0 ? 0 : cfg_.input_dim + (level - 1) * cfg_.hidden_dim;
}

Matrix GinNearModel::forward(const GraphBatch& batch, Mode mode, SplitMix64& rng) {
  if (batch.features.cols() != cfg_.input_dim)
    throw std::invalid_argument("model: input feature width mismatch");
  const int levels = cfg_.num_gnn_layers + 1;
  readouts_.assign(levels, std::vector<std::vector<double>>(batch.num_graphs()));
  graph_sizes_cache_.resize(batch.num_graphs());
  for (int gi = 0; gi < batch.num_graphs(); ++gi)
    graph_sizes_cache_[gi] = batch.offsets[gi + 1] - batch.offsets[gi];

  Matrix h = batch.features;
  store_readouts(0, batch, h);
  for (int k = 0; k < cfg_.num_gnn_layers; ++k) {
    h = layers_[k].forward(batch, h, mode);
    store_readouts(k + 1, batch, h);
  }

  rep_cache_ = Matrix(batch.num_graphs(), cfg_.representation_width());
  for (int gi = 0; gi < batch.num_graphs(); ++gi) {
    double* row = rep_cache_.row_ptr(gi);
    for (int level = 0; level < levels; ++level) {
      const auto& vec = readouts_[level][gi];
      std::copy(vec.begin(), vec.end(), row + level_col_offset(level));
    }
  }

  Matrix x = drop_input_.forward(rep_cache_, mode, rng);
  pred_pre_relu_ = pred_l1_.forward(x);
  x = relu(pred_pre_relu_);
  x = drop_hidden_.forward(x, mode, rng);
  return pred_l2_.forward(x);
}

Matrix GinNearModel::readout_backward(const GraphBatch& batch, const Matrix& drep,
                                      int level) const {
  const int width = level_width(level);
  const int col = level_col_offset(level);
  Matrix dh(batch.total_nodes(), width);
  for (int gi = 0; gi < batch.num_graphs(); ++gi) {
    const int off = batch.offsets[gi];
    const int rows = graph_sizes_cache_[gi];
    const double denom = cfg_.readout == ReadoutMode::Mean ? rows : 1.0;
    const double* src = drep.row_ptr(gi) + col;
    for (int r = off; r < off + rows; ++r) {
      double* drow = dh.row_ptr(r);
      for (int c = 0; c < width; ++c) drow[c] = src[c] / denom;
    }
  }
  return dh;
}

void GinNearModel::backward(const GraphBatch& batch, const Matrix& dlogits) {
  Matrix d = pred_l2_.backward(dlogits);
  d = drop_hidden_.backward(d);
  d = relu_backward(d, pred_pre_relu_);
  d = pred_l1_.backward(d);
  d = drop_input_.backward(d);  // num_graphs x rep_width

  Matrix dh = readout_backward(batch, d, cfg_.num_gnn_layers);
  for (int k = cfg_.num_gnn_layers - 1; k >= 0; --k) {
    dh = layers_[k].backward(batch, dh);
    if (k > 0) add_in_place(dh, readout_backward(batch, d, k));
  }
}

void GinNearModel::zero_grads() {
  for (auto& layer : layers_) layer.zero_grads();
  pred_l1_.zero_grads();
  pred_l2_.zero_grads();
}

ParamRegistry GinNearModel::params() {
  ParamRegistry reg;
  for (std::size_t k = 0; k < layers_.size(); ++k)
    layers_[k].collect_params("gnn" + std::to_string(k), reg);
  pred_l1_.collect_params("pred.l1", reg);
  pred_l2_.collect_params("pred.l2", reg);
  return reg;
}

ParamRegistry GinNearModel::state_params() {
  ParamRegistry reg = params();
  for (std::size_t k = 0; k < layers_.size(); ++k)
    layers_[k].collect_state("gnn" + std::to_string(k), reg);
  return reg;
}

GraphRepresentation GinNearModel::representation(int graph_index) const {
  if (readouts_.empty() || graph_index < 0 ||
      graph_index >= static_cast<int>(readouts_[0].size()))
    throw std::logic_error("representation: no cached forward for this index");
  GraphRepresentation rep;
  rep.per_layer.reserve(readouts_.size());
  for (const auto& level : readouts_) rep.per_layer.push_back(level[graph_index]);
  rep.concatenated.assign(rep_cache_.row_ptr(graph_index),
                          rep_cache_.row_ptr(graph_index) + rep_cache_.cols());
  return rep;
}

void GinNearModel::save(std::ostream& out) { save_checkpoint(state_params(), out); }

void GinNearModel::load(std::istream& in) { load_checkpoint(state_params(), in); }

ForwardResult model_forward(const Graph& g, const Matrix& h0, GinNearModel& model,
                            Mode mode, SplitMix64& rng) {
  const GraphBatch batch = make_batch({&g}, {&h0}, {});
  ForwardResult result;
  result.logits = model.forward(batch, mode, rng);
  result.rep = model.representation(0);
  return result;
}

}  // namespace near
