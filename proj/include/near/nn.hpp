#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "near/matrix.hpp"
#include "near/rng.hpp"

namespace near {

enum class Mode { Train, Eval };

// Flat view of one learnable tensor and its gradient.
struct ParamRef {
  std::string name;
  double* value = nullptr;
  double* grad = nullptr;
  std::size_t size = 0;
};
using ParamRegistry = std::vector<ParamRef>;

class LinearLayer {
 public:
  LinearLayer() = default;
  LinearLayer(int in_dim, int out_dim);

  // Glorot uniform weights, zero bias.
  void init(SplitMix64& rng);

  // x: batch x in -> batch x out. Caches x for backward.
  Matrix forward(const Matrix& x);
  // Accumulates weight/bias grads, returns dx.
  Matrix backward(const Matrix& dy);

  void collect_params(const std::string& prefix, ParamRegistry& reg);
  void zero_grads();

  Matrix weight, grad_weight;            // in x out
  std::vector<double> bias, grad_bias;   // out

 private:
  Matrix input_cache_;
};

// Per-feature batch normalization over row groups. With a single group this
// is ordinary whole-batch BN; the grouped form supports per-graph statistics.
class BatchNormLayer {
 public:
  BatchNormLayer() = default;
  explicit BatchNormLayer(int dim);

  Matrix forward(const Matrix& x, Mode mode);
  // offsets: group boundaries, offsets.front() == 0, offsets.back() == rows.
  // Train mode requires every group to hold at least 2 rows.
  Matrix forward_grouped(const Matrix& x, const std::vector<int>& offsets, Mode mode);
  Matrix backward(const Matrix& dy);

  void collect_params(const std::string& prefix, ParamRegistry& reg);
  void zero_grads();

  std::vector<double> scale, shift, grad_scale, grad_shift;
  std::vector<double> running_mean, running_var;
  double momentum = 0.1;
  double epsilon = 1e-5;

 private:
  Mode mode_cache_ = Mode::Eval;
  Matrix xhat_cache_;
  std::vector<int> offsets_cache_;
  std::vector<double> inv_std_cache_;  // per group x per column
};

// Inverted dropout; eval mode is the identity. rate outside [0, 1) throws
// std::domain_error.
class DropoutLayer {
 public:
  DropoutLayer() = default;
  explicit DropoutLayer(double rate);

  Matrix forward(const Matrix& x, Mode mode, SplitMix64& rng);
  Matrix backward(const Matrix& dy) const;

  double rate() const { return rate_; }

 private:
  double rate_ = 0.0;
  bool identity_ = true;
  Matrix scaled_mask_;
};

Matrix dropout(const Matrix& x, double rate, Mode mode, SplitMix64& rng);

Matrix relu(const Matrix& x);
Matrix relu_backward(const Matrix& dy, const Matrix& pre_activation);

// 2-layer MLP: Linear -> BatchNorm -> ReLU -> Linear.
class Mlp2 {
 public:
  Mlp2() = default;
  Mlp2(int in_dim, int hidden_dim, int out_dim);

  void init(SplitMix64& rng);
  Matrix forward(const Matrix& x, Mode mode);
  Matrix forward_grouped(const Matrix& x, const std::vector<int>& offsets, Mode mode);
  Matrix backward(const Matrix& dy);
  void collect_params(const std::string& prefix, ParamRegistry& reg);
  void zero_grads();

  LinearLayer l1, l2;
  BatchNormLayer bn;

 private:
  Matrix pre_relu_cache_;
};

struct LossResult {
  double loss = 0.0;
  Matrix grad;   // (softmax - one_hot) / batch
  Matrix probs;
};

// Mean negative log softmax probability of the true class. Labels must be in
// [0, num_classes); out-of-range labels throw std::out_of_range.
LossResult softmax_cross_entropy(const Matrix& logits, const std::vector<int>& labels);

// Fraction of rows whose argmax (smallest index on ties) equals the label.
double accuracy(const Matrix& logits, const std::vector<int>& labels);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double base_lr = 1e-4;
  double decay = 0.99;  // applied once per epoch

  double lr_at_epoch(int epoch) const;
};

// Standard Adam with bias correction. Moment buffers are aligned with the
// registry order, which must stay stable across steps.
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  AdamOptimizer(const ParamRegistry& reg, const AdamConfig& cfg);

  void step(const ParamRegistry& reg, int epoch);
  long long step_count() const { return t_; }

 private:
  AdamConfig cfg_;
  long long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// Text checkpoint, version tagged, hexfloat values (lossless round-trip).
void save_checkpoint(const ParamRegistry& reg, std::ostream& out);
void load_checkpoint(const ParamRegistry& reg, std::istream& in);

}  // namespace near
