#include "near/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace near {

LinearLayer::LinearLayer(int in_dim, int out_dim)
    : weight(in_dim, out_dim),
      grad_weight(in_dim, out_dim),
      bias(out_dim, 0.0),
      grad_bias(out_dim, 0.0) {}

void LinearLayer::init(SplitMix64& rng) {
  const double bound = std::sqrt(6.0 / (weight.rows() + weight.cols()));
  for (double& w : weight.data()) w = rng.uniform(-bound, bound);
  std::fill(bias.begin(), bias.end(), 0.0);
}

Matrix LinearLayer::forward(const Matrix& x) {
  input_cache_ = x;
  Matrix y = matmul(x, weight);
  add_row_vector_in_place(y, bias);
  return y;
}

Matrix LinearLayer::backward(const Matrix& dy) {
  add_in_place(grad_weight, matmul_transpose_a(input_cache_, dy));
  const std::vector<double> db = column_sums(dy);
  for (std::size_t i = 0; i < db.size(); ++i) grad_bias[i] += db[i];
  return matmul_transpose_b(dy, weight);
}

void LinearLayer::collect_params(const std::string& prefix, ParamRegistry& reg) {
  reg.push_back({prefix + ".weight", weight.data().data(), grad_weight.data().data(),
                 weight.size()});
  reg.push_back({prefix + ".bias", bias.data(), grad_bias.data(), bias.size()});
}

void LinearLayer::zero_grads() {
  grad_weight.fill(0.0);
  std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
}

BatchNormLayer::BatchNormLayer(int dim)
    : scale(dim, 1.0),
      shift(dim, 0.0),
      grad_scale(dim, 0.0),
      grad_shift(dim, 0.0),
      running_mean(dim, 0.0),
      running_var(dim, 1.0) {}

Matrix BatchNormLayer::forward(const Matrix& x, Mode mode) {
  return forward_grouped(x, {0, x.rows()}, mode);
}

Matrix BatchNormLayer::forward_grouped(const Matrix& x, const std::vector<int>& offsets,
                                       Mode mode) {
  const int cols = x.cols();
  if (cols != static_cast<int>(scale.size()))
    throw std::invalid_argument("batchnorm: feature width mismatch");
  const int groups = static_cast<int>(offsets.size()) - 1;

  mode_cache_ = mode;
  offsets_cache_ = offsets;
  xhat_cache_ = Matrix(x.rows(), cols);
  inv_std_cache_.assign(std::size_t(groups) * cols, 0.0);
  Matrix y(x.rows(), cols);

  for (int g = 0; g < groups; ++g) {
    const int first = offsets[g], last = offsets[g + 1];
    const int rows = last - first;
    double* inv_std = inv_std_cache_.data() + std::size_t(g) * cols;

    if (mode == Mode::Train) {
      if (rows < 2)
        throw std::runtime_error("batchnorm: train-mode batch of " + std::to_string(rows) +
                                 " row(s) is degenerate");
      for (int c = 0; c < cols; ++c) {
        double sum = 0.0;
        for (int r = first; r < last; ++r) sum += x(r, c);
        const double mean = sum / rows;
        double sq = 0.0;
        for (int r = first; r < last; ++r) {
          const double d = x(r, c) - mean;
          sq += d * d;
        }
        const double var = sq / rows;
        inv_std[c] = 1.0 / std::sqrt(var + epsilon);
        for (int r = first; r < last; ++r) {
          const double xh = (x(r, c) - mean) * inv_std[c];
          xhat_cache_(r, c) = xh;
          y(r, c) = scale[c] * xh + shift[c];
        }
        running_mean[c] = (1.0 - momentum) * running_mean[c] + momentum * mean;
        running_var[c] = (1.0 - momentum) * running_var[c] + momentum * var;
      }
    } else {
      for (int c = 0; c < cols; ++c) {
        inv_std[c] = 1.0 / std::sqrt(running_var[c] + epsilon);
        for (int r = first; r < last; ++r) {
          const double xh = (x(r, c) - running_mean[c]) * inv_std[c];
          xhat_cache_(r, c) = xh;
          y(r, c) = scale[c] * xh + shift[c];
        }
      }
    }
  }
  return y;
}

Matrix BatchNormLayer::backward(const Matrix& dy) {
  if (!dy.same_shape(xhat_cache_))
    throw std::invalid_argument("batchnorm backward: stale cache");
  const int cols = dy.cols();
  const int groups = static_cast<int>(offsets_cache_.size()) - 1;
  Matrix dx(dy.rows(), cols);

  for (int g = 0; g < groups; ++g) {
    const int first = offsets_cache_[g], last = offsets_cache_[g + 1];
    const int rows = last - first;
    const double* inv_std = inv_std_cache_.data() + std::size_t(g) * cols;

    for (int c = 0; c < cols; ++c) {
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (int r = first; r < last; ++r) {
        sum_dy += dy(r, c);
        sum_dy_xhat += dy(r, c) * xhat_cache_(r, c);
      }
      grad_shift[c] += sum_dy;
      grad_scale[c] += sum_dy_xhat;

      if (mode_cache_ == Mode::Train) {
        const double k = scale[c] * inv_std[c];
        for (int r = first; r < last; ++r)
          dx(r, c) = k * (dy(r, c) - sum_dy / rows - xhat_cache_(r, c) * sum_dy_xhat / rows);
      } else {
        const double k = scale[c] * inv_std[c];
        for (int r = first; r < last; ++r) dx(r, c) = k * dy(r, c);
      }
    }
  }
  return dx;
}

void BatchNormLayer::collect_params(const std::string& prefix, ParamRegistry& reg) {
  reg.push_back({prefix + ".scale", scale.data(), grad_scale.data(), scale.size()});
  reg.push_back({prefix + ".shift", shift.data(), grad_shift.data(), shift.size()});
}

void BatchNormLayer::zero_grads() {
  std::fill(grad_scale.begin(), grad_scale.end(), 0.0);
  std::fill(grad_shift.begin(), grad_shift.end(), 0.0);
}

DropoutLayer::DropoutLayer(double rate) : rate_(rate) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw std::domain_error("dropout: rate must be in [0, 1)");
}

Matrix DropoutLayer::forward(const Matrix& x, Mode mode, SplitMix64& rng) {
  if (mode == Mode::Eval || rate_ == 0.0) {
    identity_ = true;
    return x;
  }
  identity_ = false;
  const double keep_scale = 1.0 / (1.0 - rate_);
  scaled_mask_ = Matrix(x.rows(), x.cols());
  Matrix y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = rng.next_double() < rate_ ? 0.0 : keep_scale;
    scaled_mask_.data()[i] = m;
    y.data()[i] = x.data()[i] * m;
  }
  return y;
}

Matrix DropoutLayer::backward(const Matrix& dy) const {
  if (identity_) return dy;
  Matrix dx(dy.rows(), dy.cols());
  for (std::size_t i = 0; i < dy.size(); ++i)
    dx.data()[i] = dy.data()[i] * scaled_mask_.data()[i];
  return dx;
}

Matrix dropout(const Matrix& x, double rate, Mode mode, SplitMix64& rng) {
  DropoutLayer layer(rate);
  return layer.forward(x, mode, rng);
}

Matrix relu(const Matrix& x) {
  Matrix y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) y.data()[i] = std::max(0.0, x.data()[i]);
  return y;
}

Matrix relu_backward(const Matrix& dy, const Matrix& pre_activation) {
  Matrix dx(dy.rows(), dy.cols());
  for (std::size_t i = 0; i < dy.size(); ++i)
    dx.data()[i] = pre_activation.data()[i] > 0.0 ? dy.data()[i] : 0.0;
  return dx;
}

Mlp2::Mlp2(int in_dim, int hidden_dim, int out_dim)
    : l1(in_dim, hidden_dim), l2(hidden_dim, out_dim), bn(hidden_dim) {}

void Mlp2::init(SplitMix64& rng) {
  l1.init(rng);
  l2.init(rng);
}

Matrix Mlp2::forward(const Matrix& x, Mode mode) {
  return forward_grouped(x, {0, x.rows()}, mode);
}

Matrix Mlp2::forward_grouped(const Matrix& x, const std::vector<int>& offsets, Mode mode) {
  pre_relu_cache_ = bn.forward_grouped(l1.forward(x), offsets, mode);
  return l2.forward(relu(pre_relu_cache_));
}

Matrix Mlp2::backward(const Matrix& dy) {
  Matrix d = l2.backward(dy);
  d = relu_backward(d, pre_relu_cache_);
  d = bn.backward(d);
  return l1.backward(d);
}

void Mlp2::collect_params(const std::string& prefix, ParamRegistry& reg) {
  l1.collect_params(prefix + ".l1", reg);
  bn.collect_params(prefix + ".bn", reg);
  l2.collect_params(prefix + ".l2", reg);
}

void Mlp2::zero_grads() {
  l1.zero_grads();
  bn.zero_grads();
  l2.zero_grads();
}

LossResult softmax_cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
  if (labels.size() != std::size_t(logits.rows()))
    throw std::invalid_argument("softmax_cross_entropy: label count mismatch");
  const int batch = logits.rows();
  const int classes = logits.cols();

  LossResult result;
  result.grad = Matrix(batch, classes);
  result.probs = Matrix(batch, classes);
  double total = 0.0;

  for (int r = 0; r < batch; ++r) {
    const int label = labels[r];
    if (label < 0 || label >= classes)
      throw std::out_of_range("softmax_cross_entropy: label " + std::to_string(label) +
                              " out of range for " + std::to_string(classes) + " classes");
    const double* row = logits.row_ptr(r);
    double max_logit = row[0];
    for (int c = 1; c < classes; ++c) max_logit = std::max(max_logit, row[c]);
    double denom = 0.0;
    for (int c = 0; c < classes; ++c) denom += std::exp(row[c] - max_logit);
    const double log_denom = std::log(denom);
    total += log_denom - (row[label] - max_logit);
    for (int c = 0; c < classes; ++c) {
      const double p = std::exp(row[c] - max_logit) / denom;
      result.probs(r, c) = p;
      result.grad(r, c) = (p - (c == label ? 1.0 : 0.0)) / batch;
    }
  }
  result.loss = total / batch;
  return result;
}

double accuracy(const Matrix& logits, const std::vector<int>& labels) {
  if (labels.size() != std::size_t(logits.rows()))
    throw std::invalid_argument("accuracy: label count mismatch");
  if (logits.rows() == 0) return 0.0;
  int correct = 0;
  for (int r = 0; r < logits.rows(); ++r) {
    const double* row = logits.row_ptr(r);
    int best = 0;
    for (int c = 1; c < logits.cols(); ++c)
      if (row[c] > row[best]) best = c;
    if (best == labels[r]) ++correct;
  }
  return static_cast<double>(correct) / logits.rows();
}

double AdamConfig::lr_at_epoch(int epoch) const {
  return base_lr * std::pow(decay, epoch);
}

AdamOptimizer::AdamOptimizer(const ParamRegistry& reg, const AdamConfig& cfg) : cfg_(cfg) {
  m_.reserve(reg.size());
  v_.reserve(reg.size());
  for (const ParamRef& p : reg) {
    m_.emplace_back(p.size, 0.0);
    v_.emplace_back(p.size, 0.0);
  }
}

void AdamOptimizer::step(const ParamRegistry& reg, int epoch) {
  if (reg.size() != m_.size())
    throw std::invalid_argument("adam: registry size changed");
  ++t_;
  const double lr = cfg_.lr_at_epoch(epoch);
  const double bias1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));

  for (std::size_t e = 0; e < reg.size(); ++e) {
    const ParamRef& p = reg[e];
    if (p.size != m_[e].size())
      throw std::invalid_argument("adam: parameter " + p.name + " changed size");
    double* m = m_[e].data();
    double* v = v_[e].data();
#pragma omp parallel for schedule(static) if (p.size > 65536)
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(p.size); ++i) {
      const double g = p.grad[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      p.value[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
    }
  }
}

void save_checkpoint(const ParamRegistry& reg, std::ostream& out) {
  out << "NEARCKPT 1\n" << reg.size() << '\n';
  char buf[40];
  for (const ParamRef& p : reg) {
    out << p.name << ' ' << p.size << '\n';
    for (std::size_t i = 0; i < p.size; ++i) {
      std::snprintf(buf, sizeof buf, "%a", p.value[i]);
      out << buf << (i + 1 == p.size ? '\n' : ' ');
    }
    if (p.size == 0) out << '\n';
  }
}

void load_checkpoint(const ParamRegistry& reg, std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "NEARCKPT" || version != 1)
    throw std::runtime_error("checkpoint: bad header");
  std::size_t count = 0;
  in >> count;
  if (count != reg.size())
    throw std::runtime_error("checkpoint: tensor count mismatch");
  for (const ParamRef& p : reg) {
    std::string name;
    std::size_t size = 0;
    if (!(in >> name >> size) || name != p.name || size != p.size)
      throw std::runtime_error("checkpoint: tensor " + p.name + " mismatch (got " + name + ")");
    for (std::size_t i = 0; i < size; ++i) {
      std::string token;
      if (!(in >> token)) throw std::runtime_error("checkpoint: truncated values");
      p.value[i] = std::strtod(token.c_str(), nullptr);
    }
  }
}

}  // namespace near
