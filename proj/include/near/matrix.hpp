#pragma once

#include <cstddef>
#include <vector>

#include "near/rng.hpp"

namespace near {

// Dense row-major matrix of 64-bit floats. 64-bit everywhere: the collapse
// checks assert equality at 1e-8, which single precision noise would blur.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(std::size_t(rows) * cols, 0.0) {}

  static Matrix random_uniform(int rows, int cols, double lo, double hi, SplitMix64& rng);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(int r, int c) { return data_[std::size_t(r) * cols_ + c]; }
  const double& operator()(int r, int c) const { return data_[std::size_t(r) * cols_ + c]; }

  double* row_ptr(int r) { return data_.data() + std::size_t(r) * cols_; }
  const double* row_ptr(int r) const { return data_.data() + std::size_t(r) * cols_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void fill(double value);
  bool all_finite() const;
  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool operator==(const Matrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// a (r x k) times b (k x c). Throws std::invalid_argument on shape mismatch.
Matrix matmul(const Matrix& a, const Matrix& b);
// a^T b and a b^T, used by the backward passes.
Matrix matmul_transpose_a(const Matrix& a, const Matrix& b);
Matrix matmul_transpose_b(const Matrix& a, const Matrix& b);

Matrix add(const Matrix& a, const Matrix& b);
void add_in_place(Matrix& a, const Matrix& b);
void scale_in_place(Matrix& a, double factor);
void add_row_vector_in_place(Matrix& a, const std::vector<double>& row);
std::vector<double> column_sums(const Matrix& a);
Matrix extract_rows(const Matrix& a, int first, int count);
Matrix concat_columns(const Matrix& a, const Matrix& b);

double max_abs_diff(const Matrix& a, const Matrix& b);

// Serial reference kernels; same per-element operation order as the OpenMP
// versions above, kept for the parity tests and the benchmark.
namespace serial {
Matrix matmul(const Matrix& a, const Matrix& b);
}

}  // namespace near
