#include "near/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace near {

namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(what) + ": shape mismatch " +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
}

void check_inner(int a_cols, int b_rows, const char* what) {
  if (a_cols != b_rows)
    throw std::invalid_argument(std::string(what) + ": inner dimensions " +
                                std::to_string(a_cols) + " vs " + std::to_string(b_rows));
}

}  // namespace

Matrix Matrix::random_uniform(int rows, int cols, double lo, double hi, SplitMix64& rng) {
  Matrix m(rows, cols);
  for (double& x : m.data()) x = rng.uniform(lo, hi);
  return m;
}

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Matrix::all_finite() const {
  for (double x : data_)
    if (!std::isfinite(x)) return false;
  return true;
}

// Row-parallel ikj product. Each output element is accumulated by one thread
// in ascending k order, so the result is bit-identical to serial::matmul.
Matrix matmul(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.rows(), "matmul");
  Matrix c(a.rows(), b.cols());
  const int rows = a.rows(), inner = a.cols(), cols = b.cols();
#pragma omp parallel for schedule(static) if (std::size_t(rows) * inner * cols > 32768)
  for (int i = 0; i < rows; ++i) {
    double* crow = c.row_ptr(i);
    const double* arow = a.row_ptr(i);
    for (int k = 0; k < inner; ++k) {
      const double aik = arow[k];
      const double* brow = b.row_ptr(k);
      for (int j = 0; j < cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Matrix matmul_transpose_a(const Matrix& a, const Matrix& b) {
  check_inner(a.rows(), b.rows(), "matmul_transpose_a");
  Matrix c(a.cols(), b.cols());
  const int rows = a.cols(), inner = a.rows(), cols = b.cols();
#pragma omp parallel for schedule(static) if (std::size_t(rows) * inner * cols > 32768)
  for (int i = 0; i < rows; ++i) {
    double* crow = c.row_ptr(i);
    for (int k = 0; k < inner; ++k) {
      const double aki = a(k, i);
      const double* brow = b.row_ptr(k);
      for (int j = 0; j < cols; ++j) crow[j] += aki * brow[j];
    }
  }
  return c;
}

Matrix matmul_transpose_b(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.cols(), "matmul_transpose_b");
  Matrix c(a.rows(), b.rows());
  const int rows = a.rows(), inner = a.cols(), cols = b.rows();
#pragma omp parallel for schedule(static) if (std::size_t(rows) * inner * cols > 32768)
  for (int i = 0; i < rows; ++i) {
    double* crow = c.row_ptr(i);
    const double* arow = a.row_ptr(i);
    for (int j = 0; j < cols; ++j) {
      const double* brow = b.row_ptr(j);
      double sum = 0.0;
      for (int k = 0; k < inner; ++k) sum += arow[k] * brow[k];
      crow[j] = sum;
    }
  }
  return c;
}

Matrix add(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "add");
  Matrix c = a;
  add_in_place(c, b);
  return c;
}

void add_in_place(Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "add_in_place");
  double* pa = a.data().data();
  const double* pb = b.data().data();
  const std::size_t n = a.size();
#pragma omp parallel for schedule(static) if (n > 65536)
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(n); ++i) pa[i] += pb[i];
}

void scale_in_place(Matrix& a, double factor) {
  for (double& x : a.data()) x *= factor;
}

void add_row_vector_in_place(Matrix& a, const std::vector<double>& row) {
  if (row.size() != std::size_t(a.cols()))
    throw std::invalid_argument("add_row_vector: width mismatch");
  for (int i = 0; i < a.rows(); ++i) {
    double* arow = a.row_ptr(i);
    for (int j = 0; j < a.cols(); ++j) arow[j] += row[j];
  }
}

std::vector<double> column_sums(const Matrix& a) {
  std::vector<double> sums(a.cols(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    const double* arow = a.row_ptr(i);
    for (int j = 0; j < a.cols(); ++j) sums[j] += arow[j];
  }
  return sums;
}

Matrix extract_rows(const Matrix& a, int first, int count) {
  if (first < 0 || count < 0 || first + count > a.rows())
    throw std::out_of_range("extract_rows: bad row range");
  Matrix out(count, a.cols());
  std::copy(a.row_ptr(first), a.row_ptr(first) + std::size_t(count) * a.cols(),
            out.data().begin());
  return out;
}

Matrix concat_columns(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows())
    throw std::invalid_argument("concat_columns: row count mismatch");
  Matrix out(a.rows(), a.cols() + b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    double* orow = out.row_ptr(i);
    std::copy(a.row_ptr(i), a.row_ptr(i) + a.cols(), orow);
    std::copy(b.row_ptr(i), b.row_ptr(i) + b.cols(), orow + a.cols());
  }
  return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.rows(), "serial::matmul");
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    double* crow = c.row_ptr(i);
    const double* arow = a.row_ptr(i);
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = arow[k];
      const double* brow = b.row_ptr(k);
      for (int j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

}  // namespace serial

}  // namespace near
