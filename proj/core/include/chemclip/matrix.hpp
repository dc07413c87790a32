#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace chemclip {

// Dense row-major matrix of doubles. A value type: copies are deep.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void fill(double value);
  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// a * b. Zero entries of `a` are skipped, which keeps sparse binary inputs
// cheap. Throws Error(kDimensionMismatch).
Matrix matmul(const Matrix& a, const Matrix& b);
// a^T * b, again skipping zeros of `a`.
Matrix matmul_transpose_a(const Matrix& a, const Matrix& b);
// a * b^T.
Matrix matmul_transpose_b(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);
// Rows of m selected by index, in the given order.
Matrix gather_rows(const Matrix& m, std::span<const std::size_t> rows);
// Stacks matrices with equal column counts.
Matrix vstack(std::span<const Matrix> parts);

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);

}  // namespace chemclip
