#include "chemclip/matrix.hpp"

#include <cmath>
#include <string>

#include "chemclip/error.hpp"
#include "chemclip/parallel.hpp"

namespace chemclip {
namespace {

[[noreturn]] void mismatch(const char* op, const Matrix& a, const Matrix& b) {
  throw Error(ErrorCode::kDimensionMismatch, std::string(op) + ": " + std::to_string(a.rows()) + "x" +
                                                 std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                                 std::to_string(b.cols()));
}

constexpr std::size_t kRowsPerTask = 16;

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw Error(ErrorCode::kDimensionMismatch, "data length does not match shape");
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(ErrorCode::kDimensionMismatch, "ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Matrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) mismatch("matmul", a, b);
  Matrix out(a.rows(), b.cols());
  const std::size_t n = b.cols();
  parallel_for(a.rows(), kRowsPerTask, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double* dst = out.row(i).data();
      const auto src = a.row(i);
      for (std::size_t k = 0; k < a.cols(); ++k) {
        const double x = src[k];
        if (x == 0.0) continue;
        const double* brow = b.row(k).data();
        for (std::size_t j = 0; j < n; ++j) dst[j] += x * brow[j];
      }
    }
  });
  return out;
}

Matrix matmul_transpose_a(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) mismatch("matmul_transpose_a", a, b);
  Matrix out(a.cols(), b.cols());
  const std::size_t n = b.cols();
  // Output rows are independent: row k accumulates a(i,k) * b(i,:) over i in
  // ascending order, so the reduction order is fixed.
  parallel_for(a.cols(), kRowsPerTask, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const auto arow = a.row(i);
      const double* brow = b.row(i).data();
      for (std::size_t k = begin; k < end; ++k) {
        const double x = arow[k];
        if (x == 0.0) continue;
        double* dst = out.row(k).data();
        for (std::size_t j = 0; j < n; ++j) dst[j] += x * brow[j];
      }
    }
  });
  return out;
}

Matrix matmul_transpose_b(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) mismatch("matmul_transpose_b", a, b);
  Matrix out(a.rows(), b.rows());
  parallel_for(a.rows(), kRowsPerTask, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = dot(a.row(i), b.row(j));
    }
  });
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  }
  return out;
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= m.rows()) throw Error(ErrorCode::kDimensionMismatch, "gather_rows index out of range");
    std::copy(m.row(rows[i]).begin(), m.row(rows[i]).end(), out.row(i).begin());
  }
  return out;
}

Matrix vstack(std::span<const Matrix> parts) {
  std::size_t rows = 0;
  const std::size_t cols = parts.empty() ? 0 : parts.front().cols();
  for (const auto& p : parts) {
    if (p.cols() != cols && p.rows() > 0) throw Error(ErrorCode::kDimensionMismatch, "vstack column mismatch");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::size_t r = 0;
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < p.rows(); ++i, ++r) std::copy(p.row(i).begin(), p.row(i).end(), out.row(r).begin());
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

}  // namespace chemclip
