#include "gvae/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gvae/error.hpp"

namespace gvae {

namespace {

std::string shape_str(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

[[noreturn]] void throw_shape(const char* op, const DenseMatrix& a, const DenseMatrix& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " +
                       shape_str(a.rows(), a.cols()) + " and " +
                       shape_str(b.rows(), b.cols()));
}

}  // namespace

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void DenseMatrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool DenseMatrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void SparseLevelMatrix::finalize() {
  std::sort(entries_.begin(), entries_.end());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Entry& e = entries_[i];
    if (e.row >= rows_ || e.col >= cols_) {
      throw DimensionError("sparse entry (" + std::to_string(e.row) + "," +
                           std::to_string(e.col) + ") out of bounds for " +
                           shape_str(rows_, cols_));
    }
    if (i > 0 && entries_[i - 1] == e) {
      throw DataError("duplicate sparse entry (" + std::to_string(e.row) + "," +
                      std::to_string(e.col) + ")");
    }
  }
}

void matmul_into(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
  if (a.cols() != b.rows()) throw_shape("matmul", a, b);
  out = DenseMatrix(a.rows(), b.cols());
  const std::size_t cols = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* orow = out.row_ptr(i);
    const double* arow = a.row_ptr(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = arow[k];
      const double* brow = b.row_ptr(k);
      for (std::size_t j = 0; j < cols; ++j) orow[j] += aik * brow[j];
    }
  }
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out;
  matmul_into(a, b, out);
  return out;
}

void matmul_at_into(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
  if (a.rows() != b.rows()) throw_shape("matmul_at", a, b);
  out = DenseMatrix(a.cols(), b.cols());
  const std::size_t cols = b.cols();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* arow = a.row_ptr(k);
    const double* brow = b.row_ptr(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      double* orow = out.row_ptr(i);
      const double aki = arow[i];
      for (std::size_t j = 0; j < cols; ++j) orow[j] += aki * brow[j];
    }
  }
}

DenseMatrix matmul_at(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out;
  matmul_at_into(a, b, out);
  return out;
}

void matmul_bt_into(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
  if (a.cols() != b.cols()) throw_shape("matmul_bt", a, b);
  out = DenseMatrix(a.rows(), b.rows());
  const std::size_t inner = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* arow = a.row_ptr(i);
    double* orow = out.row_ptr(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* brow = b.row_ptr(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < inner; ++k) acc += arow[k] * brow[k];
      orow[j] = acc;
    }
  }
}

DenseMatrix matmul_bt(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out;
  matmul_bt_into(a, b, out);
  return out;
}

DenseMatrix densify(const SparseLevelMatrix& s) {
  DenseMatrix out(s.rows(), s.cols());
  for (const auto& e : s.entries()) out(e.row, e.col) = 1.0;
  return out;
}

void spmm_add_into(const SparseLevelMatrix& s, const DenseMatrix& d, DenseMatrix& out) {
  if (s.cols() != d.rows()) {
    throw DimensionError("spmm: incompatible shapes " + shape_str(s.rows(), s.cols()) +
                         " and " + shape_str(d.rows(), d.cols()));
  }
  if (out.rows() != s.rows() || out.cols() != d.cols()) {
    throw DimensionError("spmm: output shape " + shape_str(out.rows(), out.cols()) +
                         " does not match " + shape_str(s.rows(), d.cols()));
  }
  const std::size_t cols = d.cols();
  for (const auto& e : s.entries()) {
    double* orow = out.row_ptr(e.row);
    const double* drow = d.row_ptr(e.col);
    for (std::size_t j = 0; j < cols; ++j) orow[j] += drow[j];
  }
}

DenseMatrix spmm(const SparseLevelMatrix& s, const DenseMatrix& d) {
  DenseMatrix out(s.rows(), d.cols());
  spmm_add_into(s, d, out);
  return out;
}

}  // namespace gvae
