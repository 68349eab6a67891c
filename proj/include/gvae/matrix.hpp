#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gvae {

// Row-major dense matrix of 64-bit floats. All reductions over entries run
// in a fixed left-to-right order, so results are bit-reproducible per build.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row_ptr(std::size_t i) { return data_.data() + i * cols_; }
  const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }
  std::span<double> row(std::size_t i) { return {row_ptr(i), cols_}; }
  std::span<const double> row(std::size_t i) const { return {row_ptr(i), cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void fill(double v);
  void set_zero() { fill(0.0); }
  bool all_finite() const;
  bool same_shape(const DenseMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// 0-1 sparse matrix stored as sorted (row, col) index pairs.
class SparseLevelMatrix {
 public:
  struct Entry {
    std::uint32_t row = 0;
    std::uint32_t col = 0;
    friend auto operator<=>(const Entry&, const Entry&) = default;
  };

  SparseLevelMatrix() = default;
  SparseLevelMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return entries_.size(); }

  // Entries may arrive in any order; finalize() sorts them and rejects
  // duplicates and out-of-bounds indices.
  void add(std::uint32_t row, std::uint32_t col) { entries_.push_back({row, col}); }
  void finalize();

  std::span<const Entry> entries() const { return entries_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Entry> entries_;
};

// out = a * b. Each output entry accumulates over k in ascending order.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
void matmul_into(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);

// a^T * b and a * b^T, same deterministic accumulation order.
DenseMatrix matmul_at(const DenseMatrix& a, const DenseMatrix& b);
void matmul_at_into(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);
DenseMatrix matmul_bt(const DenseMatrix& a, const DenseMatrix& b);
void matmul_bt_into(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);

DenseMatrix densify(const SparseLevelMatrix& s);

// out = s * d, exactly equal to matmul(densify(s), d) given the fixed
// accumulation order.
DenseMatrix spmm(const SparseLevelMatrix& s, const DenseMatrix& d);
void spmm_add_into(const SparseLevelMatrix& s, const DenseMatrix& d, DenseMatrix& out);

}  // namespace gvae
