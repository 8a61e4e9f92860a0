// Copyright (c) 2026 The qderk authors.
// Distributed under the MIT license; see LICENSE for details.

#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "qderk/extreal.hpp"

namespace qderk {

class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t n) : e_(n) {}
  DenseVector(std::initializer_list<ExtReal> init) : e_(init) {}

  std::size_t size() const { return e_.size(); }
  ExtReal& operator[](std::size_t i) { return e_[i]; }
  const ExtReal& operator[](std::size_t i) const { return e_[i]; }

  auto begin() { return e_.begin(); }
  auto end() { return e_.end(); }
  auto begin() const { return e_.begin(); }
  auto end() const { return e_.end(); }

 private:
  std::vector<ExtReal> e_;
};

class DenseMatrix {
 public:
  DenseMatrix() : rows_(0), cols_(0) {}
  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), e_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  ExtReal& operator()(std::size_t i, std::size_t j) { return e_[i * cols_ + j]; }
  const ExtReal& operator()(std::size_t i, std::size_t j) const {
    return e_[i * cols_ + j];
  }

 private:
  std::size_t rows_, cols_;
  std::vector<ExtReal> e_;
};

DenseVector operator+(const DenseVector& u, const DenseVector& v);
DenseVector operator-(const DenseVector& u, const DenseVector& v);
DenseVector operator*(const ExtReal& a, const DenseVector& v);

// Hadamard product u .* v; lengths must agree.
DenseVector hadamard(const DenseVector& u, const DenseVector& v);
// Elementwise power v_i^k, k >= 0 (v^0 is the all-ones vector).
DenseVector epow(const DenseVector& v, long k);
ExtReal dot(const DenseVector& u, const DenseVector& v);
// A v.
DenseVector matvec(const DenseMatrix& A, const DenseVector& v);
// u contracted with the first index of A, i.e. A^T u.
DenseVector tmatvec(const DenseMatrix& A, const DenseVector& u);
DenseVector ones(std::size_t n, mpfr_prec_t prec = ExtReal::default_precision());
DenseVector unit(std::size_t n, std::size_t i,
                 mpfr_prec_t prec = ExtReal::default_precision());

ExtReal norm_inf(const DenseVector& v);
ExtReal norm_2(const DenseVector& v);

// Solves M x = r by Gaussian elimination with partial (row) pivoting.
// Throws InfeasibleError when a pivot falls below a precision-scaled
// tolerance, signalling a singular block.
DenseVector solve_dense(const DenseMatrix& M, const DenseVector& r);

// Minimizes ||A x - b||_2 by modified Gram-Schmidt QR with one pass of
// reapplication; returns the pair (x, residual norm).  Rank-deficient columns
// are dropped (their coefficients are zero).
std::pair<DenseVector, ExtReal> least_squares(const DenseMatrix& A,
                                              const DenseVector& b);

}  // namespace qderk
