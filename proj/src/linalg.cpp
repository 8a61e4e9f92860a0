// Copyright (c) 2026 The qderk authors.
// Distributed under the MIT license; see LICENSE for details.

#include "qderk/linalg.hpp"

#include <stdexcept>
#include <utility>

#include "qderk/errors.hpp"

namespace qderk {

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace

DenseVector operator+(const DenseVector& u, const DenseVector& v) {
  require(u.size() == v.size(), "vector length mismatch");
  DenseVector r(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) r[i] = u[i] + v[i];
  return r;
}

DenseVector operator-(const DenseVector& u, const DenseVector& v) {
  require(u.size() == v.size(), "vector length mismatch");
  DenseVector r(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) r[i] = u[i] - v[i];
  return r;
}

DenseVector operator*(const ExtReal& a, const DenseVector& v) {
  DenseVector r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = a * v[i];
  return r;
}

DenseVector hadamard(const DenseVector& u, const DenseVector& v) {
  require(u.size() == v.size(), "hadamard: length mismatch");
  DenseVector r(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) r[i] = u[i] * v[i];
  return r;
}

DenseVector epow(const DenseVector& v, long k) {
  DenseVector r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = pow_int(v[i], k);
  return r;
}

ExtReal dot(const DenseVector& u, const DenseVector& v) {
  require(u.size() == v.size(), "dot: length mismatch");
  ExtReal s = 0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

DenseVector matvec(const DenseMatrix& A, const DenseVector& v) {
  require(A.cols() == v.size(), "matvec: dimension mismatch");
  DenseVector r(A.rows());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    ExtReal s = 0;
    for (std::size_t j = 0; j < A.cols(); ++j) s += A(i, j) * v[j];
    r[i] = s;
  }
  return r;
}

DenseVector tmatvec(const DenseMatrix& A, const DenseVector& u) {
  require(A.rows() == u.size(), "tmatvec: dimension mismatch");
  DenseVector r(A.cols());
  for (std::size_t j = 0; j < A.cols(); ++j) r[j] = ExtReal(0);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    for (std::size_t j = 0; j < A.cols(); ++j) r[j] += A(i, j) * u[i];
  }
  return r;
}

DenseVector ones(std::size_t n, mpfr_prec_t prec) {
  DenseVector r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = ExtReal(1, prec);
  return r;
}

DenseVector unit(std::size_t n, std::size_t i, mpfr_prec_t prec) {
  DenseVector r(n);
  for (std::size_t j = 0; j < n; ++j) r[j] = ExtReal(j == i ? 1 : 0, prec);
  return r;
}

ExtReal norm_inf(const DenseVector& v) {
  ExtReal m = 0;
  for (std::size_t i = 0; i < v.size(); ++i) m = max(m, abs(v[i]));
  return m;
}

ExtReal norm_2(const DenseVector& v) {
  ExtReal s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * v[i];
  return sqrt(s);
}

DenseVector solve_dense(const DenseMatrix& M, const DenseVector& r) {
  require(M.rows() == M.cols(), "solve_dense: matrix not square");
  require(M.rows() == r.size(), "solve_dense: dimension mismatch");
  const std::size_t n = M.rows();
  DenseMatrix U = M;
  DenseVector x = r;

  mpfr_prec_t prec = ExtReal::default_precision();
  for (std::size_t i = 0; i < n * n; ++i) {
    prec = std::max(prec, U(i / n, i % n).precision());
  }
  // Pivot threshold scaled by the matrix magnitude.
  ExtReal scale = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) scale = max(scale, abs(U(i, j)));
  if (scale.is_zero()) scale = ExtReal(1, prec);
  ExtReal tol = scale * pow_int(ExtReal(0.5, prec), prec - 16);

  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    ExtReal best = abs(U(perm[k], k));
    for (std::size_t i = k + 1; i < n; ++i) {
      ExtReal a = abs(U(perm[i], k));
      if (a > best) {
        best = a;
        piv = i;
      }
    }
    if (best <= tol) {
      throw InfeasibleError("solve_dense: singular block (pivot " +
                            std::to_string(k) + " below tolerance)");
    }
    std::swap(perm[k], perm[piv]);
    const std::size_t rk = perm[k];
    for (std::size_t i = k + 1; i < n; ++i) {
      const std::size_t ri = perm[i];
      ExtReal f = U(ri, k) / U(rk, k);
      if (f.is_zero()) continue;
      for (std::size_t j = k + 1; j < n; ++j) U(ri, j) -= f * U(rk, j);
      x[ri] -= f * x[rk];
    }
  }

  DenseVector sol(n);
  for (std::size_t kk = n; kk-- > 0;) {
    const std::size_t rk = perm[kk];
    ExtReal s = x[rk];
    for (std::size_t j = kk + 1; j < n; ++j) s -= U(rk, j) * sol[j];
    sol[kk] = s / U(rk, kk);
  }
  return sol;
}

std::pair<DenseVector, ExtReal> least_squares(const DenseMatrix& A,
                                              const DenseVector& b) {
  require(A.rows() == b.size(), "least_squares: dimension mismatch");
  const std::size_t m = A.rows(), n = A.cols();

  // Orthonormal columns built by modified Gram-Schmidt with reorthogonalization.
  std::vector<DenseVector> q;
  std::vector<std::size_t> cols;
  DenseMatrix R(n, n);
  ExtReal drop_tol = pow_int(ExtReal(0.5), ExtReal::default_precision() / 2);

  for (std::size_t j = 0; j < n; ++j) {
    DenseVector v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = A(i, j);
    ExtReal orig = norm_2(v);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < q.size(); ++k) {
        ExtReal c = dot(q[k], v);
        R(cols[k], j) += c;
        v = v - c * q[k];
      }
    }
    ExtReal nv = norm_2(v);
    if (orig.is_zero() || nv <= drop_tol * orig) continue;  // dependent column
    R(j, j) = nv;
    ExtReal inv = ExtReal(1) / nv;
    q.push_back(inv * v);
    cols.push_back(j);
  }

  // Project b and back-substitute over the retained columns.
  DenseVector res = b;
  DenseVector y(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) {
    y[k] = dot(q[k], b);
  }
  for (std::size_t k = 0; k < q.size(); ++k) res = res - y[k] * q[k];
  // One reorthogonalization pass on the residual for accuracy.
  for (std::size_t k = 0; k < q.size(); ++k) {
    ExtReal c = dot(q[k], res);
    y[k] += c;
    res = res - c * q[k];
  }

  DenseVector x(n);
  for (std::size_t j = 0; j < n; ++j) x[j] = ExtReal(0);
  for (std::size_t kk = q.size(); kk-- > 0;) {
    ExtReal s = y[kk];
    for (std::size_t jj = kk + 1; jj < q.size(); ++jj) {
      s -= R(cols[kk], cols[jj]) * x[cols[jj]];
    }
    x[cols[kk]] = s / R(cols[kk], cols[kk]);
  }
  return {x, norm_2(res)};
}

}  // namespace qderk
