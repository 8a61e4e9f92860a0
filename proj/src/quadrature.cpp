// Copyright (c) 2026 The qderk authors.
// Distributed under the MIT license; see LICENSE for details.

#include "qderk/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include "qderk/errors.hpp"

namespace qderk {

namespace {

// Legendre P_n(x) and P'_n(x) on [-1, 1] by the three-term recurrence.
void legendre(int n, const ExtReal& x, ExtReal* p, ExtReal* dp) {
  ExtReal p0(1, x.precision()), p1 = x;
  if (n == 0) {
    *p = p0;
    *dp = ExtReal(0, x.precision());
    return;
  }
  for (int k = 2; k <= n; ++k) {
    ExtReal pk = (ExtReal(2 * k - 1) * x * p1 - ExtReal(k - 1) * p0) / ExtReal(k);
    p0 = p1;
    p1 = pk;
  }
  *p = p1;
  // (1 - x^2) P'_n = n (P_{n-1} - x P_n).
  ExtReal one(1, x.precision());
  *dp = ExtReal(n) * (p0 - x * p1) / (one - x * x);
}

}  // namespace

QuadratureRule lobatto_rule(int N, mpfr_prec_t precision_bits) {
  if (N < 2) throw ValidationError("lobatto_rule: N must be at least 2");

  QuadratureRule rule;
  rule.N = N;
  rule.nodes = DenseVector(N);
  rule.weights = DenseVector(N);

  const int n = N - 1;  // Legendre degree
  const ExtReal one(1, precision_bits);
  const ExtReal half(0.5, precision_bits);
  const ExtReal nn(static_cast<long>(N) * (N - 1), precision_bits);
  ExtReal stop = pow_int(ExtReal(0.5, precision_bits), precision_bits - 8);

  rule.nodes[0] = ExtReal(0, precision_bits);
  rule.nodes[N - 1] = ExtReal(1, precision_bits);
  rule.weights[0] = one / nn;
  rule.weights[N - 1] = one / nn;

  for (int k = 1; k <= N - 2; ++k) {
    // Chebyshev-flavored initial guess for the k-th root of P'_n.
    double guess = -std::cos(M_PI * k / n);
    ExtReal xi(guess, precision_bits);
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
      ExtReal p, dp;
      legendre(n, xi, &p, &dp);
      // (1 - x^2) P''_n = 2 x P'_n - n(n+1) P_n.
      ExtReal ddp = (ExtReal(2) * xi * dp - ExtReal(static_cast<long>(n) * (n + 1)) * p) /
                    (one - xi * xi);
      ExtReal step = dp / ddp;
      xi -= step;
      if (abs(step) < stop) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw InfeasibleError("lobatto_rule: Newton iteration did not converge");
    }
    ExtReal p, dp;
    legendre(n, xi, &p, &dp);
    rule.nodes[k] = half * (xi + one);
    rule.weights[k] = one / (nn * p * p);
  }

  for (int k = 0; k + 1 < N; ++k) {
    if (!(rule.nodes[k] < rule.nodes[k + 1])) {
      throw InfeasibleError("lobatto_rule: nodes not strictly increasing");
    }
  }
  return rule;
}

}  // namespace qderk
