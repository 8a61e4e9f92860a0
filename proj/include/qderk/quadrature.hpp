// Copyright (c) 2026 The qderk authors.
// Distributed under the MIT license; see LICENSE for details.

#pragma once

#include <vector>

#include "qderk/extreal.hpp"
#include "qderk/linalg.hpp"

namespace qderk {

// N-point Gauss-Lobatto rule on [0, 1]: x_1 = 0 < x_2 < ... < x_N = 1,
// positive weights, exactness degree 2N - 3.
struct QuadratureRule {
  int N = 0;
  DenseVector nodes;
  DenseVector weights;
};

// Interior nodes are the roots of P'_{N-1} (Legendre derivative) mapped to
// [0, 1]; weights come from the closed form w_i = 1/(N(N-1) P_{N-1}(x_i)^2)
// on [-1, 1], halved by the affine map.
QuadratureRule lobatto_rule(int N, mpfr_prec_t precision_bits = ExtReal::default_precision());

}  // namespace qderk
