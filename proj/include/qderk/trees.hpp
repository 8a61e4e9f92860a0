// Copyright (c) 2026 The qderk authors.
// Distributed under the MIT license; see LICENSE for details.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qderk/linalg.hpp"
#include "qderk/tableau_fwd.hpp"

namespace qderk {

// A rooted tree in canonical form: children sorted by their canonical
// encodings, so isomorphic trees compare equal.
struct RootedTree {
  std::vector<RootedTree> children;
  int order = 1;                  // node count |t|
  std::uint64_t gamma = 1;        // density, gamma(t) = |t| * prod gamma(t_i)
  std::uint64_t sigma = 1;        // symmetry (automorphism group order)
  std::string encoding;           // canonical nested-parenthesis string

  // Builds the canonical form (sorts children, fills the cached fields).
  static RootedTree make(std::vector<RootedTree> children);
  static RootedTree leaf();
};

// All non-isomorphic rooted trees with 1 <= |t| <= p_max, grouped by order
// (result[k] holds the trees of order k + 1) in a deterministic order.
std::vector<std::vector<RootedTree>> enumerate_trees(int p_max);

// Phi(t) via Phi(leaf) = 1, Phi([t_1 ... t_k]) = hadamard_i (A Phi(t_i)).
DenseVector phi_vector(const ButcherTableau& T, const RootedTree& t);

// weights . Phi(t); the caller passes b or the embedded weights.
ExtReal elementary_weight(const ButcherTableau& T, const RootedTree& t,
                          const DenseVector& weights);

struct OrderReport {
  int order_verified = 0;
  // residual phi(t) - 1/gamma(t) per canonical encoding
  std::map<std::string, ExtReal> residuals;
  std::vector<ExtReal> max_abs_residual_per_order;  // index k: order k + 1

  std::string to_csv() const;
};

OrderReport verify_order(const ButcherTableau& T, int p_max,
                         const DenseVector& weights, const ExtReal& tol);
// Convenience overload: main weights, tolerance 2^(-precision/2).
OrderReport verify_order(const ButcherTableau& T, int p_max);

// ||tau^(p+1)||_2 with entries (phi(t) - 1/gamma(t)) / sigma(t) over the
// trees of order p + 1.
ExtReal principal_error_norm(const ButcherTableau& T, int p);

}  // namespace qderk
