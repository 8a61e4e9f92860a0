// Copyright (c) 2026 The qderk authors.
// Distributed under the MIT license; see LICENSE for details.

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qderk/linalg.hpp"
#include "qderk/quadrature.hpp"
#include "qderk/tableau.hpp"

namespace qderk {

// Stage arrangement for the even-order construction.  All stage indices are
// 1-based.  With m = p/2 - 1, n = p/2, N = n + 1:
//   stage 1            c = 0
//   Q-groups g=1..m-1  group g holds g free nodes at stages
//                      2+g(g-1)/2 .. 1+g(g+1)/2
//   ghost stages       l+2 .. l+N-1 with c_{l+1+i} = x_{N-i}
//   D-groups j=N-2..1  group j holds x_{N-i} at stage k_j(i) = s-1-j(j+1)/2+i
//   stage s            c = 1
// Cluster i pairs ghost l+1+i with every D-group stage holding x_{N-i}.
struct StageLayout {
  int p = 0, m = 0, n = 0, N = 0, l = 0, s2 = 0, s = 0;
  mpfr_prec_t precision_bits = 256;
  QuadratureRule lobatto;                     // N-point Lobatto rule on [0, 1]
  std::vector<std::pair<int, int>> q_groups;  // inclusive stage ranges
  std::vector<int> ghost_stages;              // l+2 .. l+N-1
  std::vector<std::vector<int>> d_groups;     // [j-1] -> stages k_j(1..j)
  std::vector<std::vector<int>> clusters;     // [i-1] -> stages of S(x_{N-i})
                                              // (ghost first, then D stages)

  int ghost_of_cluster(int i) const { return l + 1 + i; }  // i = 1..N-2
  const ExtReal& cluster_node(int i) const {
    return lobatto.nodes[static_cast<std::size_t>(N - i - 1)];
  }
  const ExtReal& cluster_weight(int i) const {
    return lobatto.weights[static_cast<std::size_t>(N - i - 1)];
  }
};

StageLayout plan_layout(int p,
                        mpfr_prec_t precision_bits = ExtReal::default_precision());

// The adjustable inputs of the construction.  cluster_splits[i-1] is aligned
// with layout.clusters[i-1] and must sum to the cluster's quadrature weight.
// free_A_* keys are 1-based (row, col) indices drawn from free_q_indices /
// free_d_indices.
struct FreeParameters {
  DenseVector q_nodes;  // c_2 .. c_{l+1}
  std::vector<DenseVector> cluster_splits;
  std::map<std::pair<int, int>, ExtReal> free_A_Q;
  std::map<std::pair<int, int>, ExtReal> free_A_D;
};

// Interior Lobatto nodes per Q-group, equal weight split over every cluster
// stage, zero free A entries.
FreeParameters default_free_parameters(const StageLayout& layout);

// Free strictly-lower A entries of the Q region: per level 3 <= k <= m the
// gap columns (k-1)(k-2)/2+2 .. k(k-1)/2+1 of rows j < i <= k(k-1)/2+1.
std::vector<std::pair<int, int>> free_q_indices(const StageLayout& layout);
// Free strictly-lower A entries of the D region: the ghost-block strictly
// lower triangle plus per level 3 <= k <= n the gap entries with
// s-1-k(k-1)/2 < i <= s-1-(k-1)(k-2)/2 and s-k(k-1)/2 <= j < i.
std::vector<std::pair<int, int>> free_d_indices(const StageLayout& layout);
// l + (s-l-N) + |free_q_indices| + |free_d_indices|.
int degrees_of_freedom(const StageLayout& layout);

// Throws ValidationError on size mismatches, duplicate or zero group nodes,
// split sums that miss the quadrature weight, or free entries outside the
// free index sets.
void validate_free_parameters(const StageLayout& layout,
                              const FreeParameters& free);

DenseVector assemble_nodes(const StageLayout& layout, const FreeParameters& free);
DenseVector assemble_weights(const StageLayout& layout,
                             const FreeParameters& free);

// One linear equation sum coeff * a_{i,j} = rhs over strictly-lower A entries.
struct LinTerm {
  int i = 0, j = 0;
  ExtReal coeff;
};
struct LinEq {
  std::vector<LinTerm> terms;
  ExtReal rhs;
  int level = 0;  // recursion level the equation enforces
};

// A square block: variables are solved together; terms outside the variable
// list are looked up in the working matrix when the block is reached.
struct Block {
  int level = 0;  // K of the column (D) or row (Q)
  int index = 0;  // column (D) or row (Q)
  std::vector<std::pair<int, int>> vars;
  std::vector<LinEq> eqs;
};

struct BlockSystem {
  char kind = 'D';  // 'D': sequential lower-triangular; 'Q': independent
  int s = 0;
  std::vector<Block> blocks;
  std::vector<int> level_equation_counts;  // |I_k|, k = 1..n or 1..m
  int total_variables() const;
};

// Column systems j = s-1 down to l+2; ghost columns are tested against the
// cluster indicator, D-group columns against the unit vector.
BlockSystem assemble_d_system(const StageLayout& layout, const DenseVector& b,
                              const DenseVector& c, const FreeParameters& free);
// Row systems i = 2..s: row sum, forced gap zeros, and q_r conditions.
BlockSystem assemble_q_system(const StageLayout& layout, const DenseVector& c,
                              const FreeParameters& free);

// Solves the blocks in order, substituting solved values into later blocks'
// right-hand sides, and writes results into A (which must already hold the
// free-parameter entries).  Throws InfeasibleError naming level and block on
// a singular diagonal block.
void solve_d_system(const BlockSystem& sys, DenseMatrix& A);
void solve_q_system(const BlockSystem& sys, DenseMatrix& A);

// Algorithm: plan, validate, assemble b and c, solve the D then the Q
// systems, attach embedded weights.
ButcherTableau construct(int p, const FreeParameters& free,
                         mpfr_prec_t precision_bits = ExtReal::default_precision());
ButcherTableau construct(int p,
                         mpfr_prec_t precision_bits = ExtReal::default_precision());

// b~ = b + d_1; the pair (A, b~, c) has order >= p-2.
DenseVector embedded_weights(const ButcherTableau& T);

// JSON document {"q_nodes": [..], "cluster_splits": [[..]..],
// "free_A_Q": {"i,j": ".."}, "free_A_D": {"i,j": ".."}}; omitted fields keep
// their defaults.
FreeParameters parse_free_parameters(const StageLayout& layout,
                                     const std::string& document);
std::string serialize_free_parameters(const StageLayout& layout,
                                      const FreeParameters& free);

}  // namespace qderk
