// Copyright (c) 2026 The qderk authors.
// Distributed under the MIT license; see LICENSE for details.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qderk/extreal.hpp"
#include "qderk/linalg.hpp"

namespace qderk {

// An explicit Runge-Kutta tableau (A, b, c) with optional embedded weights.
// A is strictly lower triangular; all entries are extended precision.
struct ButcherTableau {
  int s = 0;
  DenseVector c;
  DenseVector b;
  DenseMatrix A;
  std::optional<DenseVector> b_embedded;
  std::optional<int> claimed_order;
  mpfr_prec_t precision_bits = 256;
};

// q_n = A c^(.n) - c^(.(n+1)) / (n+1).
DenseVector q_vector(const ButcherTableau& T, int n);
// d_n = (w . c^(.n)) x^1 A - w . (1 - c^(.(n+1))) / (n+1).
DenseVector d_vector(const ButcherTableau& T, int n, const DenseVector& weights);
DenseVector d_vector(const ButcherTableau& T, int n);  // weights = b

// One generator of a recursively built subspace, with its provenance.
struct Generator {
  DenseVector v;
  std::string provenance;
};

struct SubspaceBasis {
  int level = 0;
  std::vector<Generator> generators;
};

// Q_1 = span{q_0}; Q_k adds q_{k-1}, A g and g . c for g in Q_{k-1}.
std::vector<SubspaceBasis> q_space_basis(const ButcherTableau& T, int m);
// D_1 = span{d_0}; D_k adds d_{k-1}, g x^1 A and g . c for g in D_{k-1}.
std::vector<SubspaceBasis> d_space_basis(const ButcherTableau& T, int n,
                                         const DenseVector& weights);
std::vector<SubspaceBasis> d_space_basis(const ButcherTableau& T, int n);

struct SufficiencyReport {
  int p = 0, m = 0, n = 0;
  bool pass_B = false, pass_QO = false, pass_DO = false, pass_QD = false,
       pass_QR = false;
  ExtReal worst_B, worst_QO, worst_DO, worst_QD, worst_QR;
  bool all_pass() const { return pass_B && pass_QO && pass_DO && pass_QD && pass_QR; }
};

// Tests B(p), QO(m), DO(n), QD(m,n) and QR(m) at generator level.
// Requires m >= n - 1 and m + n + 1 >= p.
SufficiencyReport check_sufficiency(const ButcherTableau& T, int p, int m,
                                    int n, const DenseVector& weights,
                                    const ExtReal& tol);
SufficiencyReport check_sufficiency(const ButcherTableau& T, int p, int m, int n);

// Fraction of nonzero strictly-lower-triangular entries of A.
ExtReal sparsity_density(const ButcherTableau& T);

// JSON document round trip (format_version 1; decimal strings).
std::string serialize(const ButcherTableau& T);
ButcherTableau deserialize(const std::string& document);
ButcherTableau load_tableau(const std::string& path);
void save_tableau(const ButcherTableau& T, const std::string& path);

}  // namespace qderk
