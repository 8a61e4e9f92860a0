// Copyright (c) 2026 The qderk authors.
// Distributed under the MIT license; see LICENSE for details.

#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qderk/constructor.hpp"
#include "qderk/tableau.hpp"

namespace qderk {

// Flat parameter layout: q_nodes | per-cluster non-ghost stage weights |
// free_A_Q entries | free_A_D entries, each block in its index order.  The
// ghost stage weight of a cluster is the cluster's quadrature weight minus
// the encoded ones, so every decoded split sums correctly by construction.
std::vector<double> encode_parameters(const StageLayout& layout,
                                      const FreeParameters& fp);
FreeParameters decode_parameters(const StageLayout& layout,
                                 const std::vector<double>& x);

// Reads the free parameters back out of a tableau produced by construct().
FreeParameters extract_free_parameters(const StageLayout& layout,
                                       const ButcherTableau& T);

// Per-coordinate affine search scales: 0.1 for nodes, 0.1 x cluster weight
// for stage weights, 0.2 for free A entries.
std::vector<double> parameter_scales(const StageLayout& layout);

struct FitnessConfig {
  double w_err = 1;
  double w_stab = 1;
  double w_area = 1;
  double w_interval = 1;
  double w_convex = 10;
  double y_max_factor = 1.2;  // proxy extent relative to the real interval
  int proxy_lines = 64;
  mpfr_prec_t eval_precision = 128;
};

// J = w_err (-1 / ||tau^(p+1)||, clamped at -1e12)
//   + w_stab (-w_area S_proxy - w_interval L_interval + w_convex P).
// Infeasible parameter vectors return 1e6 plus a node-separation shortfall
// instead of throwing.
double fitness(const std::vector<double>& x, int p, const FitnessConfig& cfg);

struct CMAResult {
  std::vector<double> best;
  double best_fitness = 0;
  std::vector<double> history;  // best-so-far after each generation
};

// Standard (mu/mu_w, lambda) CMA-ES with rank-one and rank-mu updates;
// lambda = 0 selects 4 + floor(3 ln dim).  Deterministic for a fixed seed.
// The initial mean is evaluated once and seeds best-so-far.
CMAResult cma_es_minimize(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x0, double sigma0, int generations,
    unsigned long seed, int lambda = 0);

struct OptimizeReport {
  FitnessConfig config;
  std::vector<double> history;
  double best_fitness = 0;
  double error_norm = 0;  // winner ||tau^(p+1)||_2 at full precision
  double real_interval = 0;
  double area_proxy = 0;
  double convexity_penalty = 0;
  int verified_order = 0;
};

// CMA-ES from the construction defaults in scaled coordinates; the winner is
// rebuilt at full precision and re-verified (precision doubled up to twice
// before a VerificationError).  Requires even p >= 6.
std::pair<ButcherTableau, OptimizeReport> optimize_method(int p,
                                                          const FitnessConfig& cfg,
                                                          int generations,
                                                          unsigned long seed);

std::string serialize_report(const OptimizeReport& rep);

}  // namespace qderk
