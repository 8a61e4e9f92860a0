// Copyright (c) 2026 The qderk authors.
// Distributed under the MIT license; see LICENSE for details.

#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "qderk/linalg.hpp"
#include "qderk/tableau.hpp"

namespace qderk {

struct ODEProblem {
  int dimension = 0;
  // Deterministic, side-effect free right-hand side f(t, y).
  std::function<DenseVector(const ExtReal&, const DenseVector&)> rhs;
  DenseVector y0;
  ExtReal t0, tf;
};

// atol/rtol have length `dimension` or length 1 (broadcast).
struct AdaptiveConfig {
  DenseVector atol, rtol;
  ExtReal safety = ExtReal(0.9);
  ExtReal alpha_min = ExtReal(0.2);  // 0 < alpha_min < 1 < alpha_max
  ExtReal alpha_max = ExtReal(5);
  ExtReal h0 = ExtReal(0.01);
};

AdaptiveConfig scalar_config(const ExtReal& atol, const ExtReal& rtol,
                             const ExtReal& h0);

struct StepRecord {
  ExtReal t, h, err;
  bool accepted = false;
};

struct IntegrationRun {
  std::vector<ExtReal> times;         // accepted grid, starts at t0
  std::vector<DenseVector> states;    // aligned with times
  std::vector<StepRecord> steps;      // every attempt, in order
  long rhs_evaluations = 0;

  const ExtReal& final_time() const { return times.back(); }
  const DenseVector& final_state() const { return states.back(); }
};

// One step with the main weights; exactly s rhs evaluations (no FSAL or
// stage skipping).  Throws InfeasibleError on a non-finite rhs output.
DenseVector step_fixed(const ButcherTableau& T, const ODEProblem& problem,
                       const ExtReal& t, const DenseVector& y, const ExtReal& h,
                       long* rhs_evals = nullptr);

// Propagates with b (local extrapolation) and returns the error estimate
// Delta = h sum (b_i - b~_i) k_i from the same s stages.  Requires
// T.b_embedded.  Non-finite stages yield a Delta with infinite norm instead
// of throwing, so the adaptive driver can reject the step.
std::pair<DenseVector, DenseVector> step_embedded(const ButcherTableau& T,
                                                  const ODEProblem& problem,
                                                  const ExtReal& t,
                                                  const DenseVector& y,
                                                  const ExtReal& h,
                                                  long* rhs_evals = nullptr);

// Fixed step h from t0 to tf; the last step is shortened to land on tf.
IntegrationRun integrate_fixed(const ButcherTableau& T,
                               const ODEProblem& problem, const ExtReal& h);

// Embedded-pair driver: sc_i = atol_i + max(|y_n,i|, |y_n+1,i|) rtol_i,
// err = sqrt(mean((Delta_i / sc_i)^2)), accept when err <= 1, and
// h_new = h min{alpha_max, max[alpha_min, safety (1/err)^(1/(p-1))]} with
// p = T.claimed_order.  Throws InfeasibleError when h falls below
// 2^(-precision_bits/2) (tf - t0).
IntegrationRun integrate_adaptive(const ButcherTableau& T,
                                  const ODEProblem& problem,
                                  const AdaptiveConfig& cfg);

// Copy of T with every entry rounded to the given precision.
ButcherTableau round_tableau(const ButcherTableau& T, mpfr_prec_t prec);

struct ConvergenceRow {
  ExtReal h, err, p_obs;  // p_obs = 0 on the first row
};

// err(h) = ||y_h(tf) - exact_tf||_2 by fixed-step runs;
// p_obs = log(err_prev / err) / log(h_prev / h).
std::vector<ConvergenceRow> convergence_study(const ButcherTableau& T,
                                              const ODEProblem& problem,
                                              const DenseVector& exact_tf,
                                              const std::vector<ExtReal>& h_list);

struct ScanPoint {
  double re = 0, im = 0;
  bool theory = false, observed = false;
};

// Integrates y' = lambda y with h lambda = z for n_steps from y0 = 1 in
// complex double arithmetic over the inclusive grid [re0, re1] x [im0, im1];
// observed stability means |y_n| <= 1 (overflow counts as unstable), theory
// is |R(z)| <= 1.
std::vector<ScanPoint> stability_scan(const ButcherTableau& T, double re0,
                                      double re1, int nx, double im0,
                                      double im1, int ny, int n_steps);

// Lorenz-63 with sigma = 10, rho = 28, beta = 8/3 and y0 = (1, 1, 1).
ODEProblem lorenz63(const ExtReal& t_end,
                    mpfr_prec_t prec = ExtReal::default_precision());

// T_h = first coarse grid time with ||u_h - u_{h/2}||_2 > tol on Lorenz-63
// (fixed steps, precision taken from T); t_end when never exceeded.
ExtReal predictability_time(const ButcherTableau& T, const ExtReal& h,
                            const ExtReal& tol, const ExtReal& t_end);

struct GlobalErrorRow {
  ExtReal h, err, err_over_hp;
};

// err = ||y_h(t_f) - reference||_2 on Lorenz-63, normalized by h^p with
// p = T.claimed_order.
std::vector<GlobalErrorRow> global_error_study(const ButcherTableau& T,
                                               const ExtReal& t_f,
                                               const std::vector<ExtReal>& h_list,
                                               const DenseVector& reference);

// Reference Lorenz-63 state at t_f: the constructed order-10 method at
// fixed step t_f / 2^16 in 256-bit arithmetic.
DenseVector lorenz_reference(const ExtReal& t_f, mpfr_prec_t prec = 256);

}  // namespace qderk
