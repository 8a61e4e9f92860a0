// Copyright (c) 2026 The qderk authors.
// Distributed under the MIT license; see LICENSE for details.

#include "qderk/integrator.hpp"

#include <complex>
#include <limits>

#include "qderk/constructor.hpp"
#include "qderk/errors.hpp"
#include "qderk/stability.hpp"

namespace qderk {

namespace {

std::size_t u(int i) { return static_cast<std::size_t>(i); }

const ExtReal& comp(const DenseVector& v, std::size_t i) {
  return v.size() == 1 ? v[0] : v[i];
}

bool finite(const DenseVector& v) {
  for (const ExtReal& x : v)
    if (!x.is_finite()) return false;
  return true;
}

// The s stage derivatives k_i = f(t + c_i h, y + h sum_j a_ij k_j).
std::vector<DenseVector> stages(const ButcherTableau& T,
                                const ODEProblem& problem, const ExtReal& t,
                                const DenseVector& y, const ExtReal& h,
                                long* rhs_evals) {
  std::vector<DenseVector> k;
  k.reserve(u(T.s));
  for (int i = 0; i < T.s; ++i) {
    DenseVector yi = y;
    for (int j = 0; j < i; ++j) {
      const ExtReal& a = T.A(u(i), u(j));
      if (a.is_zero()) continue;
      ExtReal ha = h * a;
      for (std::size_t d = 0; d < yi.size(); ++d) yi[d] += ha * k[u(j)][d];
    }
    k.push_back(problem.rhs(t + T.c[u(i)] * h, yi));
    if (rhs_evals) ++*rhs_evals;
  }
  return k;
}

DenseVector combine(const DenseVector& y, const std::vector<DenseVector>& k,
                    const DenseVector& w, const ExtReal& h) {
  DenseVector out = y;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (w[i].is_zero()) continue;
    ExtReal hw = h * w[i];
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += hw * k[i][d];
  }
  return out;
}

ExtReal infinity() { return ExtReal(std::numeric_limits<double>::infinity()); }

}  // namespace

AdaptiveConfig scalar_config(const ExtReal& atol, const ExtReal& rtol,
                             const ExtReal& h0) {
  AdaptiveConfig cfg;
  cfg.atol = DenseVector{atol};
  cfg.rtol = DenseVector{rtol};
  cfg.h0 = h0;
  return cfg;
}

DenseVector step_fixed(const ButcherTableau& T, const ODEProblem& problem,
                       const ExtReal& t, const DenseVector& y, const ExtReal& h,
                       long* rhs_evals) {
  std::vector<DenseVector> k = stages(T, problem, t, y, h, rhs_evals);
  for (const DenseVector& ki : k)
    if (!finite(ki))
      throw InfeasibleError("non-finite right-hand side during step");
  return combine(y, k, T.b, h);
}

std::pair<DenseVector, DenseVector> step_embedded(const ButcherTableau& T,
                                                  const ODEProblem& problem,
                                                  const ExtReal& t,
                                                  const DenseVector& y,
                                                  const ExtReal& h,
                                                  long* rhs_evals) {
  if (!T.b_embedded)
    throw ValidationError("tableau carries no embedded weights");
  std::vector<DenseVector> k = stages(T, problem, t, y, h, rhs_evals);
  for (const DenseVector& ki : k) {
    if (!finite(ki)) {
      DenseVector bad(y.size());
      for (std::size_t d = 0; d < bad.size(); ++d) bad[d] = infinity();
      return {y, bad};
    }
  }
  DenseVector y_next = combine(y, k, T.b, h);
  DenseVector delta(y.size());
  for (std::size_t d = 0; d < delta.size(); ++d) delta[d] = ExtReal(0);
  for (int i = 0; i < T.s; ++i) {
    ExtReal w = h * (T.b[u(i)] - (*T.b_embedded)[u(i)]);
    if (w.is_zero()) continue;
    for (std::size_t d = 0; d < delta.size(); ++d) delta[d] += w * k[u(i)][d];
  }
  return {y_next, delta};
}

IntegrationRun integrate_fixed(const ButcherTableau& T,
                               const ODEProblem& problem, const ExtReal& h) {
  if (!(h > ExtReal(0))) throw ValidationError("step size must be positive");
  IntegrationRun run;
  ExtReal t = problem.t0;
  DenseVector y = problem.y0;
  run.times.push_back(t);
  run.states.push_back(y);
  while (t < problem.tf) {
    ExtReal step = min(h, problem.tf - t);
    y = step_fixed(T, problem, t, y, step, &run.rhs_evaluations);
    t += step;
    run.steps.push_back({t - step, step, ExtReal(0), true});
    run.times.push_back(t);
    run.states.push_back(y);
  }
  return run;
}

IntegrationRun integrate_adaptive(const ButcherTableau& T,
                                  const ODEProblem& problem,
                                  const AdaptiveConfig& cfg) {
  if (!T.claimed_order)
    throw ValidationError("adaptive control needs a claimed order");
  int p = *T.claimed_order;
  ExtReal h_floor = pow_int(ExtReal(0.5), T.precision_bits / 2) *
                    (problem.tf - problem.t0);
  IntegrationRun run;
  ExtReal t = problem.t0, h = cfg.h0;
  DenseVector y = problem.y0;
  run.times.push_back(t);
  run.states.push_back(y);
  while (t < problem.tf) {
    h = min(h, problem.tf - t);
    auto [y_next, delta] = step_embedded(T, problem, t, y, h,
                                         &run.rhs_evaluations);
    // RMS of the scaled components.
    ExtReal sum(0);
    bool ok = finite(delta) && finite(y_next);
    if (ok) {
      for (std::size_t d = 0; d < delta.size(); ++d) {
        ExtReal sc = comp(cfg.atol, d) +
                     max(abs(y[d]), abs(y_next[d])) * comp(cfg.rtol, d);
        ExtReal r = delta[d] / sc;
        sum += r * r;
      }
    }
    ExtReal err = ok ? sqrt(sum / ExtReal(static_cast<int>(delta.size())))
                     : infinity();
    bool accept = ok && err <= ExtReal(1);
    run.steps.push_back({t, h, err, accept});
    if (accept) {
      t += h;
      y = y_next;
      run.times.push_back(t);
      run.states.push_back(y);
    }
    ExtReal factor = cfg.alpha_max;
    if (err > ExtReal(0))
      factor = cfg.safety * exp(log(ExtReal(1) / err) / ExtReal(p - 1));
    h = h * min(cfg.alpha_max, max(cfg.alpha_min, factor));
    if (t < problem.tf && h < h_floor)
      throw InfeasibleError("adaptive step size underflow at t = " +
                            t.to_string(17));
  }
  return run;
}

ButcherTableau round_tableau(const ButcherTableau& T, mpfr_prec_t prec) {
  ButcherTableau R = T;
  R.precision_bits = prec;
  for (int i = 0; i < T.s; ++i) {
    R.c[u(i)] = T.c[u(i)].round_to(prec);
    R.b[u(i)] = T.b[u(i)].round_to(prec);
    for (int j = 0; j < T.s; ++j) R.A(u(i), u(j)) = T.A(u(i), u(j)).round_to(prec);
  }
  if (T.b_embedded)
    for (int i = 0; i < T.s; ++i)
      (*R.b_embedded)[u(i)] = (*T.b_embedded)[u(i)].round_to(prec);
  return R;
}

std::vector<ConvergenceRow> convergence_study(const ButcherTableau& T,
                                              const ODEProblem& problem,
                                              const DenseVector& exact_tf,
                                              const std::vector<ExtReal>& h_list) {
  std::vector<ConvergenceRow> rows;
  for (const ExtReal& h : h_list) {
    IntegrationRun run = integrate_fixed(T, problem, h);
    ExtReal err = norm_2(run.final_state() - exact_tf);
    ExtReal p_obs(0);
    if (!rows.empty() && err > ExtReal(0) && rows.back().err > ExtReal(0))
      p_obs = log(rows.back().err / err) / log(rows.back().h / h);
    rows.push_back({h, err, p_obs});
  }
  return rows;
}

std::vector<ScanPoint> stability_scan(const ButcherTableau& T, double re0,
                                      double re1, int nx, double im0,
                                      double im1, int ny, int n_steps) {
  using C = std::complex<double>;
  // Double-precision copy of the tableau for the simulated integration.
  std::vector<double> b(u(T.s));
  std::vector<std::vector<double>> A(u(T.s), std::vector<double>(u(T.s), 0.0));
  for (int i = 0; i < T.s; ++i) {
    b[u(i)] = T.b[u(i)].to_double();
    for (int j = 0; j < i; ++j) A[u(i)][u(j)] = T.A(u(i), u(j)).to_double();
  }
  StabilityPolynomial P = stability_polynomial(T);
  std::vector<ScanPoint> out;
  out.reserve(u(nx) * u(ny));
  for (int iy = 0; iy < ny; ++iy) {
    double im = ny > 1 ? im0 + (im1 - im0) * iy / (ny - 1) : im0;
    for (int ix = 0; ix < nx; ++ix) {
      double re = nx > 1 ? re0 + (re1 - re0) * ix / (nx - 1) : re0;
      C z(re, im), y(1.0, 0.0);
      bool overflow = false;
      std::vector<C> g(u(T.s));
      for (int step = 0; step < n_steps && !overflow; ++step) {
        for (int i = 0; i < T.s; ++i) {
          C yi = y;
          for (int j = 0; j < i; ++j) yi += A[u(i)][u(j)] * g[u(j)];
          g[u(i)] = z * yi;
        }
        for (int i = 0; i < T.s; ++i) y += b[u(i)] * g[u(i)];
        if (!(std::abs(y) < 1e100)) overflow = true;
      }
      ScanPoint pt;
      pt.re = re;
      pt.im = im;
      pt.observed = !overflow && std::abs(y) <= 1.0;
      pt.theory = classify_point(P, ExtReal(re), ExtReal(im));
      out.push_back(pt);
    }
  }
  return out;
}

ODEProblem lorenz63(const ExtReal& t_end, mpfr_prec_t prec) {
  ODEProblem problem;
  problem.dimension = 3;
  problem.t0 = ExtReal(0, prec);
  problem.tf = t_end.round_to(prec);
  problem.y0 = DenseVector(3);
  for (std::size_t d = 0; d < 3; ++d) problem.y0[d] = ExtReal(1, prec);
  ExtReal sigma(10, prec), rho(28, prec);
  ExtReal beta = ExtReal(8, prec) / ExtReal(3, prec);
  problem.rhs = [sigma, rho, beta](const ExtReal&, const DenseVector& y) {
    DenseVector f(3);
    f[0] = sigma * (y[1] - y[0]);
    f[1] = y[0] * (rho - y[2]) - y[1];
    f[2] = y[0] * y[1] - beta * y[2];
    return f;
  };
  return problem;
}

ExtReal predictability_time(const ButcherTableau& T, const ExtReal& h,
                            const ExtReal& tol, const ExtReal& t_end) {
  mpfr_prec_t prec = T.precision_bits;
  ODEProblem problem = lorenz63(t_end, prec);
  ExtReal hc = h.round_to(prec);
  DenseVector coarse = problem.y0, fine = problem.y0;
  ExtReal t(0, prec);
  long evals = 0;
  while (t < t_end) {
    ExtReal step = min(hc, t_end - t);
    ExtReal half = step / ExtReal(2);
    coarse = step_fixed(T, problem, t, coarse, step, &evals);
    fine = step_fixed(T, problem, t, fine, half, &evals);
    fine = step_fixed(T, problem, t + half, fine, half, &evals);
    t += step;
    if (norm_2(coarse - fine) > tol) return t;
  }
  return t_end;
}

std::vector<GlobalErrorRow> global_error_study(const ButcherTableau& T,
                                               const ExtReal& t_f,
                                               const std::vector<ExtReal>& h_list,
                                               const DenseVector& reference) {
  if (!T.claimed_order)
    throw ValidationError("global error study needs a claimed order");
  int p = *T.claimed_order;
  ODEProblem problem = lorenz63(t_f, T.precision_bits);
  std::vector<GlobalErrorRow> rows;
  for (const ExtReal& h : h_list) {
    IntegrationRun run = integrate_fixed(T, problem, h);
    ExtReal err = norm_2(run.final_state() - reference);
    rows.push_back({h, err, err / pow_int(h, p)});
  }
  return rows;
}

DenseVector lorenz_reference(const ExtReal& t_f, mpfr_prec_t prec) {
  ButcherTableau T10 = construct(10, prec);
  ODEProblem problem = lorenz63(t_f, prec);
  ExtReal h = t_f / pow_int(ExtReal(2, prec), 16);
  return integrate_fixed(T10, problem, h).final_state();
}

}  // namespace qderk
