#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qderk/constructor.hpp"
#include "qderk/errors.hpp"
#include "qderk/integrator.hpp"
#include "qderk/stability.hpp"
#include "qderk/tableau.hpp"

using namespace qderk;

namespace {

ButcherTableau fixture(const char* name) {
  return load_tableau(std::string(QDERK_FIXTURE_DIR) + "/" + name + ".json");
}

ExtReal tiny(int log2inv) { return pow_int(ExtReal(0.5), log2inv); }

// y' = -y on [0, 1] from y0 = 1.
ODEProblem decay() {
  ODEProblem pr;
  pr.dimension = 1;
  pr.rhs = [](const ExtReal&, const DenseVector& y) {
    return DenseVector{-y[0]};
  };
  pr.y0 = DenseVector{ExtReal(1)};
  pr.t0 = ExtReal(0);
  pr.tf = ExtReal(1);
  return pr;
}

// y' = lambda y for complex lambda = a + bi as a 2-d real system.
ODEProblem rotation(const ExtReal& a, const ExtReal& b) {
  ODEProblem pr;
  pr.dimension = 2;
  pr.rhs = [a, b](const ExtReal&, const DenseVector& y) {
    return DenseVector{a * y[0] - b * y[1], b * y[0] + a * y[1]};
  };
  pr.y0 = DenseVector{ExtReal(1), ExtReal(0)};
  pr.t0 = ExtReal(0);
  pr.tf = ExtReal(1);
  return pr;
}

// R(x + i y) for a real-coefficient stability polynomial.
std::pair<ExtReal, ExtReal> eval_R(const StabilityPolynomial& P,
                                   const ExtReal& x, const ExtReal& y) {
  ExtReal u(0), v(0);
  for (std::size_t k = P.coefficients.size(); k-- > 0;) {
    ExtReal nu = u * x - v * y + P.coefficients[k];
    v = u * y + v * x;
    u = nu;
  }
  return {u, v};
}

bool within_factor(double value, double target, double factor) {
  return value < target * factor && value > target / factor;
}

}  // namespace

TEST_CASE("step_fixed basics") {
  ButcherTableau rk4 = fixture("rk4");

  ODEProblem still;
  still.dimension = 1;
  still.rhs = [](const ExtReal&, const DenseVector& y) {
    return DenseVector{ExtReal(0)};
  };
  still.y0 = DenseVector{ExtReal(3)};
  DenseVector y = step_fixed(rk4, still, ExtReal(0), still.y0, ExtReal(0.5));
  CHECK(y[0] == ExtReal(3));

  // y' = -y: one RK4 step multiplies by R(-h).
  ExtReal h(0.25);
  long evals = 0;
  y = step_fixed(rk4, decay(), ExtReal(0), DenseVector{ExtReal(1)}, h, &evals);
  CHECK(evals == 4);
  StabilityPolynomial P = stability_polynomial(rk4);
  auto [re, im] = eval_R(P, -h, ExtReal(0));
  CHECK(abs(y[0] - re) < tiny(200));
  CHECK(im.is_zero());

  // y' = 1 advances by exactly h for any B(1) tableau.
  ODEProblem clock;
  clock.dimension = 1;
  clock.rhs = [](const ExtReal&, const DenseVector&) {
    return DenseVector{ExtReal(1)};
  };
  clock.y0 = DenseVector{ExtReal(0)};
  y = step_fixed(construct(6), clock, ExtReal(0), clock.y0, ExtReal(0.3));
  CHECK(abs(y[0] - ExtReal(0.3)) < tiny(200));
}

TEST_CASE("linear equivalence with the stability polynomial") {
  ButcherTableau T = construct(6);
  StabilityPolynomial P = stability_polynomial(T);
  std::mt19937 gen(42);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  ExtReal h(0.4);
  for (int trial = 0; trial < 20; ++trial) {
    ExtReal a(dist(gen)), b(dist(gen));
    DenseVector y = step_fixed(T, rotation(a, b), ExtReal(0),
                               DenseVector{ExtReal(1), ExtReal(0)}, h);
    auto [re, im] = eval_R(P, h * a, h * b);
    CHECK(abs(y[0] - re) < tiny(200));
    CHECK(abs(y[1] - im) < tiny(200));
  }
}

TEST_CASE("step_embedded") {
  // b_embedded = b makes the estimate exactly zero.
  ButcherTableau T = fixture("rk4");
  T.b_embedded = T.b;
  long evals = 0;
  auto [y1, delta] = step_embedded(T, decay(), ExtReal(0),
                                   DenseVector{ExtReal(1)}, ExtReal(0.25),
                                   &evals);
  CHECK(evals == 4);  // stages are shared, not recomputed
  CHECK(norm_inf(delta) == ExtReal(0));
  CHECK(abs(y1[0] - step_fixed(T, decay(), ExtReal(0), DenseVector{ExtReal(1)},
                               ExtReal(0.25))[0]) < tiny(250));

  ButcherTableau miss = fixture("rk4");
  miss.b_embedded.reset();
  CHECK_THROWS_AS(step_embedded(miss, decay(), ExtReal(0),
                                DenseVector{ExtReal(1)}, ExtReal(0.25)),
                  ValidationError);

  // ||Delta|| scales as h^(p-1) on a smooth linear problem.
  ButcherTableau T6 = construct(6);
  ExtReal h(0.125);
  auto [ya, da] =
      step_embedded(T6, decay(), ExtReal(0), DenseVector{ExtReal(1)}, h);
  auto [yb, db] = step_embedded(T6, decay(), ExtReal(0),
                                DenseVector{ExtReal(1)}, h / ExtReal(2));
  double exponent =
      std::log2(norm_2(da).to_double() / norm_2(db).to_double());
  CHECK(std::abs(exponent - 5.0) < 0.3);
}

TEST_CASE("integrate_fixed accounting and final step") {
  ButcherTableau rk4 = fixture("rk4");
  IntegrationRun run = integrate_fixed(rk4, decay(), ExtReal(0.3));
  REQUIRE(run.times.size() == 5);  // 0, .3, .6, .9, 1
  CHECK(run.final_time() == ExtReal(1));
  CHECK(run.rhs_evaluations == 4 * 4);
  CHECK(abs(run.final_state()[0] - exp(ExtReal(-1))) < ExtReal(1e-4));
  for (const StepRecord& st : run.steps) CHECK(st.accepted);
  CHECK_THROWS_AS(integrate_fixed(rk4, decay(), ExtReal(0)), ValidationError);
}

TEST_CASE("integrate_adaptive on smooth decay") {
  ButcherTableau T = construct(6);
  AdaptiveConfig cfg = scalar_config(ExtReal(1e-6), ExtReal(1e-6),
                                     ExtReal(0.001));
  IntegrationRun run = integrate_adaptive(T, decay(), cfg);
  CHECK(abs(run.final_time() - ExtReal(1)) == ExtReal(0));
  CHECK(abs(run.final_state()[0] - exp(ExtReal(-1))) < ExtReal(1e-5));
  std::size_t rejections = 0;
  for (const StepRecord& st : run.steps) {
    if (!st.accepted) ++rejections;
    if (st.accepted) CHECK(st.err <= ExtReal(1));
  }
  CHECK(rejections == 0);
  // Step growth is monotone and capped by alpha_max until the tf clamp.
  for (std::size_t k = 0; k + 2 < run.steps.size(); ++k) {
    CHECK(run.steps[k + 1].h >= run.steps[k].h);
    CHECK(run.steps[k + 1].h <= cfg.alpha_max * run.steps[k].h + tiny(60));
  }
  // Accepted grid is strictly increasing; only accepted states are emitted.
  for (std::size_t k = 1; k < run.times.size(); ++k)
    CHECK(run.times[k] > run.times[k - 1]);
  std::size_t accepted = 0;
  for (const StepRecord& st : run.steps) accepted += st.accepted;
  CHECK(accepted + 1 == run.times.size());
}

TEST_CASE("integrate_adaptive matches a fixed-step Lorenz reference") {
  ButcherTableau T = construct(8);
  ODEProblem lorenz = lorenz63(ExtReal(1));
  AdaptiveConfig cfg = scalar_config(ExtReal(1e-10), ExtReal(1e-10),
                                     ExtReal(0.001));
  IntegrationRun adaptive = integrate_adaptive(T, lorenz, cfg);
  IntegrationRun ref = integrate_fixed(T, lorenz, pow_int(ExtReal(0.5), 10));
  CHECK(norm_2(adaptive.final_state() - ref.final_state()) < ExtReal(1e-7));
  CHECK(adaptive.rhs_evaluations ==
        static_cast<long>(adaptive.steps.size()) * T.s);
}

TEST_CASE("adaptive underflow aborts with a diagnostic") {
  ButcherTableau T = construct(6);
  // The right-hand side turns non-finite at t = 0.5; every step across it is
  // rejected and the controller shrinks h to the underflow floor.
  ODEProblem pr;
  pr.dimension = 1;
  pr.rhs = [](const ExtReal& t, const DenseVector&) {
    return DenseVector{t < ExtReal(0.5)
                           ? ExtReal(1)
                           : ExtReal(std::numeric_limits<double>::quiet_NaN())};
  };
  pr.y0 = DenseVector{ExtReal(0)};
  pr.t0 = ExtReal(0);
  pr.tf = ExtReal(1);
  AdaptiveConfig cfg = scalar_config(ExtReal(1e-12), ExtReal(1e-12),
                                     ExtReal(0.1));
  CHECK_THROWS_AS(integrate_adaptive(T, pr, cfg), InfeasibleError);
}

TEST_CASE("convergence_study golden cells") {
  std::vector<ExtReal> hs;
  for (int k = 0; k <= 4; ++k) hs.push_back(pow_int(ExtReal(0.5), k));
  DenseVector exact{exp(ExtReal(-1))};

  auto rows4 = convergence_study(construct(4), decay(), exact, hs);
  double expect4[5] = {7.121e-3, 2.914e-4, 1.476e-5, 8.308e-7, 4.928e-8};
  double rate4[5] = {0, 4.61, 4.30, 4.15, 4.08};
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(within_factor(rows4[k].err.to_double(), expect4[k], 2.0));
    if (k) CHECK(std::abs(rows4[k].p_obs.to_double() - rate4[k]) < 0.2);
  }

  auto rows6 = convergence_study(construct(6), decay(), exact, hs);
  double expect6[5] = {1.761e-4, 1.769e-6, 2.219e-8, 3.107e-10, 4.595e-12};
  for (std::size_t k = 0; k < 5; ++k)
    CHECK(within_factor(rows6[k].err.to_double(), expect6[k], 2.0));
  CHECK(std::abs(rows6[1].p_obs.to_double() - 6.64) < 0.2);

  // Least-squares slope of log err vs log h over the asymptotic rows.
  auto slope = [](const std::vector<ConvergenceRow>& rows) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t k = rows.size() - 3; k < rows.size(); ++k) {
      double x = std::log2(rows[k].h.to_double());
      double y = std::log2(rows[k].err.to_double());
      sx += x, sy += y, sxx += x * x, sxy += x * y, ++n;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  CHECK(std::abs(slope(rows4) - 4.0) < 0.25);
  CHECK(std::abs(slope(rows6) - 6.0) < 0.25);
}

TEST_CASE("stability_scan agrees with the polynomial classification") {
  ButcherTableau rk4 = fixture("rk4");
  auto pts = stability_scan(rk4, -6, 1, 51, -4, 4, 51, 40);
  REQUIRE(pts.size() == 51u * 51u);
  StabilityPolynomial P = stability_polynomial(rk4);
  std::size_t checked = 0, agree = 0;
  for (const ScanPoint& pt : pts) {
    // Skip a band of width 0.01 around the boundary |R| = 1.
    auto [re, im] = eval_R(P, ExtReal(pt.re), ExtReal(pt.im));
    double mag = std::sqrt((re * re + im * im).to_double());
    if (std::abs(mag - 1.0) <= 0.01) continue;
    ++checked;
    agree += pt.theory == pt.observed;
  }
  CHECK(checked > 2000);
  CHECK(static_cast<double>(agree) / static_cast<double>(checked) >= 0.99);

  auto origin = stability_scan(rk4, 0, 0, 1, 0, 0, 1, 40);
  CHECK(origin[0].observed);
  auto right = stability_scan(rk4, 0.5, 0.5, 1, 0, 0, 1, 40);
  CHECK(!right[0].observed);
  CHECK(!right[0].theory);
}

TEST_CASE("predictability_time on Lorenz") {
  ButcherTableau rk4 = round_tableau(fixture("rk4"), 128);
  ExtReal h = pow_int(ExtReal(0.5), 8);
  // tol = +infinity never trips: returns t_end.
  ExtReal never = predictability_time(rk4, h, ExtReal(1e300), ExtReal(2));
  CHECK(never == ExtReal(2));
  ExtReal Th = predictability_time(rk4, h, ExtReal(1e-6), ExtReal(2));
  CHECK(Th >= ExtReal::from_string("0.19"));
  CHECK(Th <= ExtReal::from_string("0.22"));
}

TEST_CASE("global_error_study order scaling") {
  ExtReal t_f = pow_int(ExtReal(0.5), 4);
  // Cheap high-accuracy reference: order 6 at a much smaller step.
  ODEProblem lorenz = lorenz63(t_f);
  DenseVector ref =
      integrate_fixed(construct(6), lorenz, t_f / ExtReal(1 << 10))
          .final_state();
  ButcherTableau rk4 = fixture("rk4");
  std::vector<ExtReal> hs = {t_f / ExtReal(16), t_f / ExtReal(32)};
  auto rows = global_error_study(rk4, t_f, hs, ref);
  REQUIRE(rows.size() == 2);
  double ratio = rows[0].err.to_double() / rows[1].err.to_double();
  CHECK(std::abs(std::log2(ratio) - 4.0) < 0.5);
  double plateau =
      rows[0].err_over_hp.to_double() / rows[1].err_over_hp.to_double();
  CHECK(plateau > 0.7);
  CHECK(plateau < 1.5);
}

TEST_CASE("round_tableau lowers the stored precision") {
  ButcherTableau T = round_tableau(construct(6), 128);
  CHECK(T.precision_bits == 128);
  CHECK(T.b[0].precision() == 128);
  CHECK(T.A(2, 0).precision() == 128);
  REQUIRE(T.b_embedded.has_value());
  CHECK((*T.b_embedded)[0].precision() == 128);
}
