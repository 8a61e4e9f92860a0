#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qderk/errors.hpp"
#include "qderk/optimizer.hpp"
#include "qderk/stability.hpp"
#include "qderk/trees.hpp"

using namespace qderk;

namespace {

ButcherTableau fixture(const char* name) {
  return load_tableau(std::string(QDERK_FIXTURE_DIR) + "/" + name + ".json");
}

ExtReal tiny(int log2inv) { return pow_int(ExtReal(0.5), log2inv); }

double sphere(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v * v;
  return s;
}

}  // namespace

TEST_CASE("encode/decode round trip and dimensions") {
  StageLayout l8 = plan_layout(8), l10 = plan_layout(10);
  std::vector<double> x8 = encode_parameters(l8, default_free_parameters(l8));
  std::vector<double> x10 = encode_parameters(l10, default_free_parameters(l10));
  CHECK(x8.size() == 17);
  CHECK(x10.size() == 36);
  CHECK(parameter_scales(l8).size() == 17);
  CHECK(parameter_scales(l10).size() == 36);

  // Round trip through double-valued parameters is exact.
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> dist(-0.05, 0.05);
  std::vector<double> x = x8;
  for (double& v : x) v += dist(gen);
  FreeParameters fp = decode_parameters(l8, x);
  std::vector<double> back = encode_parameters(l8, fp);
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(back[k] == x[k]);

  CHECK_THROWS_AS(decode_parameters(l8, std::vector<double>(5, 0.0)),
                  ValidationError);
}

TEST_CASE("extract_free_parameters inverts construct") {
  StageLayout layout = plan_layout(8);
  // Defaults extract back to the default encoding.
  ButcherTableau T = construct(8);
  std::vector<double> a =
      encode_parameters(layout, extract_free_parameters(layout, T));
  std::vector<double> d =
      encode_parameters(layout, default_free_parameters(layout));
  REQUIRE(a.size() == d.size());
  for (std::size_t k = 0; k < a.size(); ++k)
    CHECK(std::abs(a[k] - d[k]) < 1e-15);

  // The published optimized order-8 table is reproduced by construct() from
  // its extracted parameters (its non-free entries are determined).
  ButcherTableau opt = fixture("order8_optimized");
  ButcherTableau re = construct(8, extract_free_parameters(layout, opt));
  for (int i = 0; i < opt.s; ++i) {
    for (int j = 0; j < i; ++j) {
      CHECK(abs(re.A(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) -
                opt.A(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) <
            tiny(83));
    }
  }
  OrderReport rep = verify_order(re, 8);
  CHECK(rep.order_verified == 8);
}

TEST_CASE("fitness orders baseline below optimized and penalizes infeasibility") {
  StageLayout layout = plan_layout(8);
  FitnessConfig cfg;
  std::vector<double> xb =
      encode_parameters(layout, extract_free_parameters(layout, fixture("order8")));
  std::vector<double> xo = encode_parameters(
      layout, extract_free_parameters(layout, fixture("order8_optimized")));
  double fb = fitness(xb, 8, cfg);
  double fo = fitness(xo, 8, cfg);
  CHECK(fo < fb);

  // Duplicated Q-group nodes are infeasible: large finite penalty.
  std::vector<double> dup = xb;
  dup[1] = dup[2];  // nodes of the two-stage Q-group 2
  double fd = fitness(dup, 8, cfg);
  CHECK(fd >= 1e6);
  CHECK(std::isfinite(fd));

  // w_stab = 0 reduces the ordering to the principal error norm.
  FitnessConfig err_only;
  err_only.w_stab = 0;
  double eb = fitness(xb, 8, err_only);
  double eo = fitness(xo, 8, err_only);
  ExtReal tb = principal_error_norm(fixture("order8"), 8);
  ExtReal to = principal_error_norm(fixture("order8_optimized"), 8);
  CHECK((eb < eo) == (tb < to));
}

TEST_CASE("cma_es_minimize on the sphere") {
  std::vector<double> x0(10, 1.0);
  CMAResult res = cma_es_minimize(sphere, x0, 0.5, 200, 12345);
  CHECK(res.best_fitness < 1e-8);
  CHECK(res.history.size() == 200);
  for (std::size_t g = 1; g < res.history.size(); ++g)
    CHECK(res.history[g] <= res.history[g - 1]);

  // Deterministic: identical seeds give bit-identical histories and winners.
  CMAResult res2 = cma_es_minimize(sphere, x0, 0.5, 200, 12345);
  CHECK(res2.best_fitness == res.best_fitness);
  CHECK(res2.history == res.history);
  CHECK(res2.best == res.best);
  CMAResult res3 = cma_es_minimize(sphere, x0, 0.5, 50, 999);
  CHECK(res3.best_fitness != res.best_fitness);

  CHECK_THROWS_AS(cma_es_minimize(sphere, x0, 0.5, 0, 1), ValidationError);
  CHECK_THROWS_AS(cma_es_minimize(sphere, x0, 0.5, 10, 1, 1), ValidationError);
}

TEST_CASE("random feasible parameters preserve the order") {
  StageLayout layout = plan_layout(6, 128);
  std::vector<double> x0 =
      encode_parameters(layout, default_free_parameters(layout));
  std::vector<double> scale = parameter_scales(layout);
  std::mt19937 gen(2024);
  std::normal_distribution<double> dist(0.0, 0.3);
  int constructed = 0, tries = 0;
  while (constructed < 100 && tries < 300) {
    ++tries;
    std::vector<double> x = x0;
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += scale[k] * dist(gen);
    ButcherTableau T;
    try {
      T = construct(6, decode_parameters(layout, x), 128);
    } catch (const ValidationError&) {
      continue;
    } catch (const InfeasibleError&) {
      continue;
    }
    ++constructed;
    OrderReport rep = verify_order(T, 6);
    CHECK(rep.order_verified == 6);
  }
  CHECK(constructed == 100);
}

TEST_CASE("optimize_method improves the stability interval") {
  FitnessConfig cfg;
  cfg.w_err = 0;
  cfg.w_area = 0;
  cfg.w_convex = 0;
  cfg.w_interval = 1;
  auto [T, rep] = optimize_method(6, cfg, 5, 42);
  CHECK(rep.verified_order == 6);
  REQUIRE(rep.history.size() == 5);
  for (std::size_t g = 1; g < rep.history.size(); ++g)
    CHECK(rep.history[g] <= rep.history[g - 1]);

  StabilityPolynomial base = stability_polynomial(construct(6));
  ExtReal tol = tiny(30);
  ExtReal L0 = real_stability_interval(base, tol);
  CHECK(ExtReal(rep.real_interval) >= L0 - ExtReal(1e-6));
  CHECK(rep.best_fitness <= -L0.to_double() + 1e-6);

  CHECK_THROWS_AS(optimize_method(4, cfg, 5, 42), ValidationError);
  CHECK_THROWS_AS(optimize_method(7, cfg, 5, 42), ValidationError);
}

TEST_CASE("serialize_report is valid JSON with the config echo") {
  FitnessConfig cfg;
  OptimizeReport rep;
  rep.config = cfg;
  rep.history = {1.0, 0.5};
  rep.best_fitness = 0.5;
  rep.verified_order = 6;
  std::string doc = serialize_report(rep);
  CHECK(doc.find("\"w_convex\": 10") != std::string::npos);
  CHECK(doc.find("\"best_fitness_per_generation\"") != std::string::npos);
  CHECK(doc.find("\"verified_order\": 6") != std::string::npos);
}
