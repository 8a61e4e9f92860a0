#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qderk/constructor.hpp"
#include "qderk/stability.hpp"
#include "qderk/tableau.hpp"

using namespace qderk;

namespace {

ButcherTableau fixture(const char* name) {
  return load_tableau(std::string(QDERK_FIXTURE_DIR) + "/" + name + ".json");
}

ExtReal tiny(int log2inv) { return pow_int(ExtReal(0.5), log2inv); }

StabilityPolynomial poly(std::initializer_list<double> coeffs) {
  StabilityPolynomial P;
  P.coefficients = DenseVector(coeffs.size());
  std::size_t k = 0;
  for (double c : coeffs) P.coefficients[k++] = ExtReal(c);
  return P;
}

}  // namespace

TEST_CASE("stability_polynomial coefficients") {
  StabilityPolynomial P = stability_polynomial(fixture("rk4"));
  REQUIRE(P.coefficients.size() == 5);
  ExtReal expect[5] = {ExtReal(1), ExtReal(1), ExtReal(1) / ExtReal(2),
                       ExtReal(1) / ExtReal(6), ExtReal(1) / ExtReal(24)};
  for (std::size_t j = 0; j < 5; ++j)
    CHECK(abs(P.coefficients[j] - expect[j]) < tiny(200));
  CHECK(P.degree() == 4);

  // Verified order-6 method: r_j = 1/j! for j <= 6.
  ButcherTableau T6 = construct(6);
  StabilityPolynomial P6 = stability_polynomial(T6);
  ExtReal fact(1);
  for (int j = 1; j <= 6; ++j) {
    fact *= ExtReal(j);
    CHECK(abs(P6.coefficients[static_cast<std::size_t>(j)] - ExtReal(1) / fact) <
          tiny(200));
  }

  // Zero A with b = e_1 is the explicit Euler polynomial 1 + z.
  ButcherTableau E;
  E.s = 3;
  E.A = DenseMatrix(3, 3);
  E.b = DenseVector(3);
  E.c = DenseVector(3);
  for (std::size_t i = 0; i < 3; ++i) {
    E.b[i] = ExtReal(i == 0 ? 1 : 0);
    E.c[i] = ExtReal(0);
    for (std::size_t j = 0; j < 3; ++j) E.A(i, j) = ExtReal(0);
  }
  StabilityPolynomial PE = stability_polynomial(E);
  CHECK(PE.degree() == 1);
  CHECK(PE.coefficients[0] == ExtReal(1));
  CHECK(PE.coefficients[1] == ExtReal(1));
}

TEST_CASE("real_stability_interval") {
  ExtReal tol = tiny(40);
  CHECK(abs(real_stability_interval(poly({1, 1}), tol) - ExtReal(2)) < tiny(30));
  CHECK(abs(real_stability_interval(poly({1, 1, 0.5}), tol) - ExtReal(2)) <
        tiny(30));
  StabilityPolynomial rk4 = stability_polynomial(fixture("rk4"));
  ExtReal L = real_stability_interval(rk4, tol);
  CHECK(abs(L - ExtReal::from_string("2.7853")) < ExtReal(1e-3));
}

TEST_CASE("classify_point and conjugate symmetry") {
  StabilityPolynomial rk4 = stability_polynomial(fixture("rk4"));
  CHECK(classify_point(rk4, ExtReal(0), ExtReal(0)));
  CHECK(classify_point(rk4, ExtReal(-1), ExtReal(0)));
  CHECK(!classify_point(rk4, ExtReal(-3), ExtReal(0)));
  for (double re : {-2.5, -1.0, 0.5}) {
    for (double im : {0.5, 1.5, 3.0}) {
      CHECK(classify_point(rk4, ExtReal(re), ExtReal(im)) ==
            classify_point(rk4, ExtReal(re), ExtReal(-im)));
    }
  }
}

TEST_CASE("interval consistency with classification") {
  StabilityPolynomial rk4 = stability_polynomial(fixture("rk4"));
  ExtReal L = real_stability_interval(rk4, tiny(40));
  CHECK(classify_point(rk4, -L + ExtReal(0.01), ExtReal(0)));
  CHECK(classify_point(rk4, -L / ExtReal(2), ExtReal(0)));
  CHECK(!classify_point(rk4, -L - ExtReal(0.01), ExtReal(0)));
}

TEST_CASE("area_proxy") {
  // Euler region is the unit disk centered at -1; the proxy approximates pi.
  ExtReal euler = area_proxy(poly({1, 1}), ExtReal(1.2), 64);
  CHECK(std::abs(euler.to_double() - 3.14159265358979) < 0.02);

  StabilityPolynomial rk4 = stability_polynomial(fixture("rk4"));
  ExtReal rk4_proxy = area_proxy(rk4, ExtReal(3.5), 64);
  ExtReal euler_same_grid = area_proxy(poly({1, 1}), ExtReal(3.5), 64);
  CHECK(rk4_proxy > euler_same_grid);

  // Grid refinement changes the proxy by well under 5%.
  ExtReal y_max = ExtReal(1.2) * real_stability_interval(rk4, tiny(40));
  ExtReal a64 = area_proxy(rk4, y_max, 64);
  ExtReal a128 = area_proxy(rk4, y_max, 128);
  CHECK(abs(a128 - a64) < ExtReal(0.05) * a64);
}

TEST_CASE("stability_segment_length symmetry") {
  StabilityPolynomial rk4 = stability_polynomial(fixture("rk4"));
  ExtReal up = stability_segment_length(rk4, ExtReal(1));
  ExtReal down = stability_segment_length(rk4, ExtReal(-1));
  CHECK(up > ExtReal(0));
  CHECK(abs(up - down) < tiny(50));
  // Past the lobe there is no stable segment.
  CHECK(stability_segment_length(rk4, ExtReal(4)) == ExtReal(0));
}

TEST_CASE("leftmost_boundary sits on |R| = 1") {
  StabilityPolynomial rk4 = stability_polynomial(fixture("rk4"));
  auto x0 = leftmost_boundary(rk4, ExtReal(0));
  REQUIRE(x0.has_value());
  CHECK(abs(*x0 + ExtReal::from_string("2.7853")) < ExtReal(1e-3));
  for (double y : {0.0, 0.5, 1.0, 2.0}) {
    auto x = leftmost_boundary(rk4, ExtReal(y));
    REQUIRE(x.has_value());
    // 60 bisection steps pin the crossing far inside this bracket.
    CHECK(classify_point(rk4, *x + ExtReal(1e-12), ExtReal(y)));
    CHECK(!classify_point(rk4, *x - ExtReal(1e-12), ExtReal(y)));
  }
  CHECK(!leftmost_boundary(rk4, ExtReal(4)).has_value());
}

TEST_CASE("convexity_penalty") {
  // Disk boundary: leftmost abscissa is convex in y, so no penalty.
  ExtReal disk = convexity_penalty(poly({1, 1}), ExtReal(0.05), 16);
  CHECK(disk < ExtReal(1e-6));

  // Arithmetic of the sample formula.
  ExtReal dy(1);
  CHECK(convexity_penalty_from_samples({ExtReal(-1), ExtReal(0), ExtReal(-1)},
                                       dy) == ExtReal(2));
  CHECK(convexity_penalty_from_samples({ExtReal(0), ExtReal(-1), ExtReal(0)},
                                       dy) == ExtReal(0));
  CHECK(convexity_penalty_from_samples(
            {ExtReal(0), ExtReal(1), ExtReal(4), ExtReal(9)}, dy) ==
        ExtReal(0));
  ExtReal half(0.5);
  CHECK(convexity_penalty_from_samples({ExtReal(-1), ExtReal(0), ExtReal(-2)},
                                       half) ==
        ExtReal(12));  // -(-2 - 0 + -1)/0.25 = 12
}

TEST_CASE("analyze_stability report") {
  StabilityPolynomial rk4 = stability_polynomial(fixture("rk4"));
  ExtReal L = real_stability_interval(rk4, tiny(40));
  StabilityReport rep =
      analyze_stability(rk4, ExtReal(1.2) * L, 64, tiny(40));
  CHECK(abs(rep.real_interval_length - L) < tiny(30));
  CHECK(rep.area_proxy > ExtReal(0));
  CHECK(rep.convexity_penalty >= ExtReal(0));
  CHECK(rep.boundary_samples.size() >= 2);
  // Samples stop once the trace leaves the lobe.
  CHECK(rep.boundary_samples.size() <= 65);
  for (const auto& [y, x] : rep.boundary_samples) CHECK(x < ExtReal(0));
}

TEST_CASE("csv exports") {
  StabilityPolynomial rk4 = stability_polynomial(fixture("rk4"));
  std::string region = region_csv(rk4, ExtReal(-6), ExtReal(1), ExtReal(-4),
                                  ExtReal(4), 8, 9);
  CHECK(region.rfind("re,im,stable\n", 0) == 0);
  std::size_t rows = 0;
  for (char ch : region) rows += ch == '\n';
  CHECK(rows == 1 + 8 * 9);

  StabilityReport rep = analyze_stability(rk4, ExtReal(3), 8, tiny(40));
  std::string boundary = boundary_csv(rep);
  CHECK(boundary.rfind("y,leftmost_x\n", 0) == 0);
}
