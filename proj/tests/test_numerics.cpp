#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "qderk/errors.hpp"
#include "qderk/linalg.hpp"
#include "qderk/quadrature.hpp"

using namespace qderk;

namespace {

ExtReal tiny(int log2inv) { return pow_int(ExtReal(0.5), log2inv); }

}  // namespace

TEST_CASE("ExtReal arithmetic runs at the maximum operand precision") {
  ExtReal a(1.0, 128);
  ExtReal b(3, 320);
  ExtReal c = a / b;
  CHECK(c.precision() == 320);
  ExtReal d = b / a;
  CHECK(d.precision() == 320);
}

TEST_CASE("ExtReal decimal round trip is exact") {
  ExtReal x = ExtReal(1) / ExtReal(7);
  ExtReal y = ExtReal::from_string(x.to_string());
  CHECK(x == y);

  ExtReal z = ExtReal::from_string("0.2763932022500210303590826331268723764559");
  CHECK(abs(z - ExtReal::from_string(z.to_string())).is_zero());
}

TEST_CASE("ExtReal comparisons and sign") {
  CHECK(ExtReal(2) > ExtReal(1));
  CHECK(ExtReal(-1).sign() == -1);
  CHECK(ExtReal(0).is_zero());
  CHECK(pow_int(ExtReal(0), 0) == ExtReal(1));
}

TEST_CASE("vector algebra basics") {
  DenseVector u{ExtReal(1), ExtReal(2), ExtReal(3)};
  DenseVector v{ExtReal(4), ExtReal(5), ExtReal(6)};
  DenseVector h = hadamard(u, v);
  CHECK(h[0] == ExtReal(4));
  CHECK(h[2] == ExtReal(18));
  CHECK(dot(u, v) == ExtReal(32));
  DenseVector p = epow(u, 0);
  CHECK(p[0] == ExtReal(1));
  CHECK(p[2] == ExtReal(1));
  CHECK_THROWS_AS(hadamard(u, DenseVector(2)), std::invalid_argument);
}

TEST_CASE("matvec and tmatvec") {
  DenseMatrix A(2, 3);
  A(0, 0) = ExtReal(1);
  A(0, 1) = ExtReal(2);
  A(0, 2) = ExtReal(3);
  A(1, 0) = ExtReal(4);
  A(1, 1) = ExtReal(5);
  A(1, 2) = ExtReal(6);
  DenseVector v{ExtReal(1), ExtReal(1), ExtReal(1)};
  DenseVector r = matvec(A, v);
  CHECK(r[0] == ExtReal(6));
  CHECK(r[1] == ExtReal(15));
  DenseVector u{ExtReal(1), ExtReal(1)};
  DenseVector t = tmatvec(A, u);
  CHECK(t[0] == ExtReal(5));
  CHECK(t[2] == ExtReal(9));
}

TEST_CASE("solve_dense identity and Vandermonde") {
  DenseMatrix I(3, 3);
  for (int i = 0; i < 3; ++i) I(i, i) = ExtReal(1);
  DenseVector r{ExtReal(5), ExtReal(-2), ExtReal(7)};
  DenseVector x = solve_dense(I, r);
  for (int i = 0; i < 3; ++i) CHECK(x[i] == r[i]);

  // Vandermonde at nodes {0, 1/2}: rows (1, 1), (0, 1/2); rhs (1, 1/2).
  DenseMatrix V(2, 2);
  V(0, 0) = ExtReal(1);
  V(0, 1) = ExtReal(1);
  V(1, 0) = ExtReal(0);
  V(1, 1) = ExtReal(1) / ExtReal(2);
  DenseVector b{ExtReal(1), ExtReal(1) / ExtReal(2)};
  DenseVector y = solve_dense(V, b);
  CHECK(abs(y[0] - ExtReal(0)) < tiny(240));
  CHECK(abs(y[1] - ExtReal(1)) < tiny(240));
}

TEST_CASE("solve_dense rejects singular systems") {
  DenseMatrix V(2, 2);
  V(0, 0) = ExtReal(1);
  V(0, 1) = ExtReal(1);
  V(1, 0) = ExtReal(1) / ExtReal(3);
  V(1, 1) = ExtReal(1) / ExtReal(3);  // repeated node
  DenseVector b{ExtReal(1), ExtReal(1)};
  CHECK_THROWS_AS(solve_dense(V, b), InfeasibleError);
}

TEST_CASE("solve_dense residual bound on random well-conditioned systems") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int n = 1; n <= 12; ++n) {
    DenseMatrix M(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) M(i, j) = ExtReal(unif(rng));
      M(i, i) += ExtReal(n);  // diagonal dominance keeps conditioning mild
    }
    DenseVector r(n);
    for (int i = 0; i < n; ++i) r[i] = ExtReal(unif(rng));
    DenseVector x = solve_dense(M, r);
    DenseVector res = matvec(M, x) - r;
    CHECK(norm_inf(res) < tiny(220));
  }
}

TEST_CASE("least_squares recovers exact and overdetermined solutions") {
  DenseMatrix A(3, 2);
  A(0, 0) = ExtReal(1);
  A(1, 0) = ExtReal(1);
  A(2, 0) = ExtReal(1);
  A(0, 1) = ExtReal(0);
  A(1, 1) = ExtReal(1);
  A(2, 1) = ExtReal(2);
  DenseVector b{ExtReal(1), ExtReal(3), ExtReal(5)};  // exactly 1 + 2 t
  auto [x, res] = least_squares(A, b);
  CHECK(abs(x[0] - ExtReal(1)) < tiny(200));
  CHECK(abs(x[1] - ExtReal(2)) < tiny(200));
  CHECK(res < tiny(200));

  DenseVector c{ExtReal(1), ExtReal(0), ExtReal(1)};  // residual sqrt(2/3)
  auto [y, res2] = least_squares(A, c);
  ExtReal expect = sqrt(ExtReal(2) / ExtReal(3));
  CHECK(abs(res2 - expect) < tiny(200));
  (void)y;
}

TEST_CASE("lobatto_rule N=3 closed form") {
  QuadratureRule rule = lobatto_rule(3);
  CHECK(rule.nodes[0].is_zero());
  CHECK(abs(rule.nodes[1] - ExtReal(1) / ExtReal(2)) < tiny(240));
  CHECK(rule.nodes[2] == ExtReal(1));
  CHECK(abs(rule.weights[0] - ExtReal(1) / ExtReal(6)) < tiny(240));
  CHECK(abs(rule.weights[1] - ExtReal(2) / ExtReal(3)) < tiny(240));
}

TEST_CASE("lobatto_rule N=4 second node matches published value") {
  QuadratureRule rule = lobatto_rule(4);
  ExtReal ref =
      ExtReal::from_string("0.2763932022500210303590826331268723764559");
  CHECK(abs(rule.nodes[1] - ref) < tiny(128));
}

TEST_CASE("lobatto exactness and positivity for N in [2,12]") {
  for (int N = 2; N <= 12; ++N) {
    QuadratureRule rule = lobatto_rule(N);
    ExtReal wsum = 0;
    for (int i = 0; i < N; ++i) {
      CHECK(rule.weights[i] > ExtReal(0));
      wsum += rule.weights[i];
    }
    CHECK(abs(wsum - ExtReal(1)) < tiny(236));
    for (int k = 0; k <= 2 * N - 3; ++k) {
      ExtReal s = 0;
      for (int i = 0; i < N; ++i) s += rule.weights[i] * pow_int(rule.nodes[i], k);
      CHECK(abs(s - ExtReal(1) / ExtReal(k + 1)) < tiny(236));
    }
  }
}

TEST_CASE("lobatto nodes stable under precision increase") {
  QuadratureRule lo = lobatto_rule(6, 128);
  QuadratureRule hi = lobatto_rule(6, 256);
  for (int i = 0; i < 6; ++i) {
    CHECK(abs(lo.nodes[i] - hi.nodes[i]) < tiny(120));
  }
}

TEST_CASE("lobatto_rule rejects N < 2") {
  CHECK_THROWS_AS(lobatto_rule(1), ValidationError);
}
