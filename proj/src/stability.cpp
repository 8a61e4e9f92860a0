// Copyright (c) 2026 The qderk authors.
// Distributed under the MIT license; see LICENSE for details.

#include "qderk/stability.hpp"

#include <cstdio>
#include <sstream>

namespace qderk {

namespace {

// |R(x + i y)|^2 by complex Horner on the real coefficient list.
ExtReal abs2(const StabilityPolynomial& P, const ExtReal& x, const ExtReal& y) {
  const DenseVector& r = P.coefficients;
  std::size_t n = r.size();
  ExtReal u(0), v(0);
  for (std::size_t k = n; k-- > 0;) {
    ExtReal nu = u * x - v * y + r[k];
    v = u * y + v * x;
    u = nu;
  }
  return u * u + v * v;
}

bool stable(const StabilityPolynomial& P, const ExtReal& x, const ExtReal& y) {
  return abs2(P, x, y) <= ExtReal(1);
}

const int kBisectIters = 60;

// x_lo stable, x_hi unstable on the line Im z = y; returns the boundary
// abscissa after a fixed number of bisections.
ExtReal bisect(const StabilityPolynomial& P, const ExtReal& y, ExtReal x_lo,
               ExtReal x_hi) {
  ExtReal half = ExtReal(1) / ExtReal(2);
  for (int it = 0; it < kBisectIters; ++it) {
    ExtReal mid = (x_lo + x_hi) * half;
    (stable(P, mid, y) ? x_lo : x_hi) = mid;
  }
  return (x_lo + x_hi) * half;
}

struct Segment {
  ExtReal x_left, x_right;
};

// The stable segment on Im z = y seeded from the stable point nearest x = 0
// (searched leftward down to -cap); the left/right edges are marched to in
// steps of 1/16 and bisected.
std::optional<Segment> trace_segment(const StabilityPolynomial& P,
                                     const ExtReal& y, const ExtReal& cap) {
  ExtReal step = ExtReal(1) / ExtReal(16);
  ExtReal seed(0);
  while (!stable(P, seed, y)) {
    seed -= step;
    if (seed < -cap) return std::nullopt;
  }
  Segment seg;
  ExtReal x = seed;
  while (stable(P, x - step, y) && x - step > -cap) x -= step;
  seg.x_left = stable(P, x - step, y) ? x - step : bisect(P, y, x, x - step);
  x = seed;
  while (stable(P, x + step, y) && x + step < cap) x += step;
  seg.x_right = stable(P, x + step, y) ? x + step : bisect(P, y, x, x + step);
  return seg;
}

std::vector<std::optional<Segment>> trace_lines(const StabilityPolynomial& P,
                                                const ExtReal& dy, int M,
                                                const ExtReal& cap) {
  std::vector<std::optional<Segment>> lines;
  lines.reserve(static_cast<std::size_t>(M) + 1);
  for (int j = 0; j <= M; ++j) lines.push_back(trace_segment(P, ExtReal(j) * dy, cap));
  return lines;
}

ExtReal search_cap(const StabilityPolynomial& P, const ExtReal& tol) {
  return real_stability_interval(P, tol) + ExtReal(4);
}

ExtReal proxy_from_lines(const std::vector<std::optional<Segment>>& lines,
                         const ExtReal& dy) {
  ExtReal sum(0);
  int M = static_cast<int>(lines.size()) - 1;
  for (int k = 0; k <= M; ++k) {
    if (!lines[static_cast<std::size_t>(k)]) continue;
    const Segment& seg = *lines[static_cast<std::size_t>(k)];
    ExtReal w = (k == 0 || k == M) ? dy / ExtReal(2) : dy;
    // Conjugate symmetry of real coefficients: L_{+yi} = L_{-yi}.
    sum += w * ExtReal(2) * (seg.x_right - seg.x_left);
  }
  return sum;
}

std::vector<ExtReal> left_abscissas(
    const std::vector<std::optional<Segment>>& lines) {
  std::vector<ExtReal> x;
  for (const auto& seg : lines) {
    if (!seg) break;  // region ended: truncate at the last valid sample
    x.push_back(seg->x_left);
  }
  return x;
}

}  // namespace

int StabilityPolynomial::degree() const {
  for (std::size_t k = coefficients.size(); k-- > 0;)
    if (!coefficients[k].is_zero()) return static_cast<int>(k);
  return 0;
}

StabilityPolynomial stability_polynomial(const ButcherTableau& T) {
  StabilityPolynomial P;
  P.coefficients = DenseVector(static_cast<std::size_t>(T.s) + 1);
  P.coefficients[0] = ExtReal(1);
  DenseVector v = ones(static_cast<std::size_t>(T.s));
  for (int j = 1; j <= T.s; ++j) {
    P.coefficients[static_cast<std::size_t>(j)] = dot(T.b, v);
    if (j < T.s) v = matvec(T.A, v);
  }
  return P;
}

bool classify_point(const StabilityPolynomial& P, const ExtReal& re,
                    const ExtReal& im) {
  return stable(P, re, im);
}

ExtReal real_stability_interval(const StabilityPolynomial& P,
                                const ExtReal& tol) {
  ExtReal step = ExtReal(1) / ExtReal(16), zero(0);
  if (!stable(P, zero, zero)) return zero;
  int d = P.degree();
  ExtReal cap = ExtReal(2 * d * d + 16);
  ExtReal x(0);
  while (stable(P, x - step, zero)) {
    x -= step;
    if (x < -cap) return -x;
  }
  ExtReal lo = x, hi = x - step, half = ExtReal(1) / ExtReal(2);
  for (int it = 0; it < 200 && lo - hi > tol; ++it) {
    ExtReal mid = (lo + hi) * half;
    (stable(P, mid, zero) ? lo : hi) = mid;
  }
  return -(lo + hi) * half;
}

ExtReal stability_segment_length(const StabilityPolynomial& P,
                                 const ExtReal& y) {
  auto seg = trace_segment(P, y, search_cap(P, pow_int(ExtReal(0.5), 40)));
  return seg ? seg->x_right - seg->x_left : ExtReal(0);
}

std::optional<ExtReal> leftmost_boundary(const StabilityPolynomial& P,
                                         const ExtReal& y) {
  auto seg = trace_segment(P, y, search_cap(P, pow_int(ExtReal(0.5), 40)));
  if (!seg) return std::nullopt;
  return seg->x_left;
}

ExtReal area_proxy(const StabilityPolynomial& P, const ExtReal& y_max, int M) {
  ExtReal dy = y_max / ExtReal(M);
  auto lines = trace_lines(P, dy, M, search_cap(P, pow_int(ExtReal(0.5), 40)));
  return proxy_from_lines(lines, dy);
}

ExtReal convexity_penalty_from_samples(const std::vector<ExtReal>& x,
                                       const ExtReal& dy) {
  ExtReal sum(0), dy2 = dy * dy;
  for (std::size_t j = 1; j + 1 < x.size(); ++j) {
    ExtReal d2 = (x[j + 1] - ExtReal(2) * x[j] + x[j - 1]) / dy2;
    if (d2 < ExtReal(0)) sum -= d2;
  }
  return sum;
}

ExtReal convexity_penalty(const StabilityPolynomial& P, const ExtReal& dy,
                          int M) {
  auto lines = trace_lines(P, dy, M, search_cap(P, pow_int(ExtReal(0.5), 40)));
  return convexity_penalty_from_samples(left_abscissas(lines), dy);
}

StabilityReport analyze_stability(const StabilityPolynomial& P,
                                  const ExtReal& y_max, int M,
                                  const ExtReal& tol) {
  StabilityReport rep;
  rep.real_interval_length = real_stability_interval(P, tol);
  ExtReal cap = rep.real_interval_length + ExtReal(4);
  ExtReal dy = y_max / ExtReal(M);
  auto lines = trace_lines(P, dy, M, cap);
  rep.area_proxy = proxy_from_lines(lines, dy);
  std::vector<ExtReal> x = left_abscissas(lines);
  rep.convexity_penalty = convexity_penalty_from_samples(x, dy);
  for (std::size_t j = 0; j < x.size(); ++j)
    rep.boundary_samples.emplace_back(ExtReal(static_cast<int>(j)) * dy, x[j]);
  return rep;
}

std::string region_csv(const StabilityPolynomial& P, const ExtReal& re0,
                       const ExtReal& re1, const ExtReal& im0,
                       const ExtReal& im1, int nx, int ny) {
  std::ostringstream os;
  os << "re,im,stable\n";
  char buf[64];
  for (int iy = 0; iy < ny; ++iy) {
    ExtReal im = ny > 1 ? im0 + (im1 - im0) * ExtReal(iy) / ExtReal(ny - 1) : im0;
    for (int ix = 0; ix < nx; ++ix) {
      ExtReal re =
          nx > 1 ? re0 + (re1 - re0) * ExtReal(ix) / ExtReal(nx - 1) : re0;
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d", re.to_double(),
                    im.to_double(), classify_point(P, re, im) ? 1 : 0);
      os << buf << "\n";
    }
  }
  return os.str();
}

std::string boundary_csv(const StabilityReport& report) {
  std::ostringstream os;
  os << "y,leftmost_x\n";
  for (const auto& [y, x] : report.boundary_samples)
    os << y.to_string() << "," << x.to_string() << "\n";
  return os.str();
}

}  // namespace qderk
