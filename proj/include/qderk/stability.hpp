// Copyright (c) 2026 The qderk authors.
// Distributed under the MIT license; see LICENSE for details.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qderk/linalg.hpp"
#include "qderk/tableau.hpp"

namespace qderk {

// R(z) = sum_j r_j z^j with r_0 = 1 and r_j = b . A^(j-1) 1 for j >= 1.
// For a tableau of verified order p, r_j = 1/j! for j <= p.
struct StabilityPolynomial {
  DenseVector coefficients;  // r_0 .. r_s

  int degree() const;
};

StabilityPolynomial stability_polynomial(const ButcherTableau& T);

// |R(re + i im)| <= 1.
bool classify_point(const StabilityPolynomial& P, const ExtReal& re,
                    const ExtReal& im);

// |min{x <= 0 : |R(xi)| <= 1 for all xi in [x, 0]}|, located by marching in
// steps of 1/16 and bisecting the bracketing step to width tol.
ExtReal real_stability_interval(const StabilityPolynomial& P,
                                const ExtReal& tol);

// Length of the maximal stable segment along Im z = y whose closure meets
// Re z <= 0 and is connected to the component of the origin (seed: the stable
// point on the line nearest x = 0, searched leftward).  Zero when the line
// carries no such segment.
ExtReal stability_segment_length(const StabilityPolynomial& P, const ExtReal& y);

// Left endpoint abscissa of that segment; empty when the trace fails.
std::optional<ExtReal> leftmost_boundary(const StabilityPolynomial& P,
                                         const ExtReal& y);

// S_proxy = sum_{k=0..M} w_k (L_{+y_k i} + L_{-y_k i}), y_k = k y_max / M,
// trapezoidal w_k; equals the trapezoid-rule approximation of the region area
// for a region symmetric about the real axis.
ExtReal area_proxy(const StabilityPolynomial& P, const ExtReal& y_max, int M);

// sum_{j=1}^{J-1} max(0, -(x_{j+1} - 2 x_j + x_{j-1}) / dy^2) over leftmost
// boundary abscissas x_j at y_j = j dy; a failed trace truncates the sample
// list at the last valid j = J.
ExtReal convexity_penalty(const StabilityPolynomial& P, const ExtReal& dy,
                          int M);
// The same sum evaluated on externally supplied abscissas.
ExtReal convexity_penalty_from_samples(const std::vector<ExtReal>& x,
                                       const ExtReal& dy);

struct StabilityReport {
  ExtReal real_interval_length;
  ExtReal area_proxy;
  ExtReal convexity_penalty;
  std::vector<std::pair<ExtReal, ExtReal>> boundary_samples;  // (y, leftmost x)
};

// Interval to tol, proxy over [0, y_max] with M lines, penalty on the same
// line spacing.
StabilityReport analyze_stability(const StabilityPolynomial& P,
                                  const ExtReal& y_max, int M,
                                  const ExtReal& tol);

// CSV "re,im,stable" over an nx-by-ny grid of [re0, re1] x [im0, im1].
std::string region_csv(const StabilityPolynomial& P, const ExtReal& re0,
                       const ExtReal& re1, const ExtReal& im0,
                       const ExtReal& im1, int nx, int ny);
// CSV "y,leftmost_x" of the report's boundary samples.
std::string boundary_csv(const StabilityReport& report);

}  // namespace qderk
