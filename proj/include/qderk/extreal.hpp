// Copyright (c) 2026 The qderk authors.
// Distributed under the MIT license; see LICENSE for details.

#pragma once

#include <mpfr.h>

#include <iosfwd>
#include <string>

namespace qderk {

// Arbitrary-precision binary floating-point scalar backed by MPFR.
//
// Every value carries its own precision in bits.  Arithmetic between two
// values is carried out at the maximum of the operand precisions; rounding is
// round-to-nearest throughout.  Decimal string conversion round-trips exactly
// at the stored precision.
class ExtReal {
 public:
  ExtReal();
  ExtReal(const ExtReal& other);
  ExtReal(ExtReal&& other) noexcept;
  ExtReal& operator=(const ExtReal& other);
  ExtReal& operator=(ExtReal&& other) noexcept;
  ~ExtReal();

  ExtReal(int v, mpfr_prec_t prec = default_precision());       // NOLINT
  ExtReal(long v, mpfr_prec_t prec = default_precision());      // NOLINT
  ExtReal(double v, mpfr_prec_t prec = default_precision());    // NOLINT

  static ExtReal from_string(const std::string& s,
                             mpfr_prec_t prec = default_precision());

  mpfr_prec_t precision() const;
  // Returns a copy rounded to the given precision.
  ExtReal round_to(mpfr_prec_t prec) const;

  double to_double() const;
  long to_long() const;
  bool is_finite() const;
  bool is_zero() const;
  int sign() const;

  // Scientific-notation decimal string with enough digits for an exact
  // round trip at this value's precision.
  std::string to_string() const;
  std::string to_string(int digits) const;

  ExtReal operator-() const;
  ExtReal& operator+=(const ExtReal& rhs);
  ExtReal& operator-=(const ExtReal& rhs);
  ExtReal& operator*=(const ExtReal& rhs);
  ExtReal& operator/=(const ExtReal& rhs);

  friend ExtReal operator+(const ExtReal& a, const ExtReal& b);
  friend ExtReal operator-(const ExtReal& a, const ExtReal& b);
  friend ExtReal operator*(const ExtReal& a, const ExtReal& b);
  friend ExtReal operator/(const ExtReal& a, const ExtReal& b);

  friend bool operator==(const ExtReal& a, const ExtReal& b);
  friend bool operator!=(const ExtReal& a, const ExtReal& b);
  friend bool operator<(const ExtReal& a, const ExtReal& b);
  friend bool operator<=(const ExtReal& a, const ExtReal& b);
  friend bool operator>(const ExtReal& a, const ExtReal& b);
  friend bool operator>=(const ExtReal& a, const ExtReal& b);

  friend ExtReal abs(const ExtReal& x);
  friend ExtReal sqrt(const ExtReal& x);
  friend ExtReal exp(const ExtReal& x);
  friend ExtReal log(const ExtReal& x);
  // x^k for integer k >= 0 (k = 0 gives 1 even at x = 0).
  friend ExtReal pow_int(const ExtReal& x, long k);

  mpfr_srcptr raw() const { return v_; }
  mpfr_ptr raw() { return v_; }

  // Process-wide default precision in bits.  Initialized from the
  // QD_ERK_PRECISION environment variable when set, else 256.
  static mpfr_prec_t default_precision();
  static void set_default_precision(mpfr_prec_t prec);

 private:
  mpfr_t v_;
};

ExtReal max(const ExtReal& a, const ExtReal& b);
ExtReal min(const ExtReal& a, const ExtReal& b);

std::ostream& operator<<(std::ostream& os, const ExtReal& x);

}  // namespace qderk
