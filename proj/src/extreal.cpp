// Copyright (c) 2026 The qderk authors.
// Distributed under the MIT license; see LICENSE for details.

#include "qderk/extreal.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <stdexcept>

namespace qderk {

namespace {

std::atomic<mpfr_prec_t> g_default_precision{0};

mpfr_prec_t initial_default() {
  if (const char* env = std::getenv("QD_ERK_PRECISION")) {
    char* end = nullptr;
    long bits = std::strtol(env, &end, 10);
    if (end != env && bits >= MPFR_PREC_MIN && bits <= 1 << 20) {
      return static_cast<mpfr_prec_t>(bits);
    }
  }
  return 256;
}

mpfr_prec_t max_prec(const ExtReal& a, const ExtReal& b) {
  return std::max(a.precision(), b.precision());
}

}  // namespace

mpfr_prec_t ExtReal::default_precision() {
  mpfr_prec_t p = g_default_precision.load(std::memory_order_relaxed);
  if (p == 0) {
    p = initial_default();
    g_default_precision.store(p, std::memory_order_relaxed);
  }
  return p;
}

void ExtReal::set_default_precision(mpfr_prec_t prec) {
  if (prec < MPFR_PREC_MIN) throw std::invalid_argument("precision too small");
  g_default_precision.store(prec, std::memory_order_relaxed);
}

ExtReal::ExtReal() {
  mpfr_init2(v_, default_precision());
  mpfr_set_zero(v_, 1);
}

ExtReal::ExtReal(const ExtReal& other) {
  mpfr_init2(v_, other.precision());
  mpfr_set(v_, other.v_, MPFR_RNDN);
}

ExtReal::ExtReal(ExtReal&& other) noexcept {
  v_[0] = other.v_[0];
  mpfr_init2(other.v_, MPFR_PREC_MIN);
  mpfr_set_zero(other.v_, 1);
}

ExtReal& ExtReal::operator=(const ExtReal& other) {
  if (this != &other) {
    mpfr_set_prec(v_, other.precision());
    mpfr_set(v_, other.v_, MPFR_RNDN);
  }
  return *this;
}

ExtReal& ExtReal::operator=(ExtReal&& other) noexcept {
  if (this != &other) {
    mpfr_swap(v_, other.v_);
  }
  return *this;
}

ExtReal::~ExtReal() { mpfr_clear(v_); }

ExtReal::ExtReal(int v, mpfr_prec_t prec) {
  mpfr_init2(v_, prec);
  mpfr_set_si(v_, v, MPFR_RNDN);
}

ExtReal::ExtReal(long v, mpfr_prec_t prec) {
  mpfr_init2(v_, prec);
  mpfr_set_si(v_, v, MPFR_RNDN);
}

ExtReal::ExtReal(double v, mpfr_prec_t prec) {
  mpfr_init2(v_, prec);
  mpfr_set_d(v_, v, MPFR_RNDN);
}

ExtReal ExtReal::from_string(const std::string& s, mpfr_prec_t prec) {
  ExtReal r(0, prec);
  if (mpfr_set_str(r.v_, s.c_str(), 10, MPFR_RNDN) != 0) {
    throw std::invalid_argument("ExtReal: cannot parse '" + s + "'");
  }
  return r;
}

mpfr_prec_t ExtReal::precision() const { return mpfr_get_prec(v_); }

ExtReal ExtReal::round_to(mpfr_prec_t prec) const {
  ExtReal r(0, prec);
  mpfr_set(r.v_, v_, MPFR_RNDN);
  return r;
}

double ExtReal::to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

long ExtReal::to_long() const { return mpfr_get_si(v_, MPFR_RNDN); }

bool ExtReal::is_finite() const { return mpfr_number_p(v_) != 0; }

bool ExtReal::is_zero() const { return mpfr_zero_p(v_) != 0; }

int ExtReal::sign() const { return mpfr_sgn(v_); }

std::string ExtReal::to_string() const {
  int digits = static_cast<int>(std::ceil(precision() * 0.302)) + 2;
  return to_string(digits);
}

std::string ExtReal::to_string(int digits) const {
  char* buf = nullptr;
  mpfr_asprintf(&buf, "%.*Re", digits - 1, v_);
  std::string out(buf);
  mpfr_free_str(buf);
  return out;
}

ExtReal ExtReal::operator-() const {
  ExtReal r(0, precision());
  mpfr_neg(r.v_, v_, MPFR_RNDN);
  return r;
}

#define QDERK_COMPOUND_OP(op, fn)                           \
  ExtReal& ExtReal::operator op(const ExtReal& rhs) {       \
    if (rhs.precision() > precision()) {                    \
      ExtReal tmp = round_to(rhs.precision());              \
      fn(tmp.v_, tmp.v_, rhs.v_, MPFR_RNDN);                \
      *this = std::move(tmp);                               \
    } else {                                                \
      fn(v_, v_, rhs.v_, MPFR_RNDN);                        \
    }                                                       \
    return *this;                                           \
  }

QDERK_COMPOUND_OP(+=, mpfr_add)
QDERK_COMPOUND_OP(-=, mpfr_sub)
QDERK_COMPOUND_OP(*=, mpfr_mul)
QDERK_COMPOUND_OP(/=, mpfr_div)
#undef QDERK_COMPOUND_OP

#define QDERK_BINARY_OP(op, fn)                             \
  ExtReal operator op(const ExtReal& a, const ExtReal& b) { \
    ExtReal r(0, max_prec(a, b));                           \
    fn(r.v_, a.v_, b.v_, MPFR_RNDN);                        \
    return r;                                               \
  }

QDERK_BINARY_OP(+, mpfr_add)
QDERK_BINARY_OP(-, mpfr_sub)
QDERK_BINARY_OP(*, mpfr_mul)
QDERK_BINARY_OP(/, mpfr_div)
#undef QDERK_BINARY_OP

bool operator==(const ExtReal& a, const ExtReal& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
bool operator!=(const ExtReal& a, const ExtReal& b) { return !(a == b); }
bool operator<(const ExtReal& a, const ExtReal& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
bool operator<=(const ExtReal& a, const ExtReal& b) { return mpfr_lessequal_p(a.v_, b.v_) != 0; }
bool operator>(const ExtReal& a, const ExtReal& b) { return mpfr_greater_p(a.v_, b.v_) != 0; }
bool operator>=(const ExtReal& a, const ExtReal& b) { return mpfr_greaterequal_p(a.v_, b.v_) != 0; }

ExtReal abs(const ExtReal& x) {
  ExtReal r(0, x.precision());
  mpfr_abs(r.raw(), x.raw(), MPFR_RNDN);
  return r;
}

ExtReal sqrt(const ExtReal& x) {
  ExtReal r(0, x.precision());
  mpfr_sqrt(r.raw(), x.raw(), MPFR_RNDN);
  return r;
}

ExtReal exp(const ExtReal& x) {
  ExtReal r(0, x.precision());
  mpfr_exp(r.raw(), x.raw(), MPFR_RNDN);
  return r;
}

ExtReal log(const ExtReal& x) {
  ExtReal r(0, x.precision());
  mpfr_log(r.raw(), x.raw(), MPFR_RNDN);
  return r;
}

ExtReal pow_int(const ExtReal& x, long k) {
  if (k < 0) throw std::invalid_argument("pow_int: negative exponent");
  ExtReal r(0, x.precision());
  if (k == 0) {
    mpfr_set_si(r.raw(), 1, MPFR_RNDN);
  } else {
    mpfr_pow_si(r.raw(), x.raw(), k, MPFR_RNDN);
  }
  return r;
}

ExtReal max(const ExtReal& a, const ExtReal& b) { return a >= b ? a : b; }
ExtReal min(const ExtReal& a, const ExtReal& b) { return a <= b ? a : b; }

std::ostream& operator<<(std::ostream& os, const ExtReal& x) {
  return os << x.to_string();
}

}  // namespace qderk
