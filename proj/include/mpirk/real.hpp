#ifndef MPIRK_REAL_HPP
#define MPIRK_REAL_HPP

// Arbitrary-precision binary floating point scalar backed by MPFR.
//
// Every Real carries its own significand width. Copies keep the source
// width; binary arithmetic produces a result at the wider of the two operand
// widths; compound assignment rounds into the destination's width. Moving
// between widths is always explicit (the converting constructor, round_to,
// or convert() in linalg.hpp).

#include <mpfr.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>

#include "mpirk/errors.hpp"

namespace mpirk {

/// Significand width used by every multiple-precision value.
struct PrecisionContext {
  int bits = 53;

  constexpr PrecisionContext() = default;
  constexpr explicit PrecisionContext(int b) : bits(b) {
    if (b < 24) throw InvalidArgument("precision must be at least 24 bits");
  }

  /// Bits needed to carry `digits` decimal digits: ceil(d * log2(10)).
  static PrecisionContext from_digits(int digits) {
    return PrecisionContext(static_cast<int>(std::ceil(digits * 3.321928094887362347870319429489)));
  }

  /// Relative spacing 2^(1-bits) as a double (underflows to 0 past ~1074 bits).
  double epsilon() const { return std::ldexp(1.0, 1 - bits); }

  PrecisionContext widened(int extra) const { return PrecisionContext(bits + extra); }

  friend constexpr bool operator==(PrecisionContext a, PrecisionContext b) { return a.bits == b.bits; }
};

class Real {
 public:
  Real() { init(53); mpfr_set_zero(v_, 1); }
  explicit Real(PrecisionContext ctx) { init(ctx.bits); mpfr_set_zero(v_, 1); }
  Real(double d, PrecisionContext ctx) { init(ctx.bits); mpfr_set_d(v_, d, MPFR_RNDN); }
  Real(const Real& o, PrecisionContext ctx) { init(ctx.bits); mpfr_set(v_, o.v_, MPFR_RNDN); }

  static Real from_int(long v, PrecisionContext ctx) {
    Real r(ctx);
    mpfr_set_si(r.v_, v, MPFR_RNDN);
    return r;
  }
  static Real from_ratio(long num, long den, PrecisionContext ctx) {
    Real r = from_int(num, ctx);
    mpfr_div_si(r.v_, r.v_, den, MPFR_RNDN);
    return r;
  }
  /// Parses decimal ("1e-30", "0.25") or hexadecimal ("0x1.8p+0") notation.
  static Real from_string(std::string_view s, PrecisionContext ctx) {
    Real r(ctx);
    std::string buf(s);
    char* end = nullptr;
    mpfr_strtofr(r.v_, buf.c_str(), &end, 0, MPFR_RNDN);
    if (buf.empty() || end == buf.c_str() || *end != '\0')
      throw InvalidArgument("not a number: '" + buf + "'");
    return r;
  }
  static Real inf(PrecisionContext ctx) {
    Real r(ctx);
    mpfr_set_inf(r.v_, 1);
    return r;
  }
  static Real pi(PrecisionContext ctx) {
    Real r(ctx);
    mpfr_const_pi(r.v_, MPFR_RNDN);
    return r;
  }

  Real(const Real& o) { init(o.prec()); mpfr_set(v_, o.v_, MPFR_RNDN); }
  Real(Real&& o) noexcept {
    v_[0] = o.v_[0];
    o.v_->_mpfr_d = nullptr;
  }
  Real& operator=(const Real& o) {
    if (this == &o) return *this;
    if (!live()) {
      init(o.prec());
    } else if (prec() != o.prec()) {
      mpfr_set_prec(v_, o.prec());
    }
    mpfr_set(v_, o.v_, MPFR_RNDN);
    return *this;
  }
  Real& operator=(Real&& o) noexcept {
    if (this != &o) std::swap(v_[0], o.v_[0]);
    return *this;
  }
  ~Real() {
    if (live()) mpfr_clear(v_);
  }

  int bits() const { return static_cast<int>(prec()); }
  PrecisionContext context() const { return PrecisionContext(bits()); }

  Real round_to(PrecisionContext ctx) const { return Real(*this, ctx); }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  long to_long() const { return mpfr_get_si(v_, MPFR_RNDN); }

  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  bool is_nan() const { return mpfr_nan_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }

  /// Lossless hexadecimal form, e.g. "0x1.8p+0".
  std::string to_hex() const { return format("%Ra"); }
  /// Decimal with `digits` significant digits.
  std::string to_string(int digits = 40) const {
    if (!is_finite()) return mpfr_nan_p(v_) ? "nan" : (sign() > 0 ? "inf" : "-inf");
    char* out = nullptr;
    mpfr_asprintf(&out, "%.*Re", digits - 1, v_);
    std::string s(out);
    mpfr_free_str(out);
    return s;
  }

  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }

  Real& operator+=(const Real& o) { mpfr_add(v_, v_, o.v_, MPFR_RNDN); return *this; }
  Real& operator-=(const Real& o) { mpfr_sub(v_, v_, o.v_, MPFR_RNDN); return *this; }
  Real& operator*=(const Real& o) { mpfr_mul(v_, v_, o.v_, MPFR_RNDN); return *this; }
  Real& operator/=(const Real& o) { mpfr_div(v_, v_, o.v_, MPFR_RNDN); return *this; }
  Real& operator+=(double d) { mpfr_add_d(v_, v_, d, MPFR_RNDN); return *this; }
  Real& operator-=(double d) { mpfr_sub_d(v_, v_, d, MPFR_RNDN); return *this; }
  Real& operator*=(double d) { mpfr_mul_d(v_, v_, d, MPFR_RNDN); return *this; }
  Real& operator/=(double d) { mpfr_div_d(v_, v_, d, MPFR_RNDN); return *this; }

  Real operator-() const {
    Real r(context());
    mpfr_neg(r.v_, v_, MPFR_RNDN);
    return r;
  }

#define MPIRK_REAL_BINOP(op, fn, fn_d, fn_rd)                                   \
  friend Real operator op(const Real& a, const Real& b) {                      \
    Real r(PrecisionContext(std::max(a.bits(), b.bits())));                    \
    fn(r.v_, a.v_, b.v_, MPFR_RNDN);                                           \
    return r;                                                                  \
  }                                                                            \
  friend Real operator op(const Real& a, double d) {                           \
    Real r(a.context());                                                       \
    fn_d(r.v_, a.v_, d, MPFR_RNDN);                                            \
    return r;                                                                  \
  }                                                                            \
  friend Real operator op(double d, const Real& a) {                           \
    Real r(a.context());                                                       \
    fn_rd(r.v_, d, a.v_);                                                      \
    return r;                                                                  \
  }

  MPIRK_REAL_BINOP(+, mpfr_add, mpfr_add_d, detail_add_rd)
  MPIRK_REAL_BINOP(-, mpfr_sub, mpfr_sub_d, detail_sub_rd)
  MPIRK_REAL_BINOP(*, mpfr_mul, mpfr_mul_d, detail_mul_rd)
  MPIRK_REAL_BINOP(/, mpfr_div, mpfr_div_d, detail_div_rd)
#undef MPIRK_REAL_BINOP

  friend int compare(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_); }
  friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
  friend bool operator<(const Real& a, const Real& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
  friend bool operator>(const Real& a, const Real& b) { return mpfr_greater_p(a.v_, b.v_) != 0; }
  friend bool operator<=(const Real& a, const Real& b) { return mpfr_lessequal_p(a.v_, b.v_) != 0; }
  friend bool operator>=(const Real& a, const Real& b) { return mpfr_greaterequal_p(a.v_, b.v_) != 0; }
  friend bool operator==(const Real& a, double d) { return mpfr_cmp_d(a.v_, d) == 0; }
  friend bool operator<(const Real& a, double d) { return mpfr_cmp_d(a.v_, d) < 0; }
  friend bool operator>(const Real& a, double d) { return mpfr_cmp_d(a.v_, d) > 0; }
  friend bool operator<=(const Real& a, double d) { return mpfr_cmp_d(a.v_, d) <= 0; }
  friend bool operator>=(const Real& a, double d) { return mpfr_cmp_d(a.v_, d) >= 0; }

  friend std::ostream& operator<<(std::ostream& os, const Real& r) { return os << r.to_string(20); }

 private:
  mpfr_t v_;

  void init(mpfr_prec_t p) { mpfr_init2(v_, p); }
  bool live() const { return v_->_mpfr_d != nullptr; }
  mpfr_prec_t prec() const { return mpfr_get_prec(v_); }

  std::string format(const char* fmt) const {
    char* out = nullptr;
    mpfr_asprintf(&out, fmt, v_);
    std::string s(out);
    mpfr_free_str(out);
    return s;
  }

  static void detail_add_rd(mpfr_ptr r, double d, mpfr_srcptr a) { mpfr_add_d(r, a, d, MPFR_RNDN); }
  static void detail_sub_rd(mpfr_ptr r, double d, mpfr_srcptr a) { mpfr_d_sub(r, d, a, MPFR_RNDN); }
  static void detail_mul_rd(mpfr_ptr r, double d, mpfr_srcptr a) { mpfr_mul_d(r, a, d, MPFR_RNDN); }
  static void detail_div_rd(mpfr_ptr r, double d, mpfr_srcptr a) { mpfr_d_div(r, d, a, MPFR_RNDN); }
};

// ---- elementary functions (results at the argument's width) ----

#define MPIRK_REAL_UNARY(name, fn)        \
  inline Real name(const Real& a) {       \
    Real r(a.context());                  \
    fn(r.raw(), a.raw(), MPFR_RNDN);      \
    return r;                             \
  }
MPIRK_REAL_UNARY(abs, mpfr_abs)
MPIRK_REAL_UNARY(sqrt, mpfr_sqrt)
MPIRK_REAL_UNARY(exp, mpfr_exp)
MPIRK_REAL_UNARY(log, mpfr_log)
MPIRK_REAL_UNARY(log2, mpfr_log2)
MPIRK_REAL_UNARY(cbrt, mpfr_cbrt)
MPIRK_REAL_UNARY(sin, mpfr_sin)
MPIRK_REAL_UNARY(cos, mpfr_cos)
#undef MPIRK_REAL_UNARY

inline Real pow(const Real& a, const Real& b) {
  Real r(PrecisionContext(std::max(a.bits(), b.bits())));
  mpfr_pow(r.raw(), a.raw(), b.raw(), MPFR_RNDN);
  return r;
}
inline Real pow(const Real& a, long e) {
  Real r(a.context());
  mpfr_pow_si(r.raw(), a.raw(), e, MPFR_RNDN);
  return r;
}
inline Real ldexp(const Real& a, long e) {
  Real r(a.context());
  mpfr_mul_2si(r.raw(), a.raw(), e, MPFR_RNDN);
  return r;
}
inline Real max(const Real& a, const Real& b) { return a < b ? b : a; }
inline Real min(const Real& a, const Real& b) { return b < a ? b : a; }

/// 2^e at the given width.
inline Real pow2(long e, PrecisionContext ctx) {
  Real r(ctx);
  mpfr_set_ui_2exp(r.raw(), 1, e, MPFR_RNDN);
  return r;
}

// ---- uniform scalar interface over double and Real ----
//
// Generic numerical code in this library is written against these helpers
// so the same template runs at IEEE double (the fast S-precision path) and
// at any MPFR width.

namespace detail {
// mul_add/mul_sub need a product temporary; keeping one per width per thread
// avoids an allocation per multiply-accumulate.
inline mpfr_ptr scratch(mpfr_prec_t p) {
  struct Slot {
    mpfr_t v;
    bool used = false;
    ~Slot() {
      if (used) mpfr_clear(v);
    }
  };
  thread_local std::array<Slot, 4> slots;
  thread_local unsigned next = 0;
  for (auto& s : slots)
    if (s.used && mpfr_get_prec(s.v) == p) return s.v;
  Slot& s = slots[next++ % slots.size()];
  if (s.used) {
    mpfr_set_prec(s.v, p);
  } else {
    mpfr_init2(s.v, p);
    s.used = true;
  }
  return s.v;
}
}  // namespace detail

inline void mul_add(double& acc, double a, double b) { acc += a * b; }
inline void mul_sub(double& acc, double a, double b) { acc -= a * b; }
inline void mul_add(Real& acc, const Real& a, const Real& b) {
  mpfr_ptr t = detail::scratch(mpfr_get_prec(acc.raw()));
  mpfr_mul(t, a.raw(), b.raw(), MPFR_RNDN);
  mpfr_add(acc.raw(), acc.raw(), t, MPFR_RNDN);
}
inline void mul_sub(Real& acc, const Real& a, const Real& b) {
  mpfr_ptr t = detail::scratch(mpfr_get_prec(acc.raw()));
  mpfr_mul(t, a.raw(), b.raw(), MPFR_RNDN);
  mpfr_sub(acc.raw(), acc.raw(), t, MPFR_RNDN);
}

/// Three-way comparison of |a| and |b|.
inline int cmp_abs(double a, double b) {
  const double x = std::fabs(a), y = std::fabs(b);
  return (x > y) - (x < y);
}
inline int cmp_abs(const Real& a, const Real& b) { return mpfr_cmpabs(a.raw(), b.raw()); }

inline bool is_zero(double a) { return a == 0.0; }
inline bool is_zero(const Real& a) { return a.is_zero(); }
inline bool is_finite(double a) { return std::isfinite(a); }
inline bool is_finite(const Real& a) { return a.is_finite(); }
inline double to_double(double a) { return a; }
inline double to_double(const Real& a) { return a.to_double(); }
inline int bits_of(double) { return 53; }
inline int bits_of(const Real& a) { return a.bits(); }

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static double make(double v, PrecisionContext) { return v; }
  static double convert(const Real& v) { return v.to_double(); }
  static double convert(double v) { return v; }
};

template <>
struct ScalarTraits<Real> {
  static Real make(double v, PrecisionContext ctx) { return Real(v, ctx); }
  static Real convert(const Real& v, PrecisionContext ctx) { return Real(v, ctx); }
  static Real convert(double v, PrecisionContext ctx) { return Real(v, ctx); }
};

/// Scalar of type T with value v at width ctx (ctx ignored for double).
template <class T>
T make_scalar(double v, PrecisionContext ctx) {
  return ScalarTraits<T>::make(v, ctx);
}

/// Scalar of type T with value v at the same width as `like`.
inline double scalar_like(double v, double) { return v; }
inline Real scalar_like(double v, const Real& like) { return Real(v, like.context()); }

/// Correctly rounded conversion from any scalar to type To at width ctx.
template <class To, class From>
To convert_scalar(const From& v, PrecisionContext ctx) {
  if constexpr (std::is_same_v<To, double>) {
    return to_double(v);
  } else {
    return ScalarTraits<Real>::convert(v, ctx);
  }
}

inline std::string mpfr_version_string() { return mpfr_get_version(); }

}  // namespace mpirk

#endif  // MPIRK_REAL_HPP
