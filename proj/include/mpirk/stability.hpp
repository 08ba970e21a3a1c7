#ifndef MPIRK_STABILITY_HPP
#define MPIRK_STABILITY_HPP

// Linear stability functions of an IRK tableau and of its embedded companion:
//   R(z)    = 1 + z b^T (I - zA)^{-1} 1
//   Rhat(z) = 1 + gamma0 z + z bhat^T (I - zA)^{-1} 1

#include <optional>
#include <vector>

#include "mpirk/errors.hpp"
#include "mpirk/linalg.hpp"
#include "mpirk/tableau.hpp"

namespace mpirk {

/// Complex number as a pair of Reals. Only this module needs complex values.
struct ComplexMP {
  Real re, im;

  ComplexMP() = default;
  ComplexMP(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}

  friend ComplexMP operator+(const ComplexMP& a, const ComplexMP& b) { return {a.re + b.re, a.im + b.im}; }
  friend ComplexMP operator-(const ComplexMP& a, const ComplexMP& b) { return {a.re - b.re, a.im - b.im}; }
  friend ComplexMP operator*(const ComplexMP& a, const ComplexMP& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend ComplexMP operator*(const ComplexMP& a, const Real& s) { return {a.re * s, a.im * s}; }
  friend ComplexMP operator/(const ComplexMP& a, const ComplexMP& b) {
    // Smith's algorithm
    if (cmp_abs(b.re, b.im) >= 0) {
      Real r = b.im / b.re;
      Real d = b.re + b.im * r;
      return {(a.re + a.im * r) / d, (a.im - a.re * r) / d};
    }
    Real r = b.re / b.im;
    Real d = b.re * r + b.im;
    return {(a.re * r + a.im) / d, (a.im * r - a.re) / d};
  }

  bool is_zero() const { return re.is_zero() && im.is_zero(); }

  Real abs() const {
    Real r(re.context());
    mpfr_hypot(r.raw(), re.raw(), im.raw(), MPFR_RNDN);
    return r;
  }
};

namespace detail {

// |a| compared by the 1-norm |re| + |im|, enough for pivot selection.
inline Real pivot_size(const ComplexMP& a) { return abs(a.re) + abs(a.im); }

/// x = (I - zA)^{-1} 1 by Gaussian elimination with partial pivoting.
inline std::vector<ComplexMP> resolvent_ones(const MPMatrix& A, const ComplexMP& z) {
  const std::size_t m = A.rows();
  const PrecisionContext ctx = z.re.context();
  const Real zero(ctx);
  std::vector<std::vector<ComplexMP>> M(m, std::vector<ComplexMP>(m, ComplexMP(zero, zero)));
  std::vector<ComplexMP> x(m, ComplexMP(Real(1.0, ctx), zero));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      Real a(A(i, j), ctx);
      M[i][j] = ComplexMP(-(z.re * a), -(z.im * a));
      if (i == j) M[i][j].re += 1.0;
    }
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t p = k;
    Real best = pivot_size(M[k][k]);
    for (std::size_t i = k + 1; i < m; ++i) {
      Real s = pivot_size(M[i][k]);
      if (s > best) {
        best = std::move(s);
        p = i;
      }
    }
    if (best.is_zero()) throw SingularAtZ("I - zA is singular");
    std::swap(M[k], M[p]);
    std::swap(x[k], x[p]);
    for (std::size_t i = k + 1; i < m; ++i) {
      if (M[i][k].is_zero()) continue;
      ComplexMP l = M[i][k] / M[k][k];
      for (std::size_t j = k + 1; j < m; ++j) M[i][j] = M[i][j] - l * M[k][j];
      x[i] = x[i] - l * x[k];
    }
  }
  for (std::size_t i = m; i-- > 0;) {
    for (std::size_t j = i + 1; j < m; ++j) x[i] = x[i] - M[i][j] * x[j];
    x[i] = x[i] / M[i][i];
  }
  return x;
}

}  // namespace detail

/// R(z) of the base formula, or Rhat(z) of the embedded formula when `e` is given.
inline ComplexMP stability_value(const Tableau& t, const EmbeddedWeights* e, const ComplexMP& z) {
  const PrecisionContext ctx = z.re.context();
  const std::vector<ComplexMP> x = detail::resolvent_ones(t.A, z);
  const MPVector& w = e ? e->bhat : t.b;
  ComplexMP s{Real(ctx), Real(ctx)};
  for (std::size_t i = 0; i < x.size(); ++i) s = s + x[i] * Real(w[i], ctx);
  ComplexMP r = z * s;
  r.re += 1.0;
  if (e) r = r + z * Real(e->gamma0, ctx);
  if (!r.re.is_finite() || !r.im.is_finite()) throw SingularAtZ("stability function has a pole at z");
  return r;
}

struct StabilitySample {
  Real re, im, abs_r;  // abs_r = +inf at poles
};

/// Samples |R(z)| on an nx-by-ny grid over [re_lo, re_hi] x [im_lo, im_hi].
/// Rows run over the imaginary axis (outer), columns over the real axis.
/// nx = ny = 1 samples the single point (re_lo, im_lo).
inline std::vector<StabilitySample> stability_grid(const Tableau& t, const EmbeddedWeights* e, const Real& re_lo,
                                                   const Real& re_hi, const Real& im_lo, const Real& im_hi, int nx,
                                                   int ny) {
  const bool single = nx == 1 && ny == 1;
  if (!single && (nx < 2 || ny < 2)) throw InvalidArgument("stability_grid: nx and ny must be >= 2");
  const PrecisionContext ctx = re_lo.context();
  std::vector<StabilitySample> out;
  out.reserve(static_cast<std::size_t>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy) {
    Real im = single ? im_lo : im_lo + (im_hi - im_lo) * (static_cast<double>(iy) / (ny - 1));
    for (int ix = 0; ix < nx; ++ix) {
      Real re = single ? re_lo : re_lo + (re_hi - re_lo) * (static_cast<double>(ix) / (nx - 1));
      Real a = Real::inf(ctx);
      try {
        a = stability_value(t, e, ComplexMP(re, im)).abs();
      } catch (const SingularAtZ&) {
      }
      out.push_back({std::move(re), im, std::move(a)});
    }
  }
  return out;
}

/// Number of samples with Re z <= 0 and |R| > 1 + slack.
inline std::size_t count_unstable_left(const std::vector<StabilitySample>& grid, const Real& slack) {
  std::size_t n = 0;
  for (const auto& s : grid)
    if (s.re <= 0.0 && s.abs_r > slack + 1.0) ++n;
  return n;
}

}  // namespace mpirk

#endif  // MPIRK_STABILITY_HPP
