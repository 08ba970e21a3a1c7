#ifndef MPIRK_TABLEAU_HPP
#define MPIRK_TABLEAU_HPP

// Implicit Runge-Kutta coefficient generation: Gauss (any m) and 3-stage
// Radau IIA tableaux, the W-transformation that tridiagonalizes a Gauss
// coefficient matrix, and embedded weights for an explicit-first-stage
// companion formula.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "mpirk/errors.hpp"
#include "mpirk/linalg.hpp"
#include "mpirk/real.hpp"

namespace mpirk {

enum class Family { Gauss, RadauIIA };

inline std::string to_string(Family f) { return f == Family::Gauss ? "gauss" : "radau2a"; }

inline Family family_from_string(const std::string& s) {
  if (s == "gauss") return Family::Gauss;
  if (s == "radau2a" || s == "radauIIA" || s == "radau") return Family::RadauIIA;
  throw InvalidArgument("unknown tableau family '" + s + "'");
}

struct Tableau {
  Family family = Family::Gauss;
  int m = 0;
  int order = 0;
  PrecisionContext ctx;
  MPVector c;
  MPMatrix A;
  MPVector b;
};

namespace detail {

// Extra bits carried while generating coefficients; the Vandermonde systems
// lose roughly 2 bits per stage on [0, 1].
inline PrecisionContext generation_context(PrecisionContext ctx, int m) { return ctx.widened(64 + 4 * m); }

/// Legendre P_j(t) and P_{j-1}(t) on [-1, 1] by the three-term recurrence.
template <class T>
std::pair<T, T> legendre_pair(int j, const T& t) {
  T p_prev = scalar_like(1.0, t);
  if (j == 0) return {p_prev, scalar_like(0.0, t)};
  T p = t;
  for (int k = 1; k < j; ++k) {
    // P_{k+1} = ((2k+1) t P_k - k P_{k-1}) / (k+1)
    T next = t * p;
    next *= static_cast<double>(2 * k + 1);
    T tmp = p_prev * static_cast<double>(k);
    next -= tmp;
    next /= static_cast<double>(k + 1);
    p_prev = std::move(p);
    p = std::move(next);
  }
  return {p, p_prev};
}

inline long long binomial(int n, int k) {
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// sqrt(2j+1) * sum_k (-1)^(j+k) C(j,k) C(j+k,k) x^k
inline Real shifted_legendre_binomial(int j, const Real& x) {
  const PrecisionContext ctx = x.context();
  Real sum(ctx);
  Real xk = Real(1.0, ctx);
  for (int k = 0; k <= j; ++k) {
    Real term = Real::from_int(binomial(j, k) * binomial(j + k, k), ctx) * xk;
    if ((j + k) % 2 == 0) {
      sum += term;
    } else {
      sum -= term;
    }
    xk *= x;
  }
  return sqrt(Real::from_int(2 * j + 1, ctx)) * sum;
}

inline Real shifted_legendre_recurrence(int j, const Real& x) {
  Real t = x * 2.0;
  t -= 1.0;
  return sqrt(Real::from_int(2 * j + 1, x.context())) * legendre_pair(j, t).first;
}

/// V(q, i) = c_i^q for q = 0..m-1.
inline MPMatrix vandermonde(const MPVector& c) {
  const std::size_t m = c.size();
  MPMatrix V(m, m, c.front().context());
  for (std::size_t i = 0; i < m; ++i) {
    Real p = Real(1.0, c[i].context());
    for (std::size_t q = 0; q < m; ++q) {
      V(q, i) = p;
      p *= c[i];
    }
  }
  return V;
}

inline MPVector round_all(const MPVector& v, PrecisionContext ctx) { return convert<Real>(v, ctx); }

}  // namespace detail

/// Degree-j shifted Legendre polynomial on [0, 1], normalized so that
/// int_0^1 P~_j^2 = 1. Uses the explicit binomial sum up to j = 20 and the
/// three-term recurrence beyond.
inline Real shifted_legendre(int j, const Real& x) {
  if (j < 0 || j > 60) throw InvalidArgument("shifted_legendre: degree out of range [0, 60]");
  if (j <= 20) return detail::shifted_legendre_binomial(j, x);
  return detail::shifted_legendre_recurrence(j, x);
}

/// Roots of P~_m in (0, 1), ascending, at width ctx.
inline MPVector shifted_legendre_roots(int m, PrecisionContext ctx) {
  MPVector roots;
  roots.reserve(m);
  const Real tol = pow2(4 - ctx.bits, ctx);
  for (int i = 1; i <= m; ++i) {
    // Chebyshev node, polished in double first.
    double t = std::cos((2.0 * i - 1.0) * std::numbers::pi / (2.0 * m));
    for (int it = 0; it < 100; ++it) {
      auto [p, q] = detail::legendre_pair(m, t);
      const double dp = m * (t * p - q) / (t * t - 1.0);
      const double step = p / dp;
      t -= step;
      if (std::fabs(step) < 1e-15) break;
    }
    Real tt(t, ctx);
    bool converged = false;
    for (int it = 0; it < 40; ++it) {
      auto [p, q] = detail::legendre_pair(m, tt);
      Real t2m1 = tt * tt;
      t2m1 -= 1.0;
      Real dp = (tt * p - q) * static_cast<double>(m) / t2m1;
      Real step = p / dp;
      tt -= step;
      if (abs(step) <= tol) {
        converged = true;
        break;
      }
    }
    if (!converged) throw RootFindingFailure("Newton iteration on the Legendre polynomial did not converge (m=" + std::to_string(m) + ")");
    Real x = tt + 1.0;
    x /= 2.0;
    roots.push_back(std::move(x));
  }
  std::sort(roots.begin(), roots.end(), [](const Real& a, const Real& b) { return a < b; });
  for (std::size_t i = 1; i < roots.size(); ++i)
    if (!(roots[i - 1] < roots[i])) throw RootFindingFailure("Legendre root iteration produced duplicate roots");
  return roots;
}

/// m-stage Gauss collocation formula of order 2m.
inline Tableau gauss_tableau(int m, PrecisionContext ctx) {
  if (m < 1 || m > 50) throw InvalidArgument("gauss_tableau: m must lie in [1, 50]");
  const PrecisionContext wctx = detail::generation_context(ctx, m);
  MPVector c = shifted_legendre_roots(m, wctx);

  auto lu = lu_factor(detail::vandermonde(c));
  MPVector rhs(m, Real(wctx));
  for (int q = 0; q < m; ++q) rhs[q] = Real::from_ratio(1, q + 1, wctx);
  MPVector b = lu.solve(rhs);

  MPMatrix A(m, m, ctx);
  for (int i = 0; i < m; ++i) {
    Real cq = c[i];
    for (int q = 0; q < m; ++q) {
      rhs[q] = cq / static_cast<double>(q + 1);
      cq *= c[i];
    }
    MPVector row = lu.solve(rhs);
    for (int j = 0; j < m; ++j) A(i, j) = Real(row[j], ctx);
  }

  Tableau t;
  t.family = Family::Gauss;
  t.m = m;
  t.order = 2 * m;
  t.ctx = ctx;
  t.c = detail::round_all(c, ctx);
  t.b = detail::round_all(b, ctx);
  t.A = std::move(A);
  return t;
}

/// 3-stage order-5 Radau IIA formula from its closed-form coefficients.
inline Tableau radau2a_tableau(PrecisionContext ctx) {
  const PrecisionContext w = ctx.widened(32);
  const Real s6 = sqrt(Real(6.0, w));
  auto ratio = [&](double a, double b6, double den) {
    // (a + b6 * sqrt(6)) / den
    Real v = s6 * b6;
    v += a;
    v /= den;
    return Real(v, ctx);
  };
  Tableau t;
  t.family = Family::RadauIIA;
  t.m = 3;
  t.order = 5;
  t.ctx = ctx;
  t.c = {ratio(4, -1, 10), ratio(4, 1, 10), Real(1.0, ctx)};
  t.A = MPMatrix(3, 3, ctx);
  t.A(0, 0) = ratio(88, -7, 360);
  t.A(0, 1) = ratio(296, -169, 1800);
  t.A(0, 2) = ratio(-2, 3, 225);
  t.A(1, 0) = ratio(296, 169, 1800);
  t.A(1, 1) = ratio(88, 7, 360);
  t.A(1, 2) = ratio(-2, -3, 225);
  t.A(2, 0) = ratio(16, -1, 36);
  t.A(2, 1) = ratio(16, 1, 36);
  t.A(2, 2) = Real::from_ratio(1, 9, ctx);
  t.b = {t.A(2, 0), t.A(2, 1), t.A(2, 2)};
  return t;
}

inline Tableau make_tableau(Family family, int m, PrecisionContext ctx) {
  if (family == Family::Gauss) return gauss_tableau(m, ctx);
  if (m != 3) throw InvalidArgument("Radau IIA is provided for m = 3 only");
  return radau2a_tableau(ctx);
}

/// max_q |sum_i b_i c_i^(q-1) - 1/q| over q = 1..qmax (quadrature conditions B(qmax)).
inline Real quadrature_residual(const MPVector& c, const MPVector& b, int qmax, const Real* gamma0 = nullptr) {
  const PrecisionContext w = c.front().context().widened(32);
  Real worst(w);
  for (int q = 1; q <= qmax; ++q) {
    Real s(w);
    // the explicit stage sits at c_0 = 0, contributing only to q = 1
    if (gamma0 && q == 1) s += Real(*gamma0, w);
    for (std::size_t i = 0; i < c.size(); ++i) {
      Real term = pow(Real(c[i], w), q - 1);
      term *= Real(b[i], w);
      s += term;
    }
    s -= Real::from_ratio(1, q, w);
    worst = max(worst, abs(s));
  }
  return worst;
}

/// max |sum_j a_ij c_j^(q-1) - c_i^q / q| over i and q = 1..qmax (C(qmax)).
inline Real collocation_residual(const Tableau& t, int qmax) {
  const PrecisionContext w = t.ctx.widened(32);
  Real worst(w);
  for (int i = 0; i < t.m; ++i)
    for (int q = 1; q <= qmax; ++q) {
      Real s(w);
      for (int j = 0; j < t.m; ++j) {
        Real term = pow(Real(t.c[j], w), q - 1);
        term *= Real(t.A(i, j), w);
        s += term;
      }
      s -= pow(Real(t.c[i], w), q) / static_cast<double>(q);
      worst = max(worst, abs(s));
    }
  return worst;
}

/// Data of the W-transformation W^T B A W = X for a Gauss tableau.
struct WTransform {
  MPMatrix W;      // W(i, j) = P~_j(c_i)
  MPMatrix X;      // W^T diag(b) A W as computed
  MPVector zeta;   // zeta_i = 1 / (2 sqrt(4 i^2 - 1)), i = 1..m-1
  MPVector bdiag;  // b

  int m() const { return static_cast<int>(bdiag.size()); }
};

inline MPVector w_zeta(int m, PrecisionContext ctx) {
  MPVector z;
  for (int i = 1; i < m; ++i) {
    Real v = sqrt(Real::from_int(4L * i * i - 1, ctx.widened(16)));
    v *= 2.0;
    z.push_back(Real(1.0 / v, ctx));
  }
  return z;
}

/// Closed-form X: 1/2 at (0,0), -zeta on the superdiagonal, zeta below.
inline MPMatrix w_closed_form_x(const MPVector& zeta, PrecisionContext ctx) {
  const std::size_t m = zeta.size() + 1;
  MPMatrix X(m, m, ctx);
  X(0, 0) = Real(0.5, ctx);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    X(i, i + 1) = -Real(zeta[i], ctx);
    X(i + 1, i) = Real(zeta[i], ctx);
  }
  return X;
}

inline WTransform w_transform(const Tableau& t) {
  if (t.family != Family::Gauss) throw InvalidArgument("w_transform: only Gauss tableaux have the tridiagonal W form");
  const int m = t.m;
  const PrecisionContext ctx = t.ctx;
  const PrecisionContext w = detail::generation_context(ctx, m);

  MPMatrix W(m, m, w);
  for (int i = 0; i < m; ++i) {
    Real ci(t.c[i], w);
    for (int j = 0; j < m; ++j) W(i, j) = shifted_legendre(j, ci);
  }
  MPMatrix BW = W;  // diag(b) W
  MPMatrix AW = matmul(convert(t.A, w), W);
  for (int i = 0; i < m; ++i) {
    Real bi(t.b[i], w);
    for (int j = 0; j < m; ++j) {
      BW(i, j) *= bi;
      AW(i, j) *= bi;
    }
  }
  const MPMatrix Wt = transpose(W);
  const MPMatrix D = matmul(Wt, BW);
  const MPMatrix X = matmul(Wt, AW);

  WTransform out;
  out.zeta = w_zeta(m, ctx);
  const MPMatrix Xc = w_closed_form_x(out.zeta, w);
  const Real tol = pow2(8 - ctx.bits, w);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Real d = D(i, j);
      if (i == j) d -= 1.0;
      if (abs(d) > tol) throw TransformCheckFailure("W^T B W deviates from the identity");
      if (abs(X(i, j) - Xc(i, j)) > tol) throw TransformCheckFailure("W^T B A W deviates from the tridiagonal X");
    }
  out.W = convert(W, ctx);
  out.X = convert(X, ctx);
  out.bdiag = t.b;
  return out;
}

/// Weights of the explicit-first-stage embedded formula: gamma0 on f(x, y)
/// and bhat on the stages, chosen so B(m) holds.
struct EmbeddedWeights {
  Real gamma0;
  MPVector bhat;
  int order_hat = 0;
};

/// Solves V(c) bhat = [1 - gamma0, 1/2, ..., 1/m]. gamma0 = 0 is accepted
/// here (it reproduces b); embedded_weights() rejects it.
inline EmbeddedWeights solve_embedded_weights(const Tableau& t, const Real& gamma0) {
  const PrecisionContext w = detail::generation_context(t.ctx, t.m);
  MPVector cw = convert(t.c, w);
  MPVector rhs;
  for (int q = 0; q < t.m; ++q) rhs.push_back(Real::from_ratio(1, q + 1, w));
  rhs[0] -= Real(gamma0, w);
  auto lu = lu_factor(detail::vandermonde(cw));
  EmbeddedWeights e;
  e.gamma0 = Real(gamma0, t.ctx);
  e.bhat = detail::round_all(lu.solve(rhs), t.ctx);
  e.order_hat = std::min(t.m, t.order);
  return e;
}

inline EmbeddedWeights embedded_weights(const Tableau& t, const Real& gamma0) {
  if (gamma0.is_zero()) throw InvalidArgument("embedded_weights: gamma0 must be non-zero");
  return solve_embedded_weights(t, gamma0);
}

/// gamma0 used by the classical Radau IIA error estimator: the real
/// eigenvalue of A, (6 + 81^(1/3) - 9^(1/3)) / 30.
inline Real radau2a_classic_gamma0(PrecisionContext ctx) {
  const PrecisionContext w = ctx.widened(32);
  Real v = cbrt(Real(81.0, w)) - cbrt(Real(9.0, w));
  v += 6.0;
  v /= 30.0;
  return Real(v, ctx);
}

}  // namespace mpirk

#endif  // MPIRK_TABLEAU_HPP
