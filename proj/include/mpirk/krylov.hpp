#ifndef MPIRK_KRYLOV_HPP
#define MPIRK_KRYLOV_HPP

// BiCGSTAB and restarted GMRES over double or Real. Operators and
// preconditioners are callables Vector<T> -> Vector<T>; a preconditioner
// applies an approximation of the inverse.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "mpirk/errors.hpp"
#include "mpirk/linalg.hpp"

namespace mpirk {

template <class T>
using LinearMap = std::function<Vector<T>(const Vector<T>&)>;

template <class T>
struct KrylovResult {
  Vector<T> x;
  int iters = 0;
  /// Relative residual after each iteration (2-norm).
  std::vector<double> residuals;
};

namespace detail {
template <class T>
Vector<T> precondition(const LinearMap<T>& pre, const Vector<T>& v) {
  return pre ? pre(v) : v;
}

template <class T>
double ratio(const T& num, const T& den) {
  return to_double(num / den);
}
}  // namespace detail

/// Preconditioned BiCGSTAB. The preconditioner enters through the search
/// directions, so the recurrence tracks the true residual d - op x.
/// Throws KrylovBreakdown when rho or omega vanish, KrylovNotConverged after
/// max_iter iterations.
template <class T>
KrylovResult<T> bicgstab(const LinearMap<T>& op, const Vector<T>& d, const LinearMap<T>& pre, double tol,
                         int max_iter) {
  using std::abs;
  KrylovResult<T> out;
  out.x = zeros_like(d);
  const T dn = norm2(d);
  if (is_zero(dn)) return out;
  // |rho| below eps^2 |rhat| |r| counts as zero
  const double tiny = std::ldexp(1.0, -2 * (bits_of(dn) - 1));

  // Restart from the current iterate if the recursive residual drifted away
  // from the true one.
  while (out.iters < max_iter) {
    Vector<T> r = d - op(out.x);
    const Vector<T> rhat = r;
    const T rhat_norm = norm2(rhat);
    if (detail::ratio(norm2(r), dn) <= tol) return out;
    T rho = scalar_like(1.0, dn), alpha = rho, omega = rho;
    Vector<T> v = zeros_like(d), p = zeros_like(d);
    while (out.iters < max_iter) {
      ++out.iters;
      T rho_new = dot(rhat, r);
      if (abs(rho_new) <= rhat_norm * norm2(r) * tiny) throw KrylovBreakdown("BiCGSTAB breakdown: rho = 0");
      T beta = (rho_new / rho) * (alpha / omega);
      rho = std::move(rho_new);
      for (std::size_t i = 0; i < p.size(); ++i) {
        mul_sub(p[i], omega, v[i]);
        p[i] *= beta;
        p[i] += r[i];
      }
      Vector<T> phat = detail::precondition(pre, p);
      v = op(phat);
      T rv = dot(rhat, v);
      if (is_zero(rv)) throw KrylovBreakdown("BiCGSTAB breakdown: (rhat, v) = 0");
      alpha = rho / rv;
      Vector<T> s = r;
      axpy(-alpha, v, s);
      const double s_rel = detail::ratio(norm2(s), dn);
      if (s_rel <= tol) {
        axpy(alpha, phat, out.x);
        out.residuals.push_back(s_rel);
        break;
      }
      Vector<T> shat = detail::precondition(pre, s);
      Vector<T> t = op(shat);
      T tt = dot(t, t);
      if (is_zero(tt)) throw KrylovBreakdown("BiCGSTAB breakdown: t = 0");
      omega = dot(t, s) / tt;
      if (is_zero(omega)) throw KrylovBreakdown("BiCGSTAB breakdown: omega = 0");
      axpy(alpha, phat, out.x);
      axpy(omega, shat, out.x);
      r = std::move(s);
      axpy(-omega, t, r);
      const double r_rel = detail::ratio(norm2(r), dn);
      out.residuals.push_back(r_rel);
      if (r_rel <= tol) break;
      if (!std::isfinite(r_rel)) throw KrylovBreakdown("BiCGSTAB produced a non-finite residual");
    }
    if (detail::ratio(norm2(d - op(out.x)), dn) <= tol) return out;
  }
  throw KrylovNotConverged("BiCGSTAB did not converge in " + std::to_string(max_iter) + " iterations");
}

/// Restarted GMRES(restart) with right preconditioning, Givens rotations on
/// the Hessenberg matrix. The residual is non-increasing within a cycle.
template <class T>
KrylovResult<T> gmres(const LinearMap<T>& op, const Vector<T>& d, const LinearMap<T>& pre, double tol, int restart,
                      int max_iter) {
  using std::abs;
  using std::sqrt;
  if (restart < 1) throw InvalidArgument("gmres: restart must be >= 1");
  KrylovResult<T> out;
  out.x = zeros_like(d);
  const T dn = norm2(d);
  if (is_zero(dn)) return out;
  const T zero = scalar_like(0.0, dn);

  while (out.iters < max_iter) {
    Vector<T> r = d - op(out.x);
    T beta = norm2(r);
    if (detail::ratio(beta, dn) <= tol) return out;

    const int k_max = restart;
    std::vector<Vector<T>> V;
    V.reserve(k_max + 1);
    V.push_back(r);
    scale(V.back(), scalar_like(1.0, beta) / beta);
    std::vector<std::vector<T>> H(k_max + 1, std::vector<T>(k_max, zero));
    std::vector<T> cs(k_max, zero), sn(k_max, zero), g(k_max + 1, zero);
    g[0] = beta;

    int k = 0;
    bool done = false;
    for (; k < k_max && out.iters < max_iter; ++k) {
      ++out.iters;
      Vector<T> w = op(detail::precondition(pre, V[k]));
      for (int i = 0; i <= k; ++i) {  // modified Gram-Schmidt
        H[i][k] = dot(w, V[i]);
        axpy(-H[i][k], V[i], w);
      }
      H[k + 1][k] = norm2(w);
      const bool happy = is_zero(H[k + 1][k]);
      if (!happy) {
        scale(w, scalar_like(1.0, dn) / H[k + 1][k]);
        V.push_back(std::move(w));
      }
      for (int i = 0; i < k; ++i) {
        T tmp = cs[i] * H[i][k] + sn[i] * H[i + 1][k];
        H[i + 1][k] = cs[i] * H[i + 1][k] - sn[i] * H[i][k];
        H[i][k] = std::move(tmp);
      }
      T denom = sqrt(H[k][k] * H[k][k] + H[k + 1][k] * H[k + 1][k]);
      if (is_zero(denom)) throw KrylovBreakdown("GMRES breakdown: zero Hessenberg column");
      cs[k] = H[k][k] / denom;
      sn[k] = H[k + 1][k] / denom;
      H[k][k] = std::move(denom);
      H[k + 1][k] = zero;
      g[k + 1] = -(sn[k] * g[k]);
      g[k] = cs[k] * g[k];
      const double rel = to_double(abs(g[k + 1]) / dn);
      out.residuals.push_back(rel);
      if (rel <= tol || happy) {
        ++k;
        done = true;
        break;
      }
    }
    // back substitution on the k x k triangle
    std::vector<T> yk(k, zero);
    for (int i = k; i-- > 0;) {
      T s = g[i];
      for (int j = i + 1; j < k; ++j) mul_sub(s, H[i][j], yk[j]);
      yk[i] = s / H[i][i];
    }
    Vector<T> update = zeros_like(d);
    for (int j = 0; j < k; ++j) axpy(yk[j], V[j], update);
    update = detail::precondition(pre, update);
    for (std::size_t i = 0; i < update.size(); ++i) out.x[i] += update[i];
    if (done && detail::ratio(norm2(d - op(out.x)), dn) <= tol) return out;
  }
  throw KrylovNotConverged("GMRES did not converge in " + std::to_string(max_iter) + " iterations");
}

}  // namespace mpirk

#endif  // MPIRK_KRYLOV_HPP
