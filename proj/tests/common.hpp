#ifndef MPIRK_TESTS_COMMON_HPP
#define MPIRK_TESTS_COMMON_HPP

#include <cmath>
#include <random>
#include <vector>

#include <mpirk/mpirk.hpp>

namespace testutil {

using namespace mpirk;

inline Real R(const char* s, PrecisionContext ctx) { return Real::from_string(s, ctx); }

inline double rel_diff(const Real& a, const Real& b) {
  if (b.is_zero()) return abs(a).to_double();
  return (abs(a - b) / abs(b)).to_double();
}

inline double rel_diff(const MPVector& a, const MPVector& b) {
  return (norm_inf(a - b) / norm_inf(b)).to_double();
}

inline MPMatrix random_matrix(std::size_t n, std::mt19937_64& gen, PrecisionContext ctx) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MPMatrix M(n, n, ctx);
  for (auto& v : M.data()) v = Real(u(gen), ctx);
  return M;
}

inline MPVector random_vector(std::size_t n, std::mt19937_64& gen, PrecisionContext ctx) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MPVector v(n, Real(ctx));
  for (auto& x : v) x = Real(u(gen), ctx);
  return v;
}

// least squares slope of log2(err) against log2(h)
inline double log2_slope(const std::vector<double>& h, const std::vector<double>& err) {
  const std::size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log2(h[i]), y = std::log2(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// y' = 0
inline IVProblem zero_problem(std::size_t n, PrecisionContext ctx) {
  IVProblem p;
  p.name = "zero";
  p.n = n;
  p.ctx = ctx;
  p.f = [n, ctx](const Real&, const MPVector&) { return MPVector(n, Real(ctx)); };
  p.jac = [n, ctx](const Real&, const MPVector&) { return Jacobian<Real>(MPMatrix(n, n, ctx)); };
  p.x0 = Real(ctx);
  p.x_end = Real(1.0, ctx);
  p.y0 = MPVector(n, Real(1.0, ctx));
  return p;
}

// y' = lambda y
inline IVProblem scalar_linear(double lambda, PrecisionContext ctx) {
  IVProblem p;
  p.name = "scalar";
  p.n = 1;
  p.ctx = ctx;
  const Real l(lambda, ctx);
  p.f = [l](const Real&, const MPVector& y) { return MPVector{l * y[0]}; };
  p.jac = [l, ctx](const Real&, const MPVector&) { return Jacobian<Real>(MPMatrix(1, 1, l)); };
  p.exact = [l](const Real& x) { return MPVector{exp(l * x)}; };
  p.x0 = Real(ctx);
  p.x_end = Real(1.0, ctx);
  p.y0 = MPVector{Real(1.0, ctx)};
  return p;
}

}  // namespace testutil

#endif
