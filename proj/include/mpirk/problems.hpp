#ifndef MPIRK_PROBLEMS_HPP
#define MPIRK_PROBLEMS_HPP

// Benchmark initial value problems with analytic Jacobians.

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>

#include "mpirk/errors.hpp"
#include "mpirk/linalg.hpp"
#include "mpirk/real.hpp"

namespace mpirk {

struct IVProblem {
  std::string name;
  std::size_t n = 0;
  PrecisionContext ctx{167};
  std::function<MPVector(const Real& x, const MPVector& y)> f;
  std::function<Jacobian<Real>(const Real& x, const MPVector& y)> jac;
  Real x0, x_end;
  MPVector y0;
  /// Closed-form solution, empty when unknown.
  std::function<MPVector(const Real& x)> exact;
  bool banded = false;
  std::size_t kl = 0, ku = 0;
  std::uint64_t seed = 0;

  bool has_exact() const { return static_cast<bool>(exact); }
};

struct ProblemOptions {
  std::uint64_t seed = 1;
  /// Reaction term 1 + u^2 v - 4 instead of 1 + u^2 v - 4u.
  bool constant_sink_brusselator = false;
};

namespace detail {
// Uniform in [-1, 1] from the top 53 bits, independent of the standard
// library's distribution implementation.
inline double uniform_pm1(std::mt19937_64& gen) { return std::ldexp(static_cast<double>(gen() >> 11), -52) - 1.0; }
}  // namespace detail

/// y' = -M y with M = R diag(n, ..., 1) R^-1 for a seeded uniform random R.
/// Seeds are advanced until cond_inf(R) < 1e6.
inline IVProblem make_linear_random(std::size_t n, std::uint64_t seed, PrecisionContext ctx) {
  if (n < 1) throw InvalidArgument("linear problem: n must be >= 1");
  MPMatrix R;
  LUFactorization<Real> lu;
  std::uint64_t used = seed;
  bool ok = false;
  for (int attempt = 0; attempt < 100 && !ok; ++attempt, ++used) {
    std::mt19937_64 gen(used);
    R = MPMatrix(n, n, ctx);
    for (auto& v : R.data()) v = Real(detail::uniform_pm1(gen), ctx);
    try {
      lu = lu_factor(R);
    } catch (const SingularMatrix&) {
      continue;
    }
    ok = norm_inf(R) * norm_inf(lu.inverse()) < 1e6;
    if (ok) break;
  }
  if (!ok) throw InvalidArgument("linear problem: no well-conditioned R found in 100 seeds");

  const MPMatrix Rinv = lu.inverse();
  MPMatrix RD = R;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) RD(i, j) *= static_cast<double>(n - j);
  auto M = std::make_shared<MPMatrix>(matmul(RD, Rinv));
  for (auto& v : M->data()) v = -v;

  IVProblem p;
  p.name = "linear" + std::to_string(n);
  p.n = n;
  p.ctx = ctx;
  p.seed = used;
  p.x0 = Real(ctx);
  p.x_end = Real(20.0, ctx);
  p.y0 = MPVector(n, Real(1.0, ctx));
  p.f = [M](const Real&, const MPVector& y) { return matvec(*M, y); };
  p.jac = [M](const Real&, const MPVector&) { return Jacobian<Real>(*M); };

  auto Rs = std::make_shared<MPMatrix>(R);
  auto w = std::make_shared<MPVector>(matvec(Rinv, p.y0));
  p.exact = [Rs, w, n, ctx](const Real& x) {
    MPVector s = *w;
    for (std::size_t j = 0; j < n; ++j) s[j] *= exp(Real(x, ctx) * -static_cast<double>(n - j));
    return matvec(*Rs, s);
  };
  return p;
}

/// y' = -x y, y(0) = 1, y = exp(-x^2/2).
inline IVProblem make_mxy(PrecisionContext ctx) {
  IVProblem p;
  p.name = "mxy";
  p.n = 1;
  p.ctx = ctx;
  p.x0 = Real(ctx);
  p.x_end = Real(10.0, ctx);
  p.y0 = {Real(1.0, ctx)};
  p.f = [](const Real& x, const MPVector& y) { return MPVector{-(x * y[0])}; };
  p.jac = [ctx](const Real& x, const MPVector&) {
    MPMatrix J(1, 1, ctx);
    J(0, 0) = -Real(x, ctx);
    return Jacobian<Real>(std::move(J));
  };
  p.exact = [ctx](const Real& x) {
    Real e(x, ctx);
    e = exp(-(e * e) / 2.0);
    return MPVector{e};
  };
  return p;
}

/// sigma = 10, r = 470/19, b = 8/3, y(0) = (0, 1, 0).
inline IVProblem make_lorenz(PrecisionContext ctx) {
  const Real sigma(10.0, ctx), r = Real::from_ratio(470, 19, ctx), b = Real::from_ratio(8, 3, ctx);
  IVProblem p;
  p.name = "lorenz";
  p.n = 3;
  p.ctx = ctx;
  p.x0 = Real(ctx);
  p.x_end = Real(50.0, ctx);
  p.y0 = {Real(0.0, ctx), Real(1.0, ctx), Real(0.0, ctx)};
  p.f = [=](const Real&, const MPVector& y) {
    return MPVector{sigma * (y[1] - y[0]), (r - y[2]) * y[0] - y[1], y[0] * y[1] - b * y[2]};
  };
  p.jac = [=](const Real&, const MPVector& y) {
    MPMatrix J(3, 3, ctx);
    J(0, 0) = -sigma;
    J(0, 1) = sigma;
    J(1, 0) = r - y[2];
    J(1, 1) = Real(-1.0, ctx);
    J(1, 2) = -y[0];
    J(2, 0) = y[1];
    J(2, 1) = y[0];
    J(2, 2) = -b;
    return Jacobian<Real>(std::move(J));
  };
  return p;
}

/// Van der Pol with stiffness parameter 1e-6, y(0) = (2, 0).
inline IVProblem make_vdpol(PrecisionContext ctx) {
  const Real inv_eps(1e6, ctx);
  IVProblem p;
  p.name = "vdpol";
  p.n = 2;
  p.ctx = ctx;
  p.x0 = Real(ctx);
  p.x_end = Real(2.0, ctx);
  p.y0 = {Real(2.0, ctx), Real(0.0, ctx)};
  p.f = [=](const Real&, const MPVector& y) {
    Real g = (1.0 - y[0] * y[0]) * y[1] - y[0];
    return MPVector{y[1], g * inv_eps};
  };
  p.jac = [=](const Real&, const MPVector& y) {
    MPMatrix J(2, 2, ctx);
    J(0, 1) = Real(1.0, ctx);
    J(1, 0) = -(y[0] * y[1] * 2.0 + 1.0) * inv_eps;
    J(1, 1) = (1.0 - y[0] * y[0]) * inv_eps;
    return Jacobian<Real>(std::move(J));
  };
  return p;
}

/// Method-of-lines Brusselator on N interior points, ordered
/// (u_1, v_1, u_2, v_2, ...) so that the Jacobian has kl = ku = 2.
inline IVProblem make_brusselator_1d(std::size_t N, PrecisionContext ctx, bool constant_sink = false) {
  if (N < 3) throw InvalidArgument("brusselator: N must be >= 3");
  const Real dx = Real::from_ratio(1, static_cast<long>(N + 1), ctx);
  const Real alpha = Real::from_ratio(1, 50, ctx) / (dx * dx);
  IVProblem p;
  p.name = "bruss1d:" + std::to_string(N);
  p.n = 2 * N;
  p.ctx = ctx;
  p.x0 = Real(ctx);
  p.x_end = Real(10.0, ctx);
  p.banded = true;
  p.kl = p.ku = 2;
  const Real two_pi = Real::pi(ctx) * 2.0;
  for (std::size_t i = 1; i <= N; ++i) {
    p.y0.push_back(1.0 + sin(two_pi * dx * static_cast<double>(i)));
    p.y0.push_back(Real(3.0, ctx));
  }
  const Real u_bc(1.0, ctx), v_bc(3.0, ctx);
  p.f = [=](const Real&, const MPVector& y) {
    MPVector out;
    out.reserve(2 * N);
    for (std::size_t i = 0; i < N; ++i) {
      const Real& u = y[2 * i];
      const Real& v = y[2 * i + 1];
      const Real& ul = i == 0 ? u_bc : y[2 * i - 2];
      const Real& ur = i + 1 == N ? u_bc : y[2 * i + 2];
      const Real& vl = i == 0 ? v_bc : y[2 * i - 1];
      const Real& vr = i + 1 == N ? v_bc : y[2 * i + 3];
      const Real uuv = u * u * v;
      Real du = uuv + 1.0;
      du -= constant_sink ? Real(4.0, ctx) : u * 4.0;
      du += alpha * (ul - u * 2.0 + ur);
      Real dv = u * 3.0 - uuv + alpha * (vl - v * 2.0 + vr);
      out.push_back(std::move(du));
      out.push_back(std::move(dv));
    }
    return out;
  };
  p.jac = [=](const Real&, const MPVector& y) {
    BandedMatrix<Real> J(2 * N, 2, 2, ctx);
    for (std::size_t i = 0; i < N; ++i) {
      const std::size_t ru = 2 * i, rv = 2 * i + 1;
      const Real& u = y[ru];
      const Real& v = y[rv];
      const Real uv2 = u * v * 2.0;
      const Real uu = u * u;
      J.at(ru, ru) = uv2 - alpha * 2.0;
      if (!constant_sink) J.at(ru, ru) -= 4.0;
      J.at(ru, rv) = uu;
      J.at(rv, ru) = 3.0 - uv2;
      J.at(rv, rv) = -uu - alpha * 2.0;
      if (i > 0) {
        J.at(ru, ru - 2) = alpha;
        J.at(rv, rv - 2) = alpha;
      }
      if (i + 1 < N) {
        J.at(ru, ru + 2) = alpha;
        J.at(rv, rv + 2) = alpha;
      }
    }
    return Jacobian<Real>(std::move(J));
  };
  return p;
}

/// Registry lookup: linear128 (or linearN), mxy, lorenz, vdpol, bruss1d:N.
inline IVProblem make_problem(const std::string& name, PrecisionContext ctx, const ProblemOptions& opt = {}) {
  if (name == "mxy") return make_mxy(ctx);
  if (name == "lorenz") return make_lorenz(ctx);
  if (name == "vdpol") return make_vdpol(ctx);
  auto parse_size = [&](const std::string& digits) -> std::size_t {
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
      throw InvalidArgument("bad problem size in '" + name + "'");
    return std::stoul(digits);
  };
  if (name.rfind("linear", 0) == 0) {
    std::string rest = name.substr(6);
    if (!rest.empty() && rest[0] == ':') rest = rest.substr(1);
    return make_linear_random(rest.empty() ? 128 : parse_size(rest), opt.seed, ctx);
  }
  if (name.rfind("bruss1d:", 0) == 0) return make_brusselator_1d(parse_size(name.substr(8)), ctx, opt.constant_sink_brusselator);
  throw InvalidArgument("unknown problem '" + name + "'");
}

}  // namespace mpirk

#endif  // MPIRK_PROBLEMS_HPP
