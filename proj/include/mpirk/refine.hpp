#ifndef MPIRK_REFINE_HPP
#define MPIRK_REFINE_HPP

// S-L mixed precision iterative refinement for C x = d.
//
//   solve C^[S] x0 = d^[S];  x := x0
//   repeat:  r = d - C x          (L precision)
//            r' = r / ||r||       (then rounded to S)
//            solve C^[S] z = r'
//            x := x + ||r|| z     (L precision)
//
// The S-precision solve is any callable; S is double when s_ctx has 53 bits
// and Real at s_ctx otherwise.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mpirk/errors.hpp"
#include "mpirk/linalg.hpp"
#include "mpirk/real.hpp"

namespace mpirk {

enum class InnerSolver { DirectLU, BiCGSTAB, GMRES };
enum class Preconditioning { None, BlockLU_S };

inline std::string to_string(InnerSolver s) {
  switch (s) {
    case InnerSolver::DirectLU: return "lu";
    case InnerSolver::BiCGSTAB: return "bicgstab";
    case InnerSolver::GMRES: return "gmres";
  }
  return "?";
}

inline InnerSolver inner_solver_from_string(const std::string& s) {
  if (s == "lu" || s == "direct") return InnerSolver::DirectLU;
  if (s == "bicgstab") return InnerSolver::BiCGSTAB;
  if (s == "gmres") return InnerSolver::GMRES;
  throw InvalidArgument("unknown inner solver '" + s + "'");
}

inline std::string to_string(Preconditioning p) { return p == Preconditioning::None ? "none" : "blocklu"; }

inline Preconditioning preconditioning_from_string(const std::string& s) {
  if (s == "none") return Preconditioning::None;
  if (s == "blocklu" || s == "block-lu") return Preconditioning::BlockLU_S;
  throw InvalidArgument("unknown preconditioner '" + s + "'");
}

struct RefinementConfig {
  PrecisionContext s_ctx{53};
  PrecisionContext l_ctx{167};
  InnerSolver inner = InnerSolver::DirectLU;
  int restart = 30;
  Preconditioning precondition = Preconditioning::None;
  /// Target for ||r||_inf / ||d||_inf; must be >= 2^(8 - l_bits).
  Real tol;
  int max_iter = 30;
  /// Relative residual target of an S-precision Krylov solve.
  double inner_tol = 1e-10;
  int inner_max_iter = 400;

  static RefinementConfig make(PrecisionContext s, PrecisionContext l) {
    RefinementConfig c;
    c.s_ctx = s;
    c.l_ctx = l;
    c.tol = pow2(8 - l.bits, l);
    return c;
  }

  void validate() const {
    if (s_ctx.bits > l_ctx.bits) throw InvalidArgument("refinement: S precision exceeds L precision");
    if (tol < pow2(8 - l_ctx.bits, l_ctx)) throw InvalidArgument("refinement: tol below 2^(8 - l_bits)");
    if (max_iter < 0) throw InvalidArgument("refinement: max_iter must be non-negative");
  }

  bool s_is_double() const { return s_ctx.bits == 53; }
};

struct RefineResult {
  MPVector x;
  /// Number of correction solves (the initial solve is not counted).
  int iters = 0;
  bool converged = false;
  /// ||r_k||_inf / ||d||_inf for each computed residual.
  std::vector<Real> residuals;
};

/// solve_s: Vector<S> -> Vector<S>, an S-precision solver for C.
/// apply_l: MPVector -> MPVector, the product C x at L precision.
///
/// Stops when ||r|| / ||d|| <= tol, when a correction no longer changes x
/// at L precision, or when the residual stops halving below tol * N (a
/// correction that made it worse is undone). Throws
/// RefinementStalled when the residual fails to halve over three consecutive
/// iterations while still above tol * N.
template <class S, class SolveS, class ApplyL>
RefineResult mixed_refine(SolveS&& solve_s, ApplyL&& apply_l, const MPVector& d, const RefinementConfig& cfg) {
  const PrecisionContext L = cfg.l_ctx, Sc = cfg.s_ctx;
  RefineResult out;
  const Real dn = norm_inf(d);
  if (dn.is_zero()) {
    out.x = zeros<Real>(d.size(), L);
    out.converged = true;
    out.residuals.push_back(Real(L));
    return out;
  }

  // d is scaled to unit norm before rounding so it cannot leave the S range.
  auto solve_scaled = [&](const MPVector& rhs, const Real& norm) {
    MPVector unit = rhs;
    for (auto& v : unit) v = Real(v / norm, L);
    Vector<S> sol = solve_s(convert<S>(unit, Sc));
    MPVector up = convert<Real>(sol, L);
    for (auto& v : up) {
      if (!v.is_finite()) throw RefinementStalled("S-precision solve returned a non-finite value");
      v *= norm;
    }
    return up;
  };

  out.x = solve_scaled(d, dn);
  const Real floor_scale = pow2(4 - L.bits, L);
  MPVector prev_x;
  const Real stall_floor = cfg.tol * static_cast<double>(std::max<std::size_t>(d.size(), 1));
  for (int k = 0;; ++k) {
    MPVector r = apply_l(out.x);
    for (std::size_t i = 0; i < r.size(); ++i) {
      Real ri(d[i], L);
      ri -= r[i];
      r[i] = std::move(ri);
    }
    const Real rn = norm_inf(r);
    out.residuals.push_back(rn / dn);
    if (out.residuals.back() <= cfg.tol) {
      out.converged = true;
      break;
    }
    // residual rounding grows with the system size
    if (k >= 1 && out.residuals[k] <= stall_floor && out.residuals[k] * 2.0 > out.residuals[k - 1]) {
      if (!(out.residuals[k] < out.residuals[k - 1])) {
        out.x = std::move(prev_x);
        out.residuals.pop_back();
      }
      out.converged = true;
      break;
    }
    if (k >= 3 && out.residuals[k] * 2.0 > out.residuals[k - 3]) {
      if (out.residuals.back() <= stall_floor) {
        out.converged = true;
        break;
      }
      throw RefinementStalled("iterative refinement stalled at relative residual " + out.residuals.back().to_string(6));
    }
    if (k == cfg.max_iter) break;

    MPVector z = solve_scaled(r, rn);
    ++out.iters;
    prev_x = out.x;
    for (std::size_t i = 0; i < z.size(); ++i) out.x[i] += z[i];
    if (norm_inf(z) <= floor_scale * norm_inf(out.x)) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace mpirk

#endif  // MPIRK_REFINE_HPP
