#ifndef MPIRK_NEWTON_HPP
#define MPIRK_NEWTON_HPP

// Inner iteration for one IRK step.
//
// simplified_newton: stage values Y, frozen J = df/dy(x0, y0), each increment
//   from the W-transformed system (I - h X (x) J) Zhat = -(W^T B (x) I) F(Y),
//   Z = (W (x) I) Zhat.
// quasi_newton: stage derivatives k, full mn x mn matrix with blocks
//   delta_pq I - h a_pq J_p,  J_p = df/dy(x0 + c_p h, y0).
// Every linear solve goes through mixed_refine.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mpirk/errors.hpp"
#include "mpirk/krylov.hpp"
#include "mpirk/linalg.hpp"
#include "mpirk/problems.hpp"
#include "mpirk/reduced.hpp"
#include "mpirk/refine.hpp"
#include "mpirk/tableau.hpp"

namespace mpirk {

enum class NewtonMode { SimplifiedNewton, QuasiNewton };

inline std::string to_string(NewtonMode m) { return m == NewtonMode::SimplifiedNewton ? "simplified" : "quasi"; }

struct NewtonOptions {
  NewtonMode mode = NewtonMode::SimplifiedNewton;
  /// Relative stage increment threshold.
  Real newton_tol;
  int max_newton = 40;
  RefinementConfig refinement;

  void validate() const {
    if (max_newton < 1) throw InvalidArgument("max_newton must be >= 1");
    if (!(newton_tol > 0.0)) throw InvalidArgument("newton_tol must be positive");
    refinement.validate();
  }
};

/// min(rtol / 100, 2^(-l/2)), but never below 2^(20 - l).
inline Real default_newton_tol(const Real& rtol, PrecisionContext l) {
  Real t = pow2(-l.bits / 2, l);
  if (rtol > 0.0) t = min(t, Real(rtol / 100.0, l));
  return max(t, pow2(20 - l.bits, l));
}

inline NewtonOptions make_newton_options(PrecisionContext s, PrecisionContext l, const Real& rtol) {
  NewtonOptions o;
  o.refinement = RefinementConfig::make(s, l);
  o.newton_tol = default_newton_tol(rtol, l);
  return o;
}

struct InnerReport {
  int newton_iters = 0;
  /// Krylov iterations, or S-precision direct solves.
  int linear_iters_total = 0;
  int refine_iters_total = 0;
  bool converged = false;
  Real final_increment_norm;
};

struct NewtonResult {
  std::vector<MPVector> Y;  // stage values
  std::vector<MPVector> k;  // stage derivatives f(x0 + c_j h, Y_j)
  InnerReport report;
};

using StageLinearSolve = std::function<MPVector(const MPVector&, InnerReport&)>;

namespace detail {

template <class S, class SolveS, class ApplyL>
MPVector refined_solve(SolveS&& solve_s, ApplyL&& apply_l, const MPVector& d, const RefinementConfig& cfg,
                       InnerReport& rep) {
  RefineResult rr = mixed_refine<S>(solve_s, apply_l, d, cfg);
  rep.refine_iters_total += rr.iters;
  if (!rr.converged) throw RefinementStalled("iterative refinement hit max_iter");
  return std::move(rr.x);
}

template <class S>
StageLinearSolve reduced_linear_solve(std::shared_ptr<const ReducedOperator<Real>> opL, const RefinementConfig& cfg) {
  auto opS = std::make_shared<const ReducedOperator<S>>(convert<S>(*opL, cfg.s_ctx));
  std::shared_ptr<const ReducedSolver<S>> direct;
  if (cfg.inner == InnerSolver::DirectLU || cfg.precondition == Preconditioning::BlockLU_S)
    direct = std::make_shared<const ReducedSolver<S>>(*opS);
  return [opL, opS, direct, cfg](const MPVector& d, InnerReport& rep) {
    auto solve_s = [&](const Vector<S>& r) -> Vector<S> {
      if (cfg.inner == InnerSolver::DirectLU) {
        ++rep.linear_iters_total;
        return direct->solve(r);
      }
      LinearMap<S> op = [&](const Vector<S>& v) { return opS->apply(v); };
      LinearMap<S> pre;
      if (direct) pre = [&](const Vector<S>& v) { return direct->solve(v); };
      KrylovResult<S> kr = cfg.inner == InnerSolver::BiCGSTAB
                               ? bicgstab(op, r, pre, cfg.inner_tol, cfg.inner_max_iter)
                               : gmres(op, r, pre, cfg.inner_tol, cfg.restart, cfg.inner_max_iter);
      rep.linear_iters_total += kr.iters;
      return std::move(kr.x);
    };
    auto apply_l = [&](const MPVector& x) { return opL->apply(x); };
    return refined_solve<S>(solve_s, apply_l, d, cfg, rep);
  };
}

// Full stage matrix delta_pq I - h a_pq J_p, applied implicitly at L and
// factored densely at S.
struct FullStageOperator {
  std::size_t n = 0, m = 0;
  Real h;
  MPMatrix A;
  std::vector<MPMatrix> J;

  MPVector apply(const MPVector& v) const {
    MPVector out = v;
    for (std::size_t p = 0; p < m; ++p) {
      MPVector s(n, Real(h.context()));
      for (std::size_t q = 0; q < m; ++q)
        for (std::size_t a = 0; a < n; ++a) mul_add(s[a], A(p, q), v[q * n + a]);
      MPVector js = matvec(J[p], s);
      for (std::size_t a = 0; a < n; ++a) mul_sub(out[p * n + a], h, js[a]);
    }
    return out;
  }
};

template <class S>
StageLinearSolve full_linear_solve(std::shared_ptr<const FullStageOperator> opL, const RefinementConfig& cfg) {
  const std::size_t n = opL->n, m = opL->m, N = n * m;
  Matrix<S> K(N, N, make_scalar<S>(0.0, cfg.s_ctx));
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < m; ++q) {
      const Real ha = opL->h * opL->A(p, q);
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
          Real v = -(ha * opL->J[p](a, b));
          if (p == q && a == b) v += 1.0;
          K(p * n + a, q * n + b) = convert_scalar<S>(v, cfg.s_ctx);
        }
    }
  auto lu = std::make_shared<const LUFactorization<S>>(lu_factor(std::move(K)));
  return [opL, lu, cfg](const MPVector& d, InnerReport& rep) {
    auto solve_s = [&](const Vector<S>& r) {
      ++rep.linear_iters_total;
      return lu->solve(r);
    };
    auto apply_l = [&](const MPVector& x) { return opL->apply(x); };
    return refined_solve<S>(solve_s, apply_l, d, cfg, rep);
  };
}

inline Real stage_norm(const std::vector<MPVector>& V) {
  Real out(V.front().front().context());
  for (const auto& v : V) out = max(out, norm_inf(v));
  return out;
}

// Tracks increments: convergence test and the three-growths divergence rule.
class IncrementMonitor {
 public:
  explicit IncrementMonitor(const NewtonOptions& opt) : opt_(opt) {}

  bool update(const Real& incr, const Real& ynorm, InnerReport& rep) {
    if (!incr.is_finite() || !ynorm.is_finite()) throw InnerDivergence("non-finite Newton increment");
    rep.final_increment_norm = incr;
    if (incr <= opt_.newton_tol * (ynorm + 1.0)) return true;
    if (have_prev_ && incr > prev_) {
      if (++growths_ >= 3) throw InnerDivergence("Newton increments grew three times in a row");
    } else {
      growths_ = 0;
    }
    prev_ = incr;
    have_prev_ = true;
    return false;
  }

 private:
  const NewtonOptions& opt_;
  Real prev_;
  bool have_prev_ = false;
  int growths_ = 0;
};

}  // namespace detail

inline StageLinearSolve make_reduced_linear_solve(const ReducedOperator<Real>& op, const RefinementConfig& cfg) {
  auto opL = std::make_shared<const ReducedOperator<Real>>(op);
  return cfg.s_is_double() ? detail::reduced_linear_solve<double>(opL, cfg) : detail::reduced_linear_solve<Real>(opL, cfg);
}

inline NewtonResult simplified_newton(const IVProblem& prob, const Tableau& t, const WTransform& wt, const Real& x0,
                                      const MPVector& y0, const Real& h, const NewtonOptions& opt) {
  const PrecisionContext L = opt.refinement.l_ctx;
  const std::size_t n = prob.n, m = static_cast<std::size_t>(t.m);
  const MPVector y0L = convert(y0, L);
  const Real hL(h, L);

  const StageLinearSolve solve =
      make_reduced_linear_solve(assemble_reduced(convert<Real>(prob.jac(x0, y0L), L), hL, wt), opt.refinement);

  std::vector<Real> xs;
  for (std::size_t j = 0; j < m; ++j) xs.push_back(x0 + t.c[j] * hL);
  MPMatrix hA = convert(t.A, L);
  for (auto& v : hA.data()) v *= hL;
  MPMatrix WtB(m, m, L);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) WtB(i, j) = wt.W(j, i) * t.b[j];

  NewtonResult res;
  res.Y.assign(m, y0L);
  detail::IncrementMonitor monitor(opt);
  auto eval_f = [&] {
    std::vector<MPVector> fv;
    for (std::size_t j = 0; j < m; ++j) fv.push_back(prob.f(xs[j], res.Y[j]));
    return fv;
  };

  for (int it = 0; it < opt.max_newton; ++it) {
    const std::vector<MPVector> fv = eval_f();
    // F_i = Y_i - y0 - sum_j h a_ij f_j
    std::vector<MPVector> F(m);
    for (std::size_t i = 0; i < m; ++i) {
      F[i] = res.Y[i] - y0L;
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t a = 0; a < n; ++a) mul_sub(F[i][a], hA(i, j), fv[j][a]);
    }
    MPVector rhs(n * m, Real(L));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t a = 0; a < n; ++a) mul_sub(rhs[i * n + a], WtB(i, j), F[j][a]);

    const MPVector zhat = solve(rhs, res.report);
    ++res.report.newton_iters;
    Real incr(L);
    for (std::size_t i = 0; i < m; ++i) {
      MPVector z(n, Real(L));
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t a = 0; a < n; ++a) mul_add(z[a], wt.W(i, j), zhat[j * n + a]);
      incr = max(incr, norm_inf(z));
      for (std::size_t a = 0; a < n; ++a) res.Y[i][a] += z[a];
    }
    if (monitor.update(incr, detail::stage_norm(res.Y), res.report)) {
      res.report.converged = true;
      break;
    }
  }
  if (res.report.converged) res.k = eval_f();
  return res;
}

inline NewtonResult quasi_newton(const IVProblem& prob, const Tableau& t, const Real& x0, const MPVector& y0,
                                 const Real& h, const NewtonOptions& opt) {
  const PrecisionContext L = opt.refinement.l_ctx;
  const std::size_t n = prob.n, m = static_cast<std::size_t>(t.m);
  const MPVector y0L = convert(y0, L);
  const Real hL(h, L);

  auto op = std::make_shared<detail::FullStageOperator>();
  op->n = n;
  op->m = m;
  op->h = hL;
  op->A = convert(t.A, L);
  std::vector<Real> xs;
  for (std::size_t p = 0; p < m; ++p) {
    xs.push_back(x0 + t.c[p] * hL);
    op->J.push_back(convert<Real>(to_dense(prob.jac(xs.back(), y0L)), L));
  }
  const StageLinearSolve solve = opt.refinement.s_is_double()
                                     ? detail::full_linear_solve<double>(op, opt.refinement)
                                     : detail::full_linear_solve<Real>(op, opt.refinement);

  NewtonResult res;
  res.k.assign(m, MPVector(n, Real(L)));
  auto stages = [&] {
    std::vector<MPVector> Y(m, y0L);
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t q = 0; q < m; ++q) {
        const Real ha = hL * op->A(p, q);
        for (std::size_t a = 0; a < n; ++a) mul_add(Y[p][a], ha, res.k[q][a]);
      }
    return Y;
  };
  detail::IncrementMonitor monitor(opt);
  res.Y = stages();
  for (int it = 0; it < opt.max_newton; ++it) {
    MPVector rhs(n * m, Real(L));
    for (std::size_t p = 0; p < m; ++p) {
      const MPVector fp = prob.f(xs[p], res.Y[p]);
      for (std::size_t a = 0; a < n; ++a) rhs[p * n + a] = fp[a] - res.k[p][a];
    }
    const MPVector dk = solve(rhs, res.report);
    ++res.report.newton_iters;
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t a = 0; a < n; ++a) res.k[p][a] += dk[p * n + a];
    // increment measured on the stage values: h (A (x) I) dk
    Real incr(L);
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t a = 0; a < n; ++a) {
        Real s(L);
        for (std::size_t q = 0; q < m; ++q) mul_add(s, op->A(p, q), dk[q * n + a]);
        incr = max(incr, abs(s));
      }
    incr *= abs(hL);
    res.Y = stages();
    if (monitor.update(incr, detail::stage_norm(res.Y), res.report)) {
      res.report.converged = true;
      break;
    }
  }
  if (res.report.converged)
    for (std::size_t p = 0; p < m; ++p) res.k[p] = prob.f(xs[p], res.Y[p]);
  return res;
}

}  // namespace mpirk

#endif  // MPIRK_NEWTON_HPP
