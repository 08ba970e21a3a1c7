#ifndef MPIRK_INTEGRATE_HPP
#define MPIRK_INTEGRATE_HPP

// Step loop with embedded error estimation:
//   y_{k+1} = y_k + h sum_j b_j k_j
//   yhat    = y_k + h (gamma0 f(x_k, y_k) + sum_j bhat_j k_j)

#include <chrono>
#include <cmath>
#include <optional>
#include <vector>

#include "mpirk/errors.hpp"
#include "mpirk/newton.hpp"
#include "mpirk/problems.hpp"
#include "mpirk/tableau.hpp"

namespace mpirk {

struct StepControl {
  Real atol, rtol;
  Real safety;
  int exponent_order = 3;  // m
  Real h_min, h_max;
  Real max_growth, max_shrink;
  Real accept_threshold;
  /// Uses err^(+1/(m+1)) in the step update instead of err^(-1/(m+1)).
  bool positive_exponent_controller = false;
  /// Constant step h0 (rounded so the steps tile the interval); every step is accepted.
  bool fixed_step = false;
  /// Advance with yhat instead of y (runs the embedded formula as the integrator).
  bool propagate_embedded = false;
  long max_steps = 10000000;

  static StepControl make(PrecisionContext ctx, int m, const Real& atol, const Real& rtol) {
    StepControl c;
    c.atol = Real(atol, ctx);
    c.rtol = Real(rtol, ctx);
    c.safety = Real::from_ratio(9, 10, ctx);
    c.exponent_order = m;
    c.h_min = Real(ctx);
    c.h_max = Real::inf(ctx);
    c.max_growth = Real(5.0, ctx);
    c.max_shrink = Real::from_ratio(1, 10, ctx);
    c.accept_threshold = Real(1.0, ctx);
    return c;
  }

  void validate() const {
    if (atol < 0.0 || rtol < 0.0) throw InvalidArgument("atol and rtol must be non-negative");
    if (atol.is_zero() && rtol.is_zero() && !fixed_step) throw InvalidArgument("atol and rtol are both zero");
    if (!(safety > 0.0 && safety < 1.0)) throw InvalidArgument("safety must lie in (0, 1)");
    if (h_min > h_max) throw InvalidArgument("h_min exceeds h_max");
    if (exponent_order < 1) throw InvalidArgument("exponent_order must be >= 1");
  }
};

struct StepResult {
  MPVector y_next, y_hat;
  Real err_norm;
  Real h_used, h_next;
  bool accepted = false;
  InnerReport inner;
};

struct StepRecord {
  long k = 0;
  Real x, h, err_norm;
  bool accepted = false;
  int newton_iters = 0, linear_iters = 0;
};

struct RunReport {
  long steps_accepted = 0, steps_rejected = 0;
  Real final_x;
  MPVector final_y, final_y_hat;
  bool has_exact = false;
  Real max_rel_error, min_rel_error;
  Real min_h_accepted, max_h_accepted;
  long newton_iters = 0, linear_iters = 0, refine_iters = 0;
  double wall_time = 0.0;
  std::vector<StepRecord> history;
};

/// sqrt(1/n sum ((yhat_j - y_j) / (atol + rtol max(|y_j|, |yprev_j|)))^2)
inline Real error_norm(const MPVector& y_next, const MPVector& y_hat, const MPVector& y_prev, const Real& atol,
                       const Real& rtol) {
  if (y_next.size() != y_hat.size() || y_next.size() != y_prev.size())
    throw DimensionMismatch("error_norm: length mismatch");
  const PrecisionContext ctx{std::max({atol.bits(), rtol.bits(), bits_of(y_next)})};
  Real sum(ctx);
  for (std::size_t j = 0; j < y_next.size(); ++j) {
    Real den = max(abs(y_next[j]), abs(y_prev[j])) * rtol + atol;
    if (den.is_zero()) throw ZeroDenominator("error_norm: zero weight in component " + std::to_string(j));
    Real q = (y_hat[j] - y_next[j]) / den;
    mul_add(sum, q, q);
  }
  sum /= static_cast<double>(y_next.size());
  return sqrt(sum);
}

inline Real next_step_size(const Real& err_norm, const Real& h, const StepControl& ctl) {
  Real factor = ctl.max_growth;
  if (!err_norm.is_zero()) {
    const double e = (ctl.positive_exponent_controller ? 1.0 : -1.0) / (ctl.exponent_order + 1);
    factor = ctl.safety * pow(err_norm, Real(e, err_norm.context()));
    factor = min(max(factor, ctl.max_shrink), ctl.max_growth);
  }
  Real hn = h * factor;
  return min(max(hn, ctl.h_min), ctl.h_max);
}

/// One step from (x, y). wt selects the simplified Newton path (Gauss);
/// without it, or in quasi-Newton mode, the full system is iterated.
inline StepResult irk_step(const IVProblem& prob, const Tableau& t, const WTransform* wt, const EmbeddedWeights& e,
                           const Real& x, const MPVector& y, const Real& h, const NewtonOptions& opt,
                           const StepControl& ctl) {
  StepResult r;
  r.h_used = h;
  NewtonResult nr;
  bool ok = true;
  try {
    nr = (opt.mode == NewtonMode::SimplifiedNewton && wt) ? simplified_newton(prob, t, *wt, x, y, h, opt)
                                                          : quasi_newton(prob, t, x, y, h, opt);
    ok = nr.report.converged;
  } catch (const RecoverableSolverFailure&) {
    ok = false;
  } catch (const RefinementStalled&) {
    ok = false;
  } catch (const SingularMatrix&) {
    ok = false;
  } catch (const NonFiniteConversion&) {
    ok = false;
  }
  r.inner = nr.report;
  if (!ok) {
    if (h <= ctl.h_min || ctl.fixed_step)
      throw StepFailed("inner iteration failed at h = " + h.to_string(6) + ", x = " + x.to_string(20));
    r.accepted = false;
    r.err_norm = Real::inf(h.context());
    r.h_next = max(h * 0.5, ctl.h_min);
    return r;
  }

  const std::size_t n = prob.n;
  const PrecisionContext L = opt.refinement.l_ctx;
  r.y_next = convert(y, L);
  r.y_hat = r.y_next;
  const MPVector f0 = prob.f(x, r.y_next);
  for (std::size_t a = 0; a < n; ++a) {
    Real s(L), sh(L);
    for (int j = 0; j < t.m; ++j) {
      mul_add(s, t.b[j], nr.k[j][a]);
      mul_add(sh, e.bhat[j], nr.k[j][a]);
    }
    mul_add(sh, e.gamma0, f0[a]);
    mul_add(r.y_next[a], h, s);
    mul_add(r.y_hat[a], h, sh);
  }
  // fixed steps with no tolerances: report the unweighted estimate
  if (ctl.fixed_step && ctl.atol.is_zero() && ctl.rtol.is_zero())
    r.err_norm = norm_inf(r.y_hat - r.y_next);
  else
    r.err_norm = error_norm(r.y_next, r.y_hat, y, ctl.atol, ctl.rtol);
  r.accepted = ctl.fixed_step || r.err_norm <= ctl.accept_threshold;
  r.h_next = ctl.fixed_step ? h : next_step_size(r.err_norm, h, ctl);
  return r;
}

struct RunOptions {
  bool keep_history = true;
};

inline RunReport integrate(const IVProblem& prob, const Tableau& t, const WTransform* wt, const EmbeddedWeights& e,
                           const Real& x0, const Real& x_end, const MPVector& y0, const Real& h0,
                           const NewtonOptions& opt, const StepControl& control, const RunOptions& ro = {}) {
  if (!(x_end > x0)) throw InvalidArgument("integrate: interval end must exceed start");
  if (!(h0 > 0.0)) throw InvalidArgument("integrate: h0 must be positive");
  opt.validate();
  const Real span = x_end - x0;
  StepControl ctl = control;
  if (ctl.h_min.is_zero()) ctl.h_min = span * pow2(-64, span.context());
  if (!ctl.h_max.is_finite()) ctl.h_max = span;
  ctl.validate();
  const auto t_start = std::chrono::steady_clock::now();
  const PrecisionContext L = opt.refinement.l_ctx;

  RunReport rep;
  Real x(x0, L);
  MPVector y = convert(y0, L);
  Real h = min(Real(h0, L), ctl.h_max);

  long n_fixed = 0;
  if (ctl.fixed_step) {
    n_fixed = std::max(1L, std::lround((span / h0).to_double()));
    h = span / static_cast<double>(n_fixed);
  }

  auto record_error = [&](const Real& xe, const MPVector& ye) {
    if (!prob.has_exact()) return;
    const MPVector ex = prob.exact(xe);
    const Real rel = norm_inf(ye - ex) / norm_inf(ex);
    if (!rep.has_exact) {
      rep.has_exact = true;
      rep.max_rel_error = rel;
      rep.min_rel_error = rel;
    } else {
      rep.max_rel_error = max(rep.max_rel_error, rel);
      rep.min_rel_error = min(rep.min_rel_error, rel);
    }
  };

  long k = 0;
  while (x < x_end) {
    if (rep.steps_accepted + rep.steps_rejected >= ctl.max_steps)
      throw MaxStepsExceeded("integrate: more than " + std::to_string(ctl.max_steps) + " steps");
    bool last = false;
    if (ctl.fixed_step) {
      last = rep.steps_accepted + 1 == n_fixed;
    } else if (x + h >= x_end) {
      h = x_end - x;
      last = true;
    }
    StepResult s = irk_step(prob, t, wt, e, x, y, h, opt, ctl);
    rep.newton_iters += s.inner.newton_iters;
    rep.linear_iters += s.inner.linear_iters_total;
    rep.refine_iters += s.inner.refine_iters_total;
    if (ro.keep_history)
      rep.history.push_back({k, x, h, s.err_norm, s.accepted, s.inner.newton_iters, s.inner.linear_iters_total});
    ++k;
    if (s.accepted) {
      ++rep.steps_accepted;
      if (rep.steps_accepted == 1) {
        rep.min_h_accepted = h;
        rep.max_h_accepted = h;
      } else {
        rep.min_h_accepted = min(rep.min_h_accepted, h);
        rep.max_h_accepted = max(rep.max_h_accepted, h);
      }
      if (last) {
        x = Real(x_end, L);
      } else if (ctl.fixed_step) {
        x = x0 + span * Real::from_ratio(rep.steps_accepted, n_fixed, L);
      } else {
        x += h;
      }
      y = ctl.propagate_embedded ? s.y_hat : s.y_next;
      rep.final_y_hat = std::move(s.y_hat);
      record_error(x, y);
    } else {
      ++rep.steps_rejected;
    }
    if (!ctl.fixed_step) h = s.h_next;
  }
  rep.final_x = x;
  rep.final_y = std::move(y);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rep;
}

}  // namespace mpirk

#endif  // MPIRK_INTEGRATE_HPP
