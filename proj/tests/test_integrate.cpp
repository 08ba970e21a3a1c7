#include <gtest/gtest.h>

#include "common.hpp"

using namespace mpirk;
using testutil::rel_diff;

namespace {

const PrecisionContext P167{167};
const PrecisionContext P53{53};

Real r(double v) { return Real(v, P167); }

NewtonOptions tight(PrecisionContext s = P53) {
  NewtonOptions o = make_newton_options(s, P167, Real(P167));
  o.newton_tol = pow2(20 - 167, P167);
  return o;
}

StepControl fixed_control(int m) {
  StepControl c = StepControl::make(P167, m, Real(P167), Real(P167));
  c.fixed_step = true;
  return c;
}

// y' = -x y: the stage system (I + h A diag(x + c h)) Y = y 1 is linear,
// solved here directly at 300 bits. Returns y at x_end after n uniform steps.
Real mxy_oracle(int m, double x_end, long n) {
  const PrecisionContext W{300};
  const Tableau t = gauss_tableau(m, W);
  const Real h = Real(x_end, W) / static_cast<double>(n);
  Real y(1.0, W);
  for (long k = 0; k < n; ++k) {
    const Real x = h * static_cast<double>(k);
    MPMatrix M = MPMatrix::identity(m, W);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) M(i, j) += h * t.A(i, j) * (x + t.c[j] * h);
    MPVector Y = lu_factor(M).solve(MPVector(m, y));
    for (int j = 0; j < m; ++j) y -= h * t.b[j] * (x + t.c[j] * h) * Y[j];
  }
  return y;
}

TEST(ErrorNorm, Examples) {
  MPVector y{r(1), r(-2)};
  EXPECT_TRUE(error_norm(y, y, y, r(1e-3), r(1e-3)).is_zero());
  EXPECT_TRUE(error_norm({r(0)}, {r(2)}, {r(0)}, r(1), r(0)) == 2.0);
  const Real e = error_norm({r(0), r(0)}, {Real(1e-3, P167), r(0)}, {r(0), r(0)}, Real(1e-3, P167), r(0));
  EXPECT_LT(abs(e - sqrt(r(0.5))).to_double(), 1e-45);
  // rtol weight uses max(|y_next|, |y_prev|)
  const Real w = error_norm({r(2)}, {r(3)}, {r(-4)}, r(0), r(0.5));
  EXPECT_TRUE(w == 0.5);
}

TEST(ErrorNorm, ZeroWeightThrows) {
  EXPECT_THROW(error_norm({r(0)}, {r(1)}, {r(0)}, r(0), r(1)), ZeroDenominator);
  EXPECT_THROW(error_norm({r(0)}, {r(1), r(2)}, {r(0)}, r(1), r(1)), DimensionMismatch);
}

TEST(StepSize, Examples) {
  StepControl c = StepControl::make(P167, 3, r(1e-10), r(1e-10));
  const Real h = r(0.2);
  EXPECT_LT(rel_diff(next_step_size(r(1), h, c), h * Real::from_ratio(9, 10, P167)), 1e-48);
  EXPECT_LT(rel_diff(next_step_size(pow2(-4, P167), h, c), h * Real::from_ratio(9, 5, P167)), 1e-48);
  EXPECT_LT(rel_diff(next_step_size(r(1e6), h, c), h / 10.0), 1e-48);
  EXPECT_TRUE(next_step_size(r(0), h, c) == h * 5.0);
  c.h_max = r(0.5);
  EXPECT_TRUE(next_step_size(r(0), h, c) == 0.5);
}

TEST(StepSize, LiteralControllerInvertsExponent) {
  StepControl c = StepControl::make(P167, 3, r(1e-10), r(1e-10));
  c.positive_exponent_controller = true;
  const Real h = r(0.2);
  // err = 2^-4 now shrinks: 0.9 * 2^-1
  EXPECT_LT(rel_diff(next_step_size(pow2(-4, P167), h, c), h * Real::from_ratio(9, 20, P167)), 1e-48);
}

TEST(StepControl, Validation) {
  StepControl c = StepControl::make(P167, 3, r(0), r(0));
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.fixed_step = true;
  EXPECT_NO_THROW(c.validate());
  c = StepControl::make(P167, 3, r(-1), r(1));
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(IrkStep, ZeroProblem) {
  auto p = testutil::zero_problem(2, P167);
  Tableau t = gauss_tableau(3, P167);
  auto wt = w_transform(t);
  auto e = embedded_weights(t, Real::from_ratio(1, 8, P167));
  StepControl c = StepControl::make(P167, 3, r(1e-20), r(1e-20));
  const Real h = r(0.1);
  StepResult s = irk_step(p, t, &wt, e, p.x0, p.y0, h, tight(), c);
  EXPECT_TRUE(s.accepted);
  EXPECT_TRUE(s.err_norm.is_zero());
  for (std::size_t a = 0; a < 2; ++a) {
    EXPECT_TRUE(s.y_next[a] == 1.0);
    EXPECT_TRUE(s.y_hat[a] == 1.0);
  }
  EXPECT_TRUE(s.h_next == h * 5.0);
}

TEST(IrkStep, MidpointOnDecay) {
  auto p = testutil::scalar_linear(-1.0, P167);
  Tableau t = gauss_tableau(1, P167);
  auto wt = w_transform(t);
  auto e = embedded_weights(t, Real::from_ratio(1, 8, P167));
  StepResult s = irk_step(p, t, &wt, e, p.x0, p.y0, Real::from_ratio(1, 10, P167), tight(), fixed_control(1));
  EXPECT_LT(rel_diff(s.y_next[0], Real::from_ratio(19, 21, P167)), 1e-48);
  EXPECT_NEAR(s.y_next[0].to_double(), 0.9047619047619048, 1e-15);
}

TEST(IrkStep, LocalOrdersOnMxy) {
  auto p = make_mxy(P167);
  Tableau t = gauss_tableau(3, P167);
  auto wt = w_transform(t);
  auto e = embedded_weights(t, Real::from_ratio(1, 8, P167));
  std::vector<double> hs, ey, eh;
  for (double h : {0.5, 0.25, 0.125, 0.0625}) {
    StepResult s = irk_step(p, t, &wt, e, p.x0, p.y0, r(h), tight(), fixed_control(3));
    const Real ex = exp(-(r(h) * r(h)) / 2.0);
    hs.push_back(h);
    ey.push_back(abs(s.y_next[0] - ex).to_double());
    eh.push_back(abs(s.y_hat[0] - ex).to_double());
  }
  EXPECT_GT(testutil::log2_slope(hs, ey), 6.5);
  EXPECT_GT(testutil::log2_slope(hs, eh), 3.5);
  // same step through the quasi-Newton path
  NewtonOptions q = tight();
  q.mode = NewtonMode::QuasiNewton;
  StepResult a = irk_step(p, t, &wt, e, p.x0, p.y0, r(0.25), tight(), fixed_control(3));
  StepResult b = irk_step(p, t, &wt, e, p.x0, p.y0, r(0.25), q, fixed_control(3));
  EXPECT_LT(rel_diff(a.y_next, b.y_next), 1e-45);
  EXPECT_LT(rel_diff(a.y_hat, b.y_hat), 1e-45);
}

TEST(IrkStep, AcceptanceMonotoneInH) {
  auto p = make_mxy(P167);
  Tableau t = gauss_tableau(3, P167);
  auto wt = w_transform(t);
  auto e = embedded_weights(t, Real::from_ratio(1, 8, P167));
  StepControl c = StepControl::make(P167, 3, r(1e-12), r(1e-12));
  int checked = 0;
  for (double x : {0.0, 0.5, 1.3, 2.0, 3.7}) {
    const MPVector y = p.exact(r(x));
    for (double h = 0.8; h > 1e-3; h /= 2) {
      StepResult s = irk_step(p, t, &wt, e, r(x), y, r(h), tight(), c);
      if (!s.accepted) continue;
      StepResult s2 = irk_step(p, t, &wt, e, r(x), y, r(h / 2), tight(), c);
      EXPECT_TRUE(s2.accepted) << "x=" << x << " h=" << h;
      ++checked;
    }
  }
  EXPECT_GT(checked, 10);
}

TEST(Integrate, ZeroProblemOverUnitInterval) {
  auto p = testutil::zero_problem(3, P167);
  Tableau t = gauss_tableau(2, P167);
  auto wt = w_transform(t);
  auto e = embedded_weights(t, Real::from_ratio(1, 8, P167));
  RunReport rep = integrate(p, t, &wt, e, r(0), r(1), p.y0, r(0.1), tight(), StepControl::make(P167, 2, r(1e-10), r(1e-10)));
  EXPECT_EQ(rep.steps_rejected, 0);
  EXPECT_TRUE(rep.final_x == 1.0);
  for (const auto& v : rep.final_y) EXPECT_TRUE(v == 1.0);
}

TEST(Integrate, FixedStepMxyMatchesDirectOracle) {
  auto p = make_mxy(P167);
  Tableau t = gauss_tableau(3, P167);
  auto wt = w_transform(t);
  auto e = embedded_weights(t, Real::from_ratio(1, 8, P167));
  RunReport rep = integrate(p, t, &wt, e, r(0), r(10), p.y0, r(0.1), tight(), fixed_control(3));
  EXPECT_EQ(rep.steps_accepted, 100);
  EXPECT_EQ(rep.steps_rejected, 0);
  EXPECT_TRUE(rep.final_x == 10.0);
  // the Newton test is absolute once |y| << 1, so compare where y is O(1)
  RunReport early = integrate(p, t, &wt, e, r(0), r(2), p.y0, r(0.1), tight(), fixed_control(3));
  EXPECT_LT(rel_diff(Real(early.final_y[0], PrecisionContext{300}), mxy_oracle(3, 2.0, 20)), 1e-40);
  EXPECT_LT(abs(Real(rep.final_y[0], PrecisionContext{300}) - mxy_oracle(3, 10.0, 100)).to_double(), 1e-40);
  // at h = 0.1 the method error against exp(-50) is about 1.27e-4
  const double err = rel_diff(rep.final_y[0], exp(r(-50)));
  EXPECT_NEAR(err, 1.2733e-4, 1e-7);
  EXPECT_TRUE(rep.has_exact);
  EXPECT_GE(rep.max_rel_error.to_double(), err);
}

TEST(Integrate, ConvergenceOrders) {
  auto p = make_mxy(P167);
  for (int m = 1; m <= 3; ++m) {
    Tableau t = gauss_tableau(m, P167);
    auto wt = w_transform(t);
    auto e = embedded_weights(t, Real::from_ratio(1, 8, P167));
    std::vector<double> hs, ey, eh;
    for (int k = 3; k <= 8; ++k) {
      const Real h = pow2(-k, P167);
      StepControl c = fixed_control(m);
      RunReport a = integrate(p, t, &wt, e, r(0), r(2), p.y0, h, tight(), c);
      c.propagate_embedded = true;
      RunReport b = integrate(p, t, &wt, e, r(0), r(2), p.y0, h, tight(), c);
      const MPVector ex = p.exact(r(2));
      hs.push_back(h.to_double());
      ey.push_back(rel_diff(a.final_y, ex));
      eh.push_back(rel_diff(b.final_y, ex));
    }
    EXPECT_NEAR(testutil::log2_slope(hs, ey), 2.0 * m, 0.2) << "m=" << m;
    EXPECT_NEAR(testutil::log2_slope(hs, eh), m, 0.3) << "m=" << m;
  }
}

TEST(Integrate, AdaptiveLinearMeetsTolerance) {
  auto p = make_linear_random(16, 2, P167);
  Tableau t = gauss_tableau(8, P167);
  auto wt = w_transform(t);
  auto e = embedded_weights(t, Real::from_ratio(1, 8, P167));
  const Real rtol(1e-30, P167);
  NewtonOptions o = make_newton_options(P53, P167, rtol);
  RunReport rep = integrate(p, t, &wt, e, r(0), r(2), p.y0, r(0.01), o, StepControl::make(P167, 8, r(0), rtol));
  EXPECT_GT(rep.steps_accepted, 0);
  EXPECT_LE(rel_diff(rep.final_y, p.exact(r(2))), 10 * 1e-30);
  EXPECT_TRUE(rep.min_h_accepted <= rep.max_h_accepted);
}

TEST(Integrate, RadauQuasiNewtonAdaptive) {
  auto p = make_mxy(P167);
  Tableau t = radau2a_tableau(P167);
  auto e = embedded_weights(t, radau2a_classic_gamma0(P167));
  NewtonOptions o = make_newton_options(P53, P167, Real(1e-12, P167));
  o.mode = NewtonMode::QuasiNewton;
  RunReport rep = integrate(p, t, nullptr, e, r(0), r(3), p.y0, r(0.1), o, StepControl::make(P167, 3, r(1e-12), r(1e-12)));
  EXPECT_LT(rel_diff(rep.final_y, p.exact(r(3))), 1e-8);
}

TEST(Integrate, RejectionsRetryWithoutAdvancing) {
  auto p = make_vdpol(P167);
  Tableau t = gauss_tableau(5, P167);
  auto wt = w_transform(t);
  auto e = embedded_weights(t, Real::from_ratio(1, 8, P167));
  const Real tol(1e-12, P167);
  RunReport rep = integrate(p, t, &wt, e, r(0), r(0.5), p.y0, r(0.1), make_newton_options(P53, P167, tol),
                            StepControl::make(P167, 5, tol, tol));
  EXPECT_GT(rep.steps_rejected, 0);
  EXPECT_TRUE(rep.final_x == 0.5);
  Real x = r(0);
  for (const auto& s : rep.history) {
    EXPECT_TRUE(s.x == x);
    if (s.accepted) x += s.h;
  }
}

TEST(Integrate, MaxStepsGuard) {
  auto p = make_mxy(P167);
  Tableau t = gauss_tableau(3, P167);
  auto wt = w_transform(t);
  auto e = embedded_weights(t, Real::from_ratio(1, 8, P167));
  StepControl c = StepControl::make(P167, 3, r(1e-20), r(1e-20));
  c.max_steps = 3;
  EXPECT_THROW(integrate(p, t, &wt, e, r(0), r(10), p.y0, r(0.01), tight(), c), MaxStepsExceeded);
}

TEST(Integrate, FixedStepFailureIsFatal) {
  IVProblem p = testutil::scalar_linear(1.0, P167);
  p.f = [](const Real&, const MPVector& y) { return MPVector{(y[0] * y[0] * y[0] - 1.0) * 1e6}; };
  p.jac = [](const Real&, const MPVector& y) { return Jacobian<Real>(MPMatrix(1, 1, y[0] * y[0] * 3e6)); };
  p.y0 = MPVector{r(2)};
  Tableau t = gauss_tableau(2, P167);
  auto wt = w_transform(t);
  auto e = embedded_weights(t, Real::from_ratio(1, 8, P167));
  EXPECT_THROW(integrate(p, t, &wt, e, r(0), r(1), p.y0, r(1), tight(), fixed_control(2)), StepFailed);
}

TEST(Integrate, BadArguments) {
  auto p = make_mxy(P167);
  Tableau t = gauss_tableau(3, P167);
  auto wt = w_transform(t);
  auto e = embedded_weights(t, Real::from_ratio(1, 8, P167));
  EXPECT_THROW(integrate(p, t, &wt, e, r(1), r(0), p.y0, r(0.1), tight(), fixed_control(3)), InvalidArgument);
  EXPECT_THROW(integrate(p, t, &wt, e, r(0), r(1), p.y0, r(-0.1), tight(), fixed_control(3)), InvalidArgument);
}

}  // namespace
