#include <gtest/gtest.h>

#include "common.hpp"

using namespace mpirk;
using testutil::rel_diff;

namespace {

const PrecisionContext P167{167};

Real ratio(long a, long b) { return Real::from_ratio(a, b, P167); }
Real sq(double v) { return sqrt(Real(v, P167)); }

double abs_diff(const Real& a, const Real& b) { return abs(a - b).to_double(); }

TEST(Gauss, OneStageIsMidpoint) {
  Tableau t = gauss_tableau(1, P167);
  EXPECT_TRUE(t.c[0] == 0.5);
  EXPECT_TRUE(t.A(0, 0) == 0.5);
  EXPECT_TRUE(t.b[0] == 1.0);
  EXPECT_EQ(t.order, 2);
}

TEST(Gauss, TwoStageClosedForm) {
  Tableau t = gauss_tableau(2, P167);
  const Real s = sq(3.0) / 6.0;
  EXPECT_LT(abs_diff(t.c[0], ratio(1, 2) - s), 1e-49);
  EXPECT_LT(abs_diff(t.c[1], ratio(1, 2) + s), 1e-49);
  EXPECT_LT(abs_diff(t.b[0], ratio(1, 2)), 1e-49);
  EXPECT_LT(abs_diff(t.b[1], ratio(1, 2)), 1e-49);
  EXPECT_LT(abs_diff(t.A(0, 0), ratio(1, 4)), 1e-49);
  EXPECT_LT(abs_diff(t.A(0, 1), ratio(1, 4) - s), 1e-49);
  EXPECT_LT(abs_diff(t.A(1, 0), ratio(1, 4) + s), 1e-49);
  EXPECT_LT(abs_diff(t.A(1, 1), ratio(1, 4)), 1e-49);
}

TEST(Gauss, ThreeStageClosedForm) {
  Tableau t = gauss_tableau(3, P167);
  const Real s = sq(15.0) / 10.0;
  EXPECT_LT(abs_diff(t.c[0], ratio(1, 2) - s), 1e-49);
  EXPECT_LT(abs_diff(t.c[1], ratio(1, 2)), 1e-49);
  EXPECT_LT(abs_diff(t.c[2], ratio(1, 2) + s), 1e-49);
  EXPECT_LT(abs_diff(t.b[0], ratio(5, 18)), 1e-49);
  EXPECT_LT(abs_diff(t.b[1], ratio(4, 9)), 1e-49);
  EXPECT_LT(abs_diff(t.b[2], ratio(5, 18)), 1e-49);
  // a_11 = 5/36, a_12 = 2/9 - sqrt(15)/15, a_13 = 5/36 - sqrt(15)/30
  EXPECT_LT(abs_diff(t.A(0, 0), ratio(5, 36)), 1e-49);
  EXPECT_LT(abs_diff(t.A(0, 1), ratio(2, 9) - sq(15.0) / 15.0), 1e-49);
  EXPECT_LT(abs_diff(t.A(0, 2), ratio(5, 36) - sq(15.0) / 30.0), 1e-49);
  EXPECT_LT(abs_diff(t.A(2, 0), ratio(5, 36) + sq(15.0) / 30.0), 1e-49);
}

TEST(Gauss, OrderConditionsUpToFifteen) {
  for (int m = 1; m <= 15; ++m) {
    Tableau t = gauss_tableau(m, P167);
    EXPECT_LT(quadrature_residual(t.c, t.b, 2 * m).to_double(), 1e-45) << "m=" << m;
    EXPECT_LT(collocation_residual(t, m).to_double(), 1e-45) << "m=" << m;
  }
}

TEST(Gauss, NodesSymmetricAndSorted) {
  Tableau t = gauss_tableau(8, P167);
  for (int i = 0; i < 8; ++i) {
    EXPECT_LT(abs_diff(t.c[i] + t.c[7 - i], Real(1.0, P167)), 1e-49);
    if (i > 0) {
      EXPECT_TRUE(t.c[i - 1] < t.c[i]);
    }
  }
}

TEST(Gauss, RejectsBadStageCount) {
  EXPECT_THROW(gauss_tableau(0, P167), InvalidArgument);
  EXPECT_THROW(make_tableau(Family::RadauIIA, 4, P167), InvalidArgument);
}

TEST(Radau, ClosedForms) {
  Tableau t = radau2a_tableau(P167);
  const Real s6 = sq(6.0);
  EXPECT_LT(abs_diff(t.b[0], (16.0 - s6) / 36.0), 1e-49);
  EXPECT_LT(abs_diff(t.b[1], (16.0 + s6) / 36.0), 1e-49);
  EXPECT_TRUE(t.b[2] == ratio(1, 9));
  EXPECT_LT(abs_diff(t.c[0], (4.0 - s6) / 10.0), 1e-49);
  EXPECT_LT(abs_diff(t.c[1], (4.0 + s6) / 10.0), 1e-49);
  EXPECT_TRUE(t.c[2] == 1.0);
  Real row(P167);
  for (int j = 0; j < 3; ++j) {
    row += t.A(2, j);
    EXPECT_TRUE(t.A(2, j) == t.b[j]);
  }
  EXPECT_LT(abs_diff(row, Real(1.0, P167)), 1e-49);
  EXPECT_LT(quadrature_residual(t.c, t.b, 5).to_double(), 1e-45);
  EXPECT_LT(collocation_residual(t, 3).to_double(), 1e-45);
}

TEST(Legendre, SmallDegrees) {
  EXPECT_TRUE(shifted_legendre(0, Real(0.3, P167)) == 1.0);
  EXPECT_TRUE(shifted_legendre(1, ratio(1, 2)).is_zero());
  EXPECT_LT(abs_diff(shifted_legendre(2, Real(P167)), sq(5.0)), 1e-48);
  EXPECT_THROW(shifted_legendre(-1, Real(P167)), InvalidArgument);
}

TEST(Legendre, BinomialAgreesWithRecurrence) {
  for (int j = 0; j <= 20; ++j)
    for (double x : {0.0, 0.137, 0.5, 0.81, 1.0}) {
      const Real v = Real(x, P167);
      const Real a = detail::shifted_legendre_binomial(j, Real(v, PrecisionContext{300}));
      const Real b = detail::shifted_legendre_recurrence(j, Real(v, PrecisionContext{300}));
      EXPECT_LT(abs_diff(a, b), 1e-60) << "j=" << j << " x=" << x;
    }
}

TEST(Legendre, RootsAreZeros) {
  MPVector r = shifted_legendre_roots(7, P167);
  ASSERT_EQ(r.size(), 7u);
  for (const auto& x : r) EXPECT_LT(abs(shifted_legendre(7, x)).to_double(), 1e-45);
}

TEST(WTransform, ZetaClosedForm) {
  MPVector z = w_zeta(4, P167);
  ASSERT_EQ(z.size(), 3u);
  EXPECT_LT(abs_diff(z[0], 1.0 / (sq(3.0) * 2.0)), 1e-49);
  EXPECT_NEAR(z[0].to_double(), 0.2886751, 1e-7);
  EXPECT_LT(abs_diff(z[2], 1.0 / (sq(35.0) * 2.0)), 1e-49);
}

TEST(WTransform, OrthogonalityAndTridiagonalX) {
  for (int m : {3, 6}) {
    Tableau t = gauss_tableau(m, P167);
    WTransform wt = w_transform(t);
    MPMatrix BW = wt.W;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) BW(i, j) *= t.b[i];
    MPMatrix G = matmul(transpose(wt.W), BW);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) EXPECT_LT(abs_diff(G(i, j), Real(i == j ? 1.0 : 0.0, P167)), 1e-45);
    MPMatrix Xc = w_closed_form_x(wt.zeta, P167);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) EXPECT_LT(abs_diff(wt.X(i, j), Xc(i, j)), 1e-45);
  }
}

TEST(WTransform, EntriesAreLegendreValues) {
  Tableau t = gauss_tableau(4, P167);
  WTransform wt = w_transform(t);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_LT(abs_diff(wt.W(i, j), shifted_legendre(j, t.c[i])), 1e-48);
}

TEST(WTransform, ConditionNumbersSmallM) {
  EXPECT_NEAR(cond_inf(w_transform(gauss_tableau(3, P167)).W).to_double(), 3.24, 0.0324);
  EXPECT_NEAR(cond_inf(w_transform(gauss_tableau(5, P167)).W).to_double(), 6.27, 0.0627);
  EXPECT_NEAR(cond_inf(w_transform(gauss_tableau(10, P167)).W).to_double(), 16.4, 0.164);
}

TEST(WTransform, RadauRejected) { EXPECT_THROW(w_transform(radau2a_tableau(P167)), InvalidArgument); }

TEST(Embedded, RadauThirdWeight) {
  Tableau t = radau2a_tableau(P167);
  for (const Real& g : {ratio(1, 8), radau2a_classic_gamma0(P167), Real(0.3, P167)}) {
    EmbeddedWeights e = embedded_weights(t, g);
    EXPECT_LT(abs_diff(e.bhat[2], t.b[2] - g / 3.0), 1e-48);
  }
}

TEST(Embedded, ZeroGammaReproducesB) {
  Tableau t = gauss_tableau(3, P167);
  EmbeddedWeights e = solve_embedded_weights(t, Real(P167));
  for (int i = 0; i < 3; ++i) EXPECT_LT(abs_diff(e.bhat[i], t.b[i]), 1e-48);
  EXPECT_THROW(embedded_weights(t, Real(P167)), InvalidArgument);
}

TEST(Embedded, WeightsSumAndOrder) {
  Tableau t = gauss_tableau(3, P167);
  const Real g = ratio(1, 8);
  EmbeddedWeights e = embedded_weights(t, g);
  Real s(P167);
  for (const auto& v : e.bhat) s += v;
  EXPECT_LT(abs_diff(s, ratio(7, 8)), 1e-48);
  EXPECT_EQ(e.order_hat, 3);
  EXPECT_LT(quadrature_residual(t.c, e.bhat, 3, &g).to_double(), 1e-45);
}

TEST(Embedded, HairerGammaIsEigenvalueOfA) {
  // det(A - g I) = 0 for the real eigenvalue
  Tableau t = radau2a_tableau(P167);
  const Real g = radau2a_classic_gamma0(P167);
  MPMatrix M = t.A;
  for (int i = 0; i < 3; ++i) M(i, i) -= g;
  const Real det = M(0, 0) * (M(1, 1) * M(2, 2) - M(1, 2) * M(2, 1)) -
                   M(0, 1) * (M(1, 0) * M(2, 2) - M(1, 2) * M(2, 0)) +
                   M(0, 2) * (M(1, 0) * M(2, 1) - M(1, 1) * M(2, 0));
  EXPECT_LT(abs(det).to_double(), 1e-45);
  EXPECT_NEAR(g.to_double(), 0.2748888295956773, 1e-15);
}

ComplexMP cz(double re, double im) { return ComplexMP(Real(re, P167), Real(im, P167)); }

TEST(Stability, OriginIsOne) {
  for (const Tableau& t : {gauss_tableau(1, P167), gauss_tableau(3, P167), radau2a_tableau(P167)}) {
    ComplexMP r = stability_value(t, nullptr, cz(0, 0));
    EXPECT_TRUE(r.re == 1.0);
    EXPECT_TRUE(r.im.is_zero());
    EmbeddedWeights e = embedded_weights(t, ratio(1, 8));
    EXPECT_TRUE(stability_value(t, &e, cz(0, 0)).re == 1.0);
  }
}

TEST(Stability, MidpointClosedForm) {
  Tableau t = gauss_tableau(1, P167);
  EXPECT_TRUE(stability_value(t, nullptr, cz(-2, 0)).abs().is_zero());
  ComplexMP r = stability_value(t, nullptr, cz(-0.5, 0.75));
  // (1 + z/2) / (1 - z/2) evaluated independently
  ComplexMP expect = ComplexMP(Real(0.75, P167), Real(0.375, P167)) / ComplexMP(Real(1.25, P167), Real(-0.375, P167));
  EXPECT_LT(abs_diff(r.re, expect.re), 1e-48);
  EXPECT_LT(abs_diff(r.im, expect.im), 1e-48);
  EXPECT_THROW(stability_value(t, nullptr, cz(2, 0)), SingularAtZ);
}

TEST(Stability, GaussUnitModulusOnImaginaryAxis) {
  Tableau t = gauss_tableau(3, P167);
  for (double y : {0.1, 1.0, 10.0}) EXPECT_LT(abs_diff(stability_value(t, nullptr, cz(0, y)).abs(), Real(1.0, P167)), 1e-40);
}

TEST(Stability, GaussAStableOnGrid) {
  Tableau t = gauss_tableau(3, P167);
  auto g = stability_grid(t, nullptr, Real(-10.0, P167), Real(0.0, P167), Real(-10.0, P167), Real(10.0, P167), 200, 200);
  ASSERT_EQ(g.size(), 40000u);
  EXPECT_EQ(count_unstable_left(g, pow2(16 - 167, P167)), 0u);
}

TEST(Stability, EmbeddedNotAStable) {
  Tableau t = gauss_tableau(3, P167);
  EmbeddedWeights e = embedded_weights(t, ratio(1, 8));
  auto g = stability_grid(t, &e, Real(-10.0, P167), Real(0.0, P167), Real(-10.0, P167), Real(10.0, P167), 60, 60);
  EXPECT_GE(count_unstable_left(g, pow2(16 - 167, P167)), 1u);
}

TEST(Stability, SinglePointGrid) {
  auto g = stability_grid(gauss_tableau(2, P167), nullptr, Real(P167), Real(P167), Real(P167), Real(P167), 1, 1);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_TRUE(g[0].abs_r == 1.0);
  EXPECT_THROW(stability_grid(gauss_tableau(2, P167), nullptr, Real(P167), Real(P167), Real(P167), Real(P167), 1, 5),
               InvalidArgument);
}

TEST(Stability, PoleMarkedInfinite) {
  // midpoint pole at z = 2
  auto g = stability_grid(gauss_tableau(1, P167), nullptr, Real(2.0, P167), Real(2.0, P167), Real(P167), Real(P167), 1, 1);
  EXPECT_FALSE(g[0].abs_r.is_finite());
}

}  // namespace
