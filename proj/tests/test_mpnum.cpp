#include <gtest/gtest.h>

#include "common.hpp"

using namespace mpirk;
using testutil::R;

namespace {

const PrecisionContext P167{167};
const PrecisionContext P53{53};

TEST(Precision, FromDigits) {
  EXPECT_GE(PrecisionContext::from_digits(50).bits, 166);
  EXPECT_LE(PrecisionContext::from_digits(50).bits, 168);
  EXPECT_THROW(PrecisionContext(1), InvalidArgument);
}

TEST(Convert, DyadicIsExact) {
  MPVector v{Real(1.0, P53)};
  MPVector w = convert(v, P167);
  EXPECT_EQ(w[0].bits(), 167);
  EXPECT_TRUE(w[0] == 1.0);
}

TEST(Convert, ThirdRoundsToNearestDouble) {
  MPVector v{Real::from_ratio(1, 3, P167)};
  Vector<double> d = convert<double>(v, P53);
  EXPECT_EQ(d[0], 1.0 / 3.0);
  MPVector v53 = convert(v, P53);
  EXPECT_EQ(v53[0].to_double(), 1.0 / 3.0);
}

TEST(Convert, RoundTripRandomDoubles) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1e10, 1e10);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(gen) * std::ldexp(1.0, static_cast<int>(gen() % 200) - 100);
    MPVector v{Real(x, P53)};
    MPVector back = convert(convert(v, P167), P53);
    ASSERT_EQ(back[0].to_double(), x);
  }
}

TEST(Convert, OverflowIntoDoubleThrows) {
  MPVector v{pow2(5000, P167)};
  EXPECT_THROW(convert<double>(v, P53), NonFiniteConversion);
}

TEST(Real, HexRoundTripIsLossless) {
  Real x = sqrt(Real(2.0, P167));
  Real y = Real::from_string(x.to_hex(), P167);
  EXPECT_TRUE(x == y);
}

TEST(Real, ExactRatios) {
  Real a = Real::from_ratio(9, 10, P167);
  Real b = R("0.9", P167);
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == 0.9);
}

TEST(LU, IdentitySolve) {
  auto lu = lu_factor(MPMatrix::identity(3, P167));
  MPVector x = lu.solve({Real(1.0, P167), Real(2.0, P167), Real(3.0, P167)});
  EXPECT_TRUE(x[0] == 1.0);
  EXPECT_TRUE(x[1] == 2.0);
  EXPECT_TRUE(x[2] == 3.0);
}

TEST(LU, PermutationForcesRowSwap) {
  MPMatrix M(2, 2, P167);
  M(0, 1) = Real(1.0, P167);
  M(1, 0) = Real(1.0, P167);
  auto lu = lu_factor(M);
  EXPECT_NE(lu.permutation()[0], 0u);
  MPVector x = lu.solve({Real(1.0, P167), Real(2.0, P167)});
  EXPECT_TRUE(x[0] == 2.0);
  EXPECT_TRUE(x[1] == 1.0);
}

TEST(LU, SingularThrows) {
  MPMatrix M(2, 2, Real(1.0, P167));
  EXPECT_THROW(lu_factor(M), SingularMatrix);
  EXPECT_THROW(lu_factor(MPMatrix(2, 3, P167)), DimensionMismatch);
}

TEST(LU, RandomResidual) {
  std::mt19937_64 gen(3);
  const std::size_t n = 40;
  MPMatrix M = testutil::random_matrix(n, gen, P167);
  MPVector b = testutil::random_vector(n, gen, P167);
  MPVector x = lu_factor(M).solve(b);
  const Real res = norm_inf(matvec(M, x) - b);
  EXPECT_LT(res.to_double(), 1e-45);
}

TEST(LU, DoublePathMatchesMP) {
  std::mt19937_64 gen(5);
  const std::size_t n = 20;
  MPMatrix M = testutil::random_matrix(n, gen, P53);
  MPVector b = testutil::random_vector(n, gen, P53);
  Vector<double> xd = lu_factor(convert<double>(M, P53)).solve(convert<double>(b, P53));
  MPVector x = lu_factor(convert(M, P167)).solve(convert(b, P167));
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(xd[i], x[i].to_double(), 1e-10);
}

TEST(Banded, TridiagonalTimesOnes) {
  BandedMatrix<Real> T(3, 1, 1, Real(P167));
  for (std::size_t i = 0; i < 3; ++i) {
    T.at(i, i) = Real(2.0, P167);
    if (i > 0) T.at(i, i - 1) = Real(-1.0, P167);
    if (i + 1 < 3) T.at(i, i + 1) = Real(-1.0, P167);
  }
  MPVector y = band_matvec(T, MPVector(3, Real(1.0, P167)));
  EXPECT_TRUE(y[0] == 1.0);
  EXPECT_TRUE(y[1] == 0.0);
  EXPECT_TRUE(y[2] == 1.0);
}

TEST(Banded, IdentityBand) {
  BandedMatrix<Real> I(4, 0, 0, Real(P167));
  for (std::size_t i = 0; i < 4; ++i) I.at(i, i) = Real(1.0, P167);
  MPVector x{Real(1.5, P167), Real(-2.0, P167), Real(3.0, P167), Real(0.25, P167)};
  MPVector y = band_matvec(I, x);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_TRUE(y[i] == x[i]);
}

TEST(Banded, MatvecMatchesDenseBitExact) {
  std::mt19937_64 gen(11);
  const std::size_t n = 30, kl = 2, ku = 3;
  MPMatrix D(n, n, P167);
  std::uniform_real_distribution<double> u(-1, 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (j + kl >= i && j <= i + ku) D(i, j) = Real(u(gen), P167) / 3.0;
  auto B = BandedMatrix<Real>::from_dense(D, kl, ku);
  MPVector x = testutil::random_vector(n, gen, P167);
  MPVector yb = band_matvec(B, x), yd = matvec(D, x);
  for (std::size_t i = 0; i < n; ++i) EXPECT_TRUE(yb[i] == yd[i]);
}

TEST(Banded, LUMatchesDenseLU) {
  std::mt19937_64 gen(13);
  const std::size_t n = 25, kl = 2, ku = 1;
  MPMatrix D(n, n, P167);
  std::uniform_real_distribution<double> u(-1, 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (j + kl >= i && j <= i + ku) D(i, j) = Real(u(gen), P167);
  MPVector b = testutil::random_vector(n, gen, P167);
  MPVector xb = BandedLU<Real>(BandedMatrix<Real>::from_dense(D, kl, ku)).solve(b);
  MPVector xd = lu_factor(D).solve(b);
  EXPECT_LT(testutil::rel_diff(xb, xd), 1e-40);
}

TEST(Cond, IdentityAndDiagonal) {
  EXPECT_TRUE(cond_inf(MPMatrix::identity(4, P167)) == 1.0);
  MPMatrix D(2, 2, P167);
  D(0, 0) = Real(10.0, P167);
  D(1, 1) = Real(1.0, P167);
  EXPECT_TRUE(cond_inf(D) == 10.0);
}

TEST(Cond, TwoByTwoClosedForm) {
  // [[1,2],[3,4]]: ||M|| = 7, M^-1 = [[-2,1],[1.5,-0.5]], ||M^-1|| = 3
  MPMatrix M(2, 2, P167);
  M(0, 0) = Real(1.0, P167);
  M(0, 1) = Real(2.0, P167);
  M(1, 0) = Real(3.0, P167);
  M(1, 1) = Real(4.0, P167);
  EXPECT_LT(testutil::rel_diff(cond_inf(M), Real(21.0, P167)), 1e-45);
}

}  // namespace
