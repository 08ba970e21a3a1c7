#ifndef MPIRK_REDUCED_HPP
#define MPIRK_REDUCED_HPP

// The W-transformed simplified Newton matrix  D (x) I - h X (x) J  with
// D = I and X tridiagonal: X(0,0) = 1/2, X(i,i+1) = -zeta_i, X(i+1,i) = zeta_i.
// Vectors are stage-major: entry k of stage i lives at i*n + k.

#include <cstddef>
#include <utility>
#include <variant>
#include <vector>

#include "mpirk/errors.hpp"
#include "mpirk/linalg.hpp"
#include "mpirk/tableau.hpp"

namespace mpirk {

template <class T>
struct ReducedOperator {
  std::size_t n = 0, m = 0;
  T h{};
  Jacobian<T> J;
  Vector<T> zeta;  // m - 1 entries

  bool banded() const { return std::holds_alternative<BandedMatrix<T>>(J); }
  std::size_t size() const { return n * m; }

  /// X(i, j) of the tridiagonal transformed matrix.
  T x_entry(std::size_t i, std::size_t j) const {
    if (i == j) return scalar_like(i == 0 ? 0.5 : 0.0, h);
    if (j == i + 1) return -zeta[i];
    if (i == j + 1) return zeta[j];
    return scalar_like(0.0, h);
  }

  Vector<T> apply(const Vector<T>& v) const {
    if (v.size() != size()) throw DimensionMismatch("reduced operator: vector length mismatch");
    std::vector<Vector<T>> u(m);
    for (std::size_t i = 0; i < m; ++i) u[i] = mpirk::apply(J, Vector<T>(v.begin() + i * n, v.begin() + (i + 1) * n));
    Vector<T> out = v;
    const T half_h = h * 0.5;
    for (std::size_t k = 0; k < n; ++k) mul_sub(out[k], half_h, u[0][k]);
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const T hz = h * zeta[i];
      for (std::size_t k = 0; k < n; ++k) {
        mul_add(out[i * n + k], hz, u[i + 1][k]);
        mul_sub(out[(i + 1) * n + k], hz, u[i][k]);
      }
    }
    return out;
  }
};

inline ReducedOperator<Real> assemble_reduced(const Jacobian<Real>& J, const Real& h, const WTransform& wt) {
  if (!(h > 0.0)) throw InvalidArgument("assemble_reduced: h must be positive");
  ReducedOperator<Real> op;
  op.n = dimension(J);
  op.m = static_cast<std::size_t>(wt.m());
  op.h = h;
  op.J = J;
  op.zeta = wt.zeta;
  return op;
}

template <class To, class From>
ReducedOperator<To> convert(const ReducedOperator<From>& op, PrecisionContext ctx) {
  ReducedOperator<To> out;
  out.n = op.n;
  out.m = op.m;
  out.h = convert_scalar<To>(op.h, ctx);
  out.J = convert<To>(op.J, ctx);
  out.zeta = convert<To>(op.zeta, ctx);
  return out;
}

/// Dense expansion of the operator, for testing and small problems.
template <class T>
Matrix<T> to_dense(const ReducedOperator<T>& op) {
  const Matrix<T> J = to_dense(op.J);
  const std::size_t n = op.n, m = op.m;
  Matrix<T> K(n * m, n * m, scalar_like(0.0, op.h));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const T hx = op.h * op.x_entry(i, j);
      if (is_zero(hx) && i != j) continue;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
          T v = -(hx * J(a, b));
          if (i == j && a == b) v += 1.0;
          K(i * n + a, j * n + b) = std::move(v);
        }
    }
  return K;
}

/// Exact solver for the reduced system at the precision of T (the block LU
/// preconditioner). Dense J: block tridiagonal elimination with pivot blocks
///   U_0 = I - (h/2) J,   U_i = I + (h zeta_{i-1})^2 J U_{i-1}^{-1} J.
/// Banded J: the system is reordered component-major, which keeps it banded
/// with bandwidths kl*m + m - 1 and ku*m + m - 1, and factored as one band.
template <class T>
class ReducedSolver {
 public:
  ReducedSolver() = default;

  explicit ReducedSolver(const ReducedOperator<T>& op) : n_(op.n), m_(op.m), h_(op.h), zeta_(op.zeta) {
    if (const auto* B = std::get_if<BandedMatrix<T>>(&op.J)) {
      factor_banded(op, *B);
    } else {
      factor_dense(std::get<Matrix<T>>(op.J));
    }
  }

  Vector<T> solve(const Vector<T>& v) const {
    if (v.size() != n_ * m_) throw DimensionMismatch("reduced solve: vector length mismatch");
    return banded_ ? solve_banded(v) : solve_dense(v);
  }

 private:
  std::size_t n_ = 0, m_ = 0;
  T h_{};
  Vector<T> zeta_;
  bool banded_ = false;
  Matrix<T> J_;
  std::vector<LUFactorization<T>> pivots_;
  BandedLU<T> band_;

  void factor_dense(const Matrix<T>& J) {
    J_ = J;
    const std::size_t n = n_;
    Matrix<T> U(n, n, scalar_like(0.0, h_));
    for (std::size_t a = 0; a < n; ++a) U(a, a) = scalar_like(1.0, h_);
    const T half_h = h_ * 0.5;
    for (std::size_t k = 0; k < U.data().size(); ++k) mul_sub(U.data()[k], half_h, J.data()[k]);
    pivots_.push_back(lu_factor(U));
    for (std::size_t i = 1; i < m_; ++i) {
      const T hz = h_ * zeta_[i - 1];
      const T hz2 = hz * hz;
      Matrix<T> V = matmul(J, matmul(pivots_.back().inverse(), J));
      for (std::size_t k = 0; k < V.data().size(); ++k) V.data()[k] *= hz2;
      for (std::size_t a = 0; a < n; ++a) V(a, a) += 1.0;
      pivots_.push_back(lu_factor(std::move(V)));
    }
  }

  Vector<T> solve_dense(const Vector<T>& v) const {
    const std::size_t n = n_;
    auto block = [&](const Vector<T>& x, std::size_t i) { return Vector<T>(x.begin() + i * n, x.begin() + (i + 1) * n); };
    std::vector<Vector<T>> w(m_);
    w[0] = block(v, 0);
    for (std::size_t i = 1; i < m_; ++i) {
      Vector<T> t = matvec(J_, pivots_[i - 1].solve(w[i - 1]));
      w[i] = block(v, i);
      axpy(h_ * zeta_[i - 1], t, w[i]);
    }
    Vector<T> out(v.size(), scalar_like(0.0, h_));
    Vector<T> y = pivots_[m_ - 1].solve(w[m_ - 1]);
    std::copy(y.begin(), y.end(), out.begin() + (m_ - 1) * n);
    for (std::size_t i = m_ - 1; i-- > 0;) {
      Vector<T> t = matvec(J_, y);
      axpy(-(h_ * zeta_[i]), t, w[i]);
      y = pivots_[i].solve(w[i]);
      std::copy(y.begin(), y.end(), out.begin() + i * n);
    }
    return out;
  }

  void factor_banded(const ReducedOperator<T>& op, const BandedMatrix<T>& J) {
    banded_ = true;
    const std::size_t n = n_, m = m_;
    const std::size_t kl = J.kl() * m + m - 1, ku = J.ku() * m + m - 1;
    BandedMatrix<T> P(n * m, kl, ku, scalar_like(0.0, h_));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = J.lo(a); b <= J.hi(a); ++b)
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = (i == 0 ? 0 : i - 1); j <= std::min(m - 1, i + 1); ++j)
            P.at(a * m + i, b * m + j) = -(op.h * op.x_entry(i, j) * J.at(a, b));
    for (std::size_t p = 0; p < n * m; ++p) P.at(p, p) += 1.0;
    band_ = BandedLU<T>(P);
  }

  Vector<T> solve_banded(const Vector<T>& v) const {
    Vector<T> x(v.size(), scalar_like(0.0, h_));
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t a = 0; a < n_; ++a) x[a * m_ + i] = v[i * n_ + a];
    x = band_.solve(std::move(x));
    Vector<T> out(v.size(), scalar_like(0.0, h_));
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t a = 0; a < n_; ++a) out[i * n_ + a] = std::move(x[a * m_ + i]);
    return out;
  }
};

template <class T>
ReducedSolver<T> block_lu_precond(const ReducedOperator<T>& op) {
  return ReducedSolver<T>(op);
}

}  // namespace mpirk

#endif  // MPIRK_REDUCED_HPP
