#ifndef MPIRK_LINALG_HPP
#define MPIRK_LINALG_HPP

// Dense and banded linear algebra over double or Real.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mpirk/errors.hpp"
#include "mpirk/real.hpp"

namespace mpirk {

template <class T>
using Vector = std::vector<T>;

using MPVector = Vector<Real>;

template <class T>
Vector<T> zeros(std::size_t n, PrecisionContext ctx) {
  return Vector<T>(n, make_scalar<T>(0.0, ctx));
}

template <class T>
Vector<T> zeros_like(const Vector<T>& v) {
  if (v.empty()) return {};
  return Vector<T>(v.size(), scalar_like(0.0, v.front()));
}

/// Width of a vector's entries (53 for double or empty vectors).
template <class T>
int bits_of(const Vector<T>& v) {
  return v.empty() ? 53 : bits_of(v.front());
}

template <class T>
T norm_inf(const Vector<T>& v) {
  T out = v.empty() ? T{} : scalar_like(0.0, v.front());
  for (const auto& x : v)
    if (cmp_abs(x, out) > 0) out = x;
  using std::abs;
  return abs(out);
}

template <class T>
T dot(const Vector<T>& a, const Vector<T>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: length mismatch");
  T acc = a.empty() ? T{} : scalar_like(0.0, a.front());
  for (std::size_t i = 0; i < a.size(); ++i) mul_add(acc, a[i], b[i]);
  return acc;
}

template <class T>
T norm2(const Vector<T>& v) {
  using std::sqrt;
  return sqrt(dot(v, v));
}

/// y += alpha * x
template <class T>
void axpy(const T& alpha, const Vector<T>& x, Vector<T>& y) {
  if (x.size() != y.size()) throw DimensionMismatch("axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) mul_add(y[i], alpha, x[i]);
}

template <class T>
void scale(Vector<T>& v, const T& alpha) {
  for (auto& x : v) x *= alpha;
}

template <class T>
Vector<T> operator-(const Vector<T>& a, const Vector<T>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("vector subtraction: length mismatch");
  Vector<T> r = a;
  for (std::size_t i = 0; i < a.size(); ++i) r[i] -= b[i];
  return r;
}

template <class T>
Vector<T> operator+(const Vector<T>& a, const Vector<T>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("vector addition: length mismatch");
  Vector<T> r = a;
  for (std::size_t i = 0; i < a.size(); ++i) r[i] += b[i];
  return r;
}

/// Row-major dense matrix.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, const T& fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, PrecisionContext ctx)
      : Matrix(rows, cols, make_scalar<T>(0.0, ctx)) {}

  static Matrix identity(std::size_t n, PrecisionContext ctx) {
    Matrix I(n, n, ctx);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = make_scalar<T>(1.0, ctx);
    return I;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  T* row(std::size_t i) { return data_.data() + i * cols_; }
  const T* row(std::size_t i) const { return data_.data() + i * cols_; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  int bits() const { return data_.empty() ? 53 : bits_of(data_.front()); }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<T> data_;
};

using MPMatrix = Matrix<Real>;

template <class T>
Vector<T> matvec(const Matrix<T>& M, const Vector<T>& x) {
  if (M.cols() != x.size()) throw DimensionMismatch("matvec: dimension mismatch");
  Vector<T> y;
  y.reserve(M.rows());
  for (std::size_t i = 0; i < M.rows(); ++i) {
    const T* r = M.row(i);
    T acc = scalar_like(0.0, r[0]);
    for (std::size_t j = 0; j < M.cols(); ++j) mul_add(acc, r[j], x[j]);
    y.push_back(std::move(acc));
  }
  return y;
}

template <class T>
Matrix<T> matmul(const Matrix<T>& A, const Matrix<T>& B) {
  if (A.cols() != B.rows()) throw DimensionMismatch("matmul: inner dimension mismatch");
  Matrix<T> C(A.rows(), B.cols(), scalar_like(0.0, A(0, 0)));
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t k = 0; k < A.cols(); ++k) {
      const T& a = A(i, k);
      if (is_zero(a)) continue;
      const T* b = B.row(k);
      T* c = C.row(i);
      for (std::size_t j = 0; j < B.cols(); ++j) mul_add(c[j], a, b[j]);
    }
  return C;
}

template <class T>
Matrix<T> transpose(const Matrix<T>& A) {
  Matrix<T> B(A.cols(), A.rows(), scalar_like(0.0, A(0, 0)));
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) B(j, i) = A(i, j);
  return B;
}

template <class T>
T norm_inf(const Matrix<T>& M) {
  using std::abs;
  T best = scalar_like(0.0, M(0, 0));
  for (std::size_t i = 0; i < M.rows(); ++i) {
    T s = scalar_like(0.0, M(0, 0));
    for (std::size_t j = 0; j < M.cols(); ++j) s += abs(M(i, j));
    if (s > best) best = s;
  }
  return best;
}

/// Band-compressed square matrix: diagonal d in [-kl, ku] is stored as a
/// length-n column, entry (i, i+d) at slot i.
template <class T>
class BandedMatrix {
 public:
  BandedMatrix() = default;
  BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku, const T& zero)
      : n_(n), kl_(kl), ku_(ku), zero_(zero), data_((kl + ku + 1) * n, zero) {}
  BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku, PrecisionContext ctx)
      : BandedMatrix(n, kl, ku, make_scalar<T>(0.0, ctx)) {}

  std::size_t n() const { return n_; }
  std::size_t kl() const { return kl_; }
  std::size_t ku() const { return ku_; }

  bool in_band(std::size_t i, std::size_t j) const {
    return (j >= i && j - i <= ku_) || (i > j && i - j <= kl_);
  }

  /// Reference to an in-band entry.
  T& at(std::size_t i, std::size_t j) {
    if (!in_band(i, j) || i >= n_ || j >= n_) throw InvalidArgument("BandedMatrix::at outside band");
    return data_[slot(i, j)];
  }
  const T& at(std::size_t i, std::size_t j) const {
    if (!in_band(i, j) || i >= n_ || j >= n_) throw InvalidArgument("BandedMatrix::at outside band");
    return data_[slot(i, j)];
  }

  /// Entry value, zero outside the band.
  const T& operator()(std::size_t i, std::size_t j) const { return in_band(i, j) ? data_[slot(i, j)] : zero_; }

  const T& zero() const { return zero_; }

  Matrix<T> to_dense() const {
    Matrix<T> D(n_, n_, zero_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = lo(i); j <= hi(i); ++j) D(i, j) = data_[slot(i, j)];
    return D;
  }

  static BandedMatrix from_dense(const Matrix<T>& D, std::size_t kl, std::size_t ku) {
    if (!D.square()) throw DimensionMismatch("banded: matrix not square");
    BandedMatrix B(D.rows(), kl, ku, scalar_like(0.0, D(0, 0)));
    for (std::size_t i = 0; i < B.n_; ++i)
      for (std::size_t j = 0; j < B.n_; ++j) {
        if (B.in_band(i, j)) {
          B.data_[B.slot(i, j)] = D(i, j);
        } else if (!is_zero(D(i, j))) {
          throw InvalidArgument("banded: nonzero entry outside band");
        }
      }
    return B;
  }

  /// First and last column index with storage in row i.
  std::size_t lo(std::size_t i) const { return i > kl_ ? i - kl_ : 0; }
  std::size_t hi(std::size_t i) const { return std::min(n_ - 1, i + ku_); }

  int bits() const { return bits_of(zero_); }

 private:
  std::size_t n_ = 0, kl_ = 0, ku_ = 0;
  T zero_{};
  std::vector<T> data_;

  std::size_t slot(std::size_t i, std::size_t j) const { return (j + kl_ - i) * n_ + i; }
};

using MPBandedMatrix = BandedMatrix<Real>;

/// y = M x in O(n (kl + ku + 1)) operations.
template <class T>
Vector<T> band_matvec(const BandedMatrix<T>& M, const Vector<T>& x) {
  if (x.size() != M.n()) throw DimensionMismatch("band_matvec: x.len != n");
  Vector<T> y;
  y.reserve(M.n());
  for (std::size_t i = 0; i < M.n(); ++i) {
    T acc = M.zero();
    for (std::size_t j = M.lo(i); j <= M.hi(i); ++j) mul_add(acc, M.at(i, j), x[j]);
    y.push_back(std::move(acc));
  }
  return y;
}

/// Jacobian storage: dense or banded.
template <class T>
using Jacobian = std::variant<Matrix<T>, BandedMatrix<T>>;

template <class T>
std::size_t dimension(const Jacobian<T>& J) {
  return std::visit(
      [](const auto& M) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(M)>, Matrix<T>>) {
          return M.rows();
        } else {
          return M.n();
        }
      },
      J);
}

template <class T>
Vector<T> apply(const Jacobian<T>& J, const Vector<T>& x) {
  return std::visit(
      [&](const auto& M) {
        if constexpr (std::is_same_v<std::decay_t<decltype(M)>, Matrix<T>>) {
          return matvec(M, x);
        } else {
          return band_matvec(M, x);
        }
      },
      J);
}

template <class T>
Matrix<T> to_dense(const Jacobian<T>& J) {
  if (const auto* D = std::get_if<Matrix<T>>(&J)) return *D;
  return std::get<BandedMatrix<T>>(J).to_dense();
}

// ---- precision conversion ----

namespace detail {
template <class To, class From>
To convert_checked(const From& v, PrecisionContext ctx) {
  To r = convert_scalar<To>(v, ctx);
  if (is_finite(v) && !is_finite(r)) throw NonFiniteConversion("conversion overflowed the target format");
  return r;
}
}  // namespace detail

/// Correctly rounds every entry into the target format.
template <class To, class From>
Vector<To> convert(const Vector<From>& v, PrecisionContext ctx) {
  Vector<To> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(detail::convert_checked<To>(x, ctx));
  return out;
}

template <class To, class From>
Matrix<To> convert(const Matrix<From>& M, PrecisionContext ctx) {
  Matrix<To> out(M.rows(), M.cols(), make_scalar<To>(0.0, ctx));
  for (std::size_t k = 0; k < M.data().size(); ++k) out.data()[k] = detail::convert_checked<To>(M.data()[k], ctx);
  return out;
}

template <class To, class From>
BandedMatrix<To> convert(const BandedMatrix<From>& M, PrecisionContext ctx) {
  BandedMatrix<To> out(M.n(), M.kl(), M.ku(), make_scalar<To>(0.0, ctx));
  for (std::size_t i = 0; i < M.n(); ++i)
    for (std::size_t j = M.lo(i); j <= M.hi(i); ++j) out.at(i, j) = detail::convert_checked<To>(M.at(i, j), ctx);
  return out;
}

template <class To, class From>
Jacobian<To> convert(const Jacobian<From>& J, PrecisionContext ctx) {
  return std::visit([&](const auto& M) -> Jacobian<To> { return convert<To>(M, ctx); }, J);
}

inline MPVector convert(const MPVector& v, PrecisionContext ctx) { return convert<Real>(v, ctx); }
inline MPMatrix convert(const MPMatrix& M, PrecisionContext ctx) { return convert<Real>(M, ctx); }

// ---- LU with partial pivoting ----

/// P M = L U with unit lower L; both factors share one matrix.
template <class T>
class LUFactorization {
 public:
  LUFactorization() = default;

  explicit LUFactorization(Matrix<T> M) : lu_(std::move(M)), perm_(lu_.rows()) {
    if (!lu_.square()) throw DimensionMismatch("lu_factor: matrix not square");
    const std::size_t n = lu_.rows();
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t p = k;
      for (std::size_t i = k + 1; i < n; ++i)
        if (cmp_abs(lu_(i, k), lu_(p, k)) > 0) p = i;
      if (is_zero(lu_(p, k))) throw SingularMatrix("lu_factor: zero pivot column " + std::to_string(k));
      if (p != k) {
        std::swap_ranges(lu_.row(k), lu_.row(k) + n, lu_.row(p));
        std::swap(perm_[k], perm_[p]);
      }
      const T& pivot = lu_(k, k);
      for (std::size_t i = k + 1; i < n; ++i) {
        T& l = lu_(i, k);
        if (is_zero(l)) continue;
        l /= pivot;
        T* ri = lu_.row(i);
        const T* rk = lu_.row(k);
        for (std::size_t j = k + 1; j < n; ++j) mul_sub(ri[j], l, rk[j]);
      }
    }
  }

  std::size_t size() const { return lu_.rows(); }
  const Matrix<T>& packed() const { return lu_; }
  const std::vector<std::size_t>& permutation() const { return perm_; }

  Vector<T> solve(const Vector<T>& b) const {
    const std::size_t n = size();
    if (b.size() != n) throw DimensionMismatch("LU solve: rhs length mismatch");
    Vector<T> x;
    x.reserve(n);
    for (std::size_t i = 0; i < n; ++i) x.push_back(b[perm_[i]]);
    for (std::size_t i = 1; i < n; ++i) {
      const T* r = lu_.row(i);
      for (std::size_t j = 0; j < i; ++j) mul_sub(x[i], r[j], x[j]);
    }
    for (std::size_t i = n; i-- > 0;) {
      const T* r = lu_.row(i);
      for (std::size_t j = i + 1; j < n; ++j) mul_sub(x[i], r[j], x[j]);
      x[i] /= r[i];
    }
    return x;
  }

  Matrix<T> inverse() const {
    const std::size_t n = size();
    const T zero = scalar_like(0.0, lu_(0, 0));
    Matrix<T> inv(n, n, zero);
    Vector<T> e(n, zero);
    for (std::size_t j = 0; j < n; ++j) {
      e[j] = scalar_like(1.0, zero);
      Vector<T> col = solve(e);
      for (std::size_t i = 0; i < n; ++i) inv(i, j) = std::move(col[i]);
      e[j] = zero;
    }
    return inv;
  }

 private:
  Matrix<T> lu_;
  std::vector<std::size_t> perm_;
};

template <class T>
LUFactorization<T> lu_factor(Matrix<T> M) {
  return LUFactorization<T>(std::move(M));
}

/// ||M||_inf * ||M^-1||_inf with the inverse formed explicitly.
template <class T>
T cond_inf(const Matrix<T>& M) {
  auto lu = lu_factor(M);
  return norm_inf(M) * norm_inf(lu.inverse());
}

// ---- banded LU with partial pivoting ----

/// Row pivoting widens the upper bandwidth of U to kl + ku.
template <class T>
class BandedLU {
 public:
  BandedLU() = default;

  explicit BandedLU(const BandedMatrix<T>& M)
      : n_(M.n()), kl_(M.kl()), ku_(M.ku()), width_(2 * M.kl() + M.ku() + 1), piv_(M.n()) {
    const T zero = M.zero();
    rows_.assign(n_ * width_, zero);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = M.lo(i); j <= M.hi(i); ++j) at(i, j) = M.at(i, j);

    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t last_row = std::min(n_ - 1, k + kl_);
      std::size_t p = k;
      for (std::size_t i = k + 1; i <= last_row; ++i)
        if (cmp_abs(at(i, k), at(p, k)) > 0) p = i;
      if (is_zero(at(p, k))) throw SingularMatrix("banded LU: zero pivot column " + std::to_string(k));
      piv_[k] = p;
      const std::size_t last_col = std::min(n_ - 1, k + kl_ + ku_);
      if (p != k)
        for (std::size_t j = k; j <= last_col; ++j) std::swap(at(k, j), at(p, j));
      const T& pivot = at(k, k);
      for (std::size_t i = k + 1; i <= last_row; ++i) {
        T& l = at(i, k);
        if (is_zero(l)) continue;
        l /= pivot;
        for (std::size_t j = k + 1; j <= last_col; ++j) mul_sub(at(i, j), l, at(k, j));
      }
    }
  }

  std::size_t size() const { return n_; }

  Vector<T> solve(Vector<T> x) const {
    if (x.size() != n_) throw DimensionMismatch("banded LU solve: rhs length mismatch");
    for (std::size_t k = 0; k < n_; ++k) {
      if (piv_[k] != k) std::swap(x[k], x[piv_[k]]);
      const std::size_t last_row = std::min(n_ - 1, k + kl_);
      for (std::size_t i = k + 1; i <= last_row; ++i) mul_sub(x[i], at(i, k), x[k]);
    }
    for (std::size_t i = n_; i-- > 0;) {
      const std::size_t last_col = std::min(n_ - 1, i + kl_ + ku_);
      for (std::size_t j = i + 1; j <= last_col; ++j) mul_sub(x[i], at(i, j), x[j]);
      x[i] /= at(i, i);
    }
    return x;
  }

 private:
  std::size_t n_ = 0, kl_ = 0, ku_ = 0, width_ = 0;
  std::vector<T> rows_;
  std::vector<std::size_t> piv_;

  // Row i keeps columns [i - kl, i + kl + ku].
  T& at(std::size_t i, std::size_t j) { return rows_[i * width_ + (j + kl_ - i)]; }
  const T& at(std::size_t i, std::size_t j) const { return rows_[i * width_ + (j + kl_ - i)]; }
};

}  // namespace mpirk

#endif  // MPIRK_LINALG_HPP
