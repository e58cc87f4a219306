#pragma once

// Scalar precision, complex dense matrices, norms and Givens rotations.
//
// Everything in the library is templated on the real type `Real`
// (float for binary32, double for binary64). All matrix arithmetic is
// complex, real inputs are promoted.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qzdefl {

using index_t = std::size_t;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Precision
// ---------------------------------------------------------------------------

enum class PrecisionTag { binary32, binary64 };

template <typename Real>
struct precision_of;

template <>
struct precision_of<float> {
  static constexpr PrecisionTag tag = PrecisionTag::binary32;
};

template <>
struct precision_of<double> {
  static constexpr PrecisionTag tag = PrecisionTag::binary64;
};

/// Distance between 1 and the next representable number (2^-52 in binary64).
/// This is the epsilon convention, not the half-ulp unit roundoff.
template <typename Real>
constexpr Real unit_roundoff() noexcept {
  return std::numeric_limits<Real>::epsilon();
}

/// Smallest positive (subnormal) number of the format.
template <typename Real>
constexpr Real smallest_positive() noexcept {
  return std::numeric_limits<Real>::denorm_min();
}

inline double machine_u(PrecisionTag p) noexcept {
  return p == PrecisionTag::binary32 ? double(unit_roundoff<float>())
                                     : unit_roundoff<double>();
}

inline double machine_u_s(PrecisionTag p) noexcept {
  return p == PrecisionTag::binary32 ? double(smallest_positive<float>())
                                     : smallest_positive<double>();
}

inline std::string_view to_string(PrecisionTag p) noexcept {
  return p == PrecisionTag::binary32 ? "binary32" : "binary64";
}

inline PrecisionTag parse_precision(std::string_view s) {
  if (s == "binary32" || s == "single" || s == "float") return PrecisionTag::binary32;
  if (s == "binary64" || s == "double") return PrecisionTag::binary64;
  throw std::invalid_argument("unknown precision '" + std::string(s) + "'");
}

template <typename Real>
using Complex = std::complex<Real>;

// ---------------------------------------------------------------------------
// Matrix
// ---------------------------------------------------------------------------

/// Dense complex matrix, column-major.
template <typename Real>
class Matrix {
 public:
  using value_type = Complex<Real>;

  Matrix() = default;

  Matrix(index_t rows, index_t cols) : rows_{rows}, cols_{cols}, data_(rows * cols) {}

  static Matrix identity(index_t n) {
    Matrix m(n, n);
    for (index_t i = 0; i < n; ++i) m(i, i) = value_type(1);
    return m;
  }

  index_t rows() const noexcept { return rows_; }
  index_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  value_type& operator()(index_t i, index_t j) noexcept { return data_[i + j * rows_]; }
  const value_type& operator()(index_t i, index_t j) const noexcept {
    return data_[i + j * rows_];
  }

  std::span<value_type> column(index_t j) noexcept {
    return {data_.data() + j * rows_, rows_};
  }
  std::span<const value_type> column(index_t j) const noexcept {
    return {data_.data() + j * rows_, rows_};
  }

  std::span<value_type> values() noexcept { return data_; }
  std::span<const value_type> values() const noexcept { return data_; }

  template <typename Other>
  Matrix<Other> cast() const {
    Matrix<Other> out(rows_, cols_);
    auto dst = out.values();
    for (std::size_t k = 0; k < data_.size(); ++k)
      dst[k] = Complex<Other>(static_cast<Other>(data_[k].real()),
                              static_cast<Other>(data_[k].imag()));
    return out;
  }

  bool operator==(const Matrix&) const = default;

 private:
  index_t rows_ = 0;
  index_t cols_ = 0;
  std::vector<value_type> data_;
};

template <typename Real>
Matrix<Real> operator*(const Matrix<Real>& a, const Matrix<Real>& b) {
  if (a.cols() != b.rows()) throw DimensionError("matrix product: inner dimensions differ");
  Matrix<Real> c(a.rows(), b.cols());
  for (index_t j = 0; j < b.cols(); ++j)
    for (index_t k = 0; k < a.cols(); ++k) {
      const auto bkj = b(k, j);
      if (bkj == Complex<Real>{}) continue;
      for (index_t i = 0; i < a.rows(); ++i) c(i, j) += a(i, k) * bkj;
    }
  return c;
}

template <typename Real>
Matrix<Real> operator-(const Matrix<Real>& a, const Matrix<Real>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("matrix difference: shapes differ");
  Matrix<Real> c = a;
  auto cv = c.values();
  auto bv = b.values();
  for (std::size_t k = 0; k < cv.size(); ++k) cv[k] -= bv[k];
  return c;
}

template <typename Real>
Matrix<Real> adjoint(const Matrix<Real>& a) {
  Matrix<Real> c(a.cols(), a.rows());
  for (index_t j = 0; j < a.cols(); ++j)
    for (index_t i = 0; i < a.rows(); ++i) c(j, i) = std::conj(a(i, j));
  return c;
}

template <typename Real>
bool all_finite(const Matrix<Real>& m) {
  return std::all_of(m.values().begin(), m.values().end(), [](const auto& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

/// Frobenius norm, accumulated with a running scale so that neither
/// overflow nor underflow occurs for representable results.
template <typename Real>
Real frobenius_norm(const Matrix<Real>& m) {
  Real scale = 0;
  Real ssq = 1;
  auto accumulate = [&](Real x) {
    if (x == Real(0)) return;
    const Real ax = std::abs(x);
    if (scale < ax) {
      ssq = 1 + ssq * (scale / ax) * (scale / ax);
      scale = ax;
    } else {
      ssq += (ax / scale) * (ax / scale);
    }
  };
  for (const auto& z : m.values()) {
    accumulate(z.real());
    accumulate(z.imag());
  }
  return scale * std::sqrt(ssq);
}

// ---------------------------------------------------------------------------
// Givens rotations
// ---------------------------------------------------------------------------

/// Plane rotation acting on the index pair (first, second). Applied to a
/// pair of vectors (x, y) it produces
///   x' =  c x + s y
///   y' = -conj(s) x + c y
/// As a row operation this is G = [c s; -conj(s) c] applied from the left.
template <typename Real>
struct GivensRotation {
  Real c = 1;
  Complex<Real> s{};
  index_t first = 0;
  index_t second = 1;

  bool is_identity() const noexcept { return c == Real(1) && s == Complex<Real>{}; }

  /// Rotation whose column action equals right-multiplication by G^H.
  GivensRotation conj() const noexcept { return {c, std::conj(s), first, second}; }
};

template <typename Real>
struct GivensResult {
  GivensRotation<Real> rotation;
  Complex<Real> r{};
};

/// Rotation mapping (a, b) to (r, 0) with |r| = hypot(|a|, |b|).
/// For a = b = 0 the identity is returned with r = 0.
template <typename Real>
GivensResult<Real> compute_givens(Complex<Real> a, Complex<Real> b, index_t first = 0,
                                  index_t second = 1) {
  GivensResult<Real> out;
  out.rotation.first = first;
  out.rotation.second = second;
  if (b == Complex<Real>{}) {
    out.r = a;
    return out;
  }
  const Real abs_b = std::abs(b);
  if (a == Complex<Real>{}) {
    out.rotation.c = 0;
    out.rotation.s = std::conj(b) / abs_b;
    out.r = Complex<Real>(abs_b);
    return out;
  }
  const Real abs_a = std::abs(a);
  const Real norm = std::hypot(abs_a, abs_b);
  const Complex<Real> phase = a / abs_a;
  out.rotation.c = abs_a / norm;
  out.rotation.s = phase * (std::conj(b) / norm);
  out.r = phase * norm;
  return out;
}

/// Applies the rotation to rows (first, second) on columns [col_begin, col_end).
template <typename Real>
void rotate_rows(Matrix<Real>& m, const GivensRotation<Real>& g, index_t col_begin,
                 index_t col_end) {
  if (g.is_identity()) return;
  const auto sc = std::conj(g.s);
  for (index_t j = col_begin; j < col_end; ++j) {
    const auto x = m(g.first, j);
    const auto y = m(g.second, j);
    m(g.first, j) = g.c * x + g.s * y;
    m(g.second, j) = g.c * y - sc * x;
  }
}

/// Applies the rotation to columns (first, second) on rows [row_begin, row_end).
template <typename Real>
void rotate_cols(Matrix<Real>& m, const GivensRotation<Real>& g, index_t row_begin,
                 index_t row_end) {
  if (g.is_identity()) return;
  const auto sc = std::conj(g.s);
  auto x = m.column(g.first);
  auto y = m.column(g.second);
  for (index_t i = row_begin; i < row_end; ++i) {
    const auto xi = x[i];
    const auto yi = y[i];
    x[i] = g.c * xi + g.s * yi;
    y[i] = g.c * yi - sc * xi;
  }
}

}  // namespace qzdefl
