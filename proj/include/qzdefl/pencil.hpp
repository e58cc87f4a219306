#pragma once

#include <cmath>
#include <optional>
#include <variant>
#include <vector>

#include "qzdefl/core.hpp"

namespace qzdefl {

/// A matrix pencil (H, T). Holds either a general pair (A, B) or a reduced pair.
template <typename Real>
struct Pencil {
  Matrix<Real> h;
  Matrix<Real> t;

  Pencil() = default;
  Pencil(Matrix<Real> h_in, Matrix<Real> t_in) : h(std::move(h_in)), t(std::move(t_in)) {
    validate();
  }

  index_t size() const noexcept { return h.rows(); }

  void validate() const {
    if (!h.is_square() || !t.is_square() || h.rows() != t.rows())
      throw DimensionError("pencil matrices must be square and of equal size");
  }

  template <typename Other>
  Pencil<Other> cast() const {
    return Pencil<Other>(h.template cast<Other>(), t.template cast<Other>());
  }

  static constexpr PrecisionTag precision() noexcept { return precision_of<Real>::tag; }
};

/// True when h is upper Hessenberg and t upper triangular, with exact zeros.
template <typename Real>
bool is_hessenberg_triangular(const Pencil<Real>& p) {
  const index_t n = p.size();
  for (index_t j = 0; j < n; ++j)
    for (index_t i = j + 1; i < n; ++i) {
      if (p.t(i, j) != Complex<Real>{}) return false;
      if (i > j + 1 && p.h(i, j) != Complex<Real>{}) return false;
    }
  return true;
}

/// Pencil in Hessenberg-triangular form with optional accumulated unitary
/// factors such that (A, B) = (q h z^H, q t z^H).
template <typename Real>
struct HtForm {
  Pencil<Real> pencil;
  std::optional<Matrix<Real>> q;
  std::optional<Matrix<Real>> z;

  index_t size() const noexcept { return pencil.size(); }
  Matrix<Real>& h() noexcept { return pencil.h; }
  Matrix<Real>& t() noexcept { return pencil.t; }
  const Matrix<Real>& h() const noexcept { return pencil.h; }
  const Matrix<Real>& t() const noexcept { return pencil.t; }

  template <typename Other>
  HtForm<Other> cast() const {
    HtForm<Other> out{pencil.template cast<Other>(), std::nullopt, std::nullopt};
    if (q) out.q = q->template cast<Other>();
    if (z) out.z = z->template cast<Other>();
    return out;
  }
};

/// Generalized eigenvalue as a homogeneous pair; beta == 0 encodes infinity.
template <typename Real>
struct EigPair {
  Complex<Real> alpha{};
  Complex<Real> beta{};

  bool is_infinite() const noexcept { return beta == Complex<Real>{}; }

  /// Rotates the phase of beta into alpha so that beta is real and >= 0.
  EigPair normalized() const {
    if (beta == Complex<Real>{} || (beta.imag() == Real(0) && beta.real() > Real(0)))
      return *this;
    const Real mag = std::abs(beta);
    const Complex<Real> phase = std::conj(beta) / mag;
    return {alpha * phase, Complex<Real>(mag)};
  }

  template <typename Other>
  EigPair<Other> cast() const {
    return {Complex<Other>(Other(alpha.real()), Other(alpha.imag())),
            Complex<Other>(Other(beta.real()), Other(beta.imag()))};
  }
};

struct Infinite {
  bool operator==(const Infinite&) const = default;
};

template <typename Real>
using EigValue = std::variant<Complex<Real>, Infinite>;

template <typename Real>
EigValue<Real> ratio(const EigPair<Real>& e) {
  if (e.is_infinite()) return Infinite{};
  return e.alpha / e.beta;
}

/// Chordal distance |a1 b2 - a2 b1| / (|(a1,b1)| |(a2,b2)|), in [0, 1].
template <typename Real>
Real chordal_distance(const EigPair<Real>& e1, const EigPair<Real>& e2) {
  const Real n1 = std::hypot(std::abs(e1.alpha), std::abs(e1.beta));
  const Real n2 = std::hypot(std::abs(e2.alpha), std::abs(e2.beta));
  if (n1 == Real(0) || n2 == Real(0)) return Real(1);
  const auto a1 = e1.alpha / n1, b1 = e1.beta / n1;
  const auto a2 = e2.alpha / n2, b2 = e2.beta / n2;
  return std::min(Real(1), std::abs(a1 * b2 - a2 * b1));
}

template <typename Real>
index_t count_infinite(const std::vector<EigPair<Real>>& pairs) {
  index_t k = 0;
  for (const auto& e : pairs) k += e.is_infinite() ? 1 : 0;
  return k;
}

}  // namespace qzdefl
