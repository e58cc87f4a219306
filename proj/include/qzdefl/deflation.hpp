#pragma once

// Deflation criteria for the QZ iteration.
//
// Index convention: all indices are 0-based. A finite deflation site
// i in [1, n) refers to the subdiagonal entry h(i, i-1) and the 2x2
// subpencil on rows/columns {i-1, i}. An infinite deflation site
// i in [0, n) refers to the diagonal entry t(i, i).

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qzdefl/core.hpp"
#include "qzdefl/pencil.hpp"

namespace qzdefl {

enum class FiniteCriterion { normwise, elementwise, strict };
enum class InfiniteCriterion { normwise, elementwise, ultra_strict };

inline std::string_view to_string(FiniteCriterion c) noexcept {
  switch (c) {
    case FiniteCriterion::normwise: return "normwise";
    case FiniteCriterion::elementwise: return "elementwise";
    case FiniteCriterion::strict: return "strict";
  }
  return "?";
}

inline std::string_view to_string(InfiniteCriterion c) noexcept {
  switch (c) {
    case InfiniteCriterion::normwise: return "normwise";
    case InfiniteCriterion::elementwise: return "elementwise";
    case InfiniteCriterion::ultra_strict: return "ultra-strict";
  }
  return "?";
}

inline FiniteCriterion parse_finite_criterion(std::string_view s) {
  if (s == "normwise") return FiniteCriterion::normwise;
  if (s == "elementwise") return FiniteCriterion::elementwise;
  if (s == "strict") return FiniteCriterion::strict;
  throw std::invalid_argument("unknown finite criterion '" + std::string(s) + "'");
}

inline InfiniteCriterion parse_infinite_criterion(std::string_view s) {
  if (s == "normwise") return InfiniteCriterion::normwise;
  if (s == "elementwise") return InfiniteCriterion::elementwise;
  if (s == "ultra-strict" || s == "ultra_strict" || s == "ultrastrict")
    return InfiniteCriterion::ultra_strict;
  throw std::invalid_argument("unknown infinite criterion '" + std::string(s) + "'");
}

/// Raised when an eigenvalue derivative has a zero denominator.
struct SingularSensitivityError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Selected criteria plus the quantities they need. The norms are taken
/// once from the initial reduced pencil.
template <typename Real>
struct DeflationPolicy {
  FiniteCriterion finite = FiniteCriterion::strict;
  InfiniteCriterion infinite = InfiniteCriterion::normwise;
  Real norm_h = 0;
  Real norm_t = 0;
  Real u = unit_roundoff<Real>();
  Real u_s = smallest_positive<Real>();
};

template <typename Real>
DeflationPolicy<Real> make_policy(FiniteCriterion finite, InfiniteCriterion infinite,
                                  const Pencil<Real>& p) {
  return {finite, infinite, frobenius_norm(p.h), frobenius_norm(p.t), unit_roundoff<Real>(),
          smallest_positive<Real>()};
}

/// The 2x2 subpencil around a subdiagonal entry:
///   H_i = [h_pp h_pq; h_qp h_qq],  T_i = [t_pp t_pq; 0 t_qq]
/// with p = i-1, q = i.
template <typename Real>
struct SubdiagonalSite {
  Complex<Real> h_pp, h_pq, h_qp, h_qq;
  Complex<Real> t_pp, t_pq, t_qq;
};

template <typename Real>
SubdiagonalSite<Real> subdiagonal_site(const Pencil<Real>& p, index_t i) {
  if (i == 0 || i >= p.size()) throw std::out_of_range("finite deflation site out of range");
  const auto& h = p.h;
  const auto& t = p.t;
  return {h(i - 1, i - 1), h(i - 1, i), h(i, i - 1), h(i, i), t(i - 1, i - 1), t(i - 1, i), t(i, i)};
}

/// Diagonal entry of T and its two superdiagonal neighbours t(i-1, i), t(i, i+1);
/// neighbours outside the matrix are zero.
template <typename Real>
struct DiagonalSite {
  Complex<Real> t_ii, t_left, t_right;
};

template <typename Real>
DiagonalSite<Real> diagonal_site(const Pencil<Real>& p, index_t i) {
  if (i >= p.size()) throw std::out_of_range("infinite deflation site out of range");
  const auto& t = p.t;
  DiagonalSite<Real> s{t(i, i), {}, {}};
  if (i > 0) s.t_left = t(i - 1, i);
  if (i + 1 < p.size()) s.t_right = t(i, i + 1);
  return s;
}

// ---------------------------------------------------------------------------
// Eigenvalue sensitivities of the 2x2 subpencil with respect to eps = h_qp.
// ---------------------------------------------------------------------------

/// d lambda / d eps at eps = 0 for the eigenvalue nearest h_qq / t_qq:
///   -(h_pq t_qq - h_qq t_pq) / (t_qq (h_pp t_qq - h_qq t_pp))
/// Only the modulus enters the deflation test.
template <typename Real>
Complex<Real> lambda_prime(const SubdiagonalSite<Real>& s) {
  const auto gap = s.h_pp * s.t_qq - s.h_qq * s.t_pp;
  const auto den = s.t_qq * gap;
  if (den == Complex<Real>{}) throw SingularSensitivityError("lambda_prime: zero denominator");
  return -(s.h_pq * s.t_qq - s.h_qq * s.t_pq) / den;
}

/// Same for the eigenvalue nearest h_pp / t_pp:
///   -(h_pp t_pq - h_pq t_pp) / (t_pp (h_pp t_qq - h_qq t_pp))
template <typename Real>
Complex<Real> lambda_bar_prime(const SubdiagonalSite<Real>& s) {
  const auto gap = s.h_pp * s.t_qq - s.h_qq * s.t_pp;
  const auto den = s.t_pp * gap;
  if (den == Complex<Real>{})
    throw SingularSensitivityError("lambda_bar_prime: zero denominator");
  return -(s.h_pp * s.t_pq - s.h_pq * s.t_pp) / den;
}

template <typename Real>
Complex<Real> lambda_prime(const HtForm<Real>& ht, index_t i) {
  return lambda_prime(subdiagonal_site(ht.pencil, i));
}

template <typename Real>
Complex<Real> lambda_bar_prime(const HtForm<Real>& ht, index_t i) {
  return lambda_bar_prime(subdiagonal_site(ht.pencil, i));
}

// ---------------------------------------------------------------------------
// Predicates
// ---------------------------------------------------------------------------

template <typename Real>
bool normwise_small(const SubdiagonalSite<Real>& s, const DeflationPolicy<Real>& pol) {
  return std::abs(s.h_qp) <= pol.u * pol.norm_h;
}

template <typename Real>
bool elementwise_small(const SubdiagonalSite<Real>& s, const DeflationPolicy<Real>& pol) {
  return std::abs(s.h_qp) <= pol.u * (std::abs(s.h_pp) + std::abs(s.h_qq));
}

/// |h_pq t_qq - h_qq t_pq| |h_qp| <= u |h_qq| |h_pp t_qq - h_qq t_pp|, evaluated
/// without divisions.
template <typename Real>
bool eigenvalue_perturbation_small(const SubdiagonalSite<Real>& s,
                                   const DeflationPolicy<Real>& pol) {
  const Real lhs = std::abs(s.h_pq * s.t_qq - s.h_qq * s.t_pq) * std::abs(s.h_qp);
  const Real rhs = pol.u * std::abs(s.h_qq) * std::abs(s.h_pp * s.t_qq - s.h_qq * s.t_pp);
  return lhs <= rhs;
}

template <typename Real>
bool finite_deflatable(const SubdiagonalSite<Real>& s, const DeflationPolicy<Real>& pol) {
  switch (pol.finite) {
    case FiniteCriterion::normwise: return normwise_small(s, pol);
    case FiniteCriterion::elementwise: return elementwise_small(s, pol);
    case FiniteCriterion::strict:
      // The elementwise test bounds the backward error; the second test
      // bounds the first-order change of the eigenvalue.
      return elementwise_small(s, pol) && eigenvalue_perturbation_small(s, pol);
  }
  return false;
}

template <typename Real>
bool finite_deflatable(const HtForm<Real>& ht, index_t i, const DeflationPolicy<Real>& pol) {
  return finite_deflatable(subdiagonal_site(ht.pencil, i), pol);
}

template <typename Real>
bool infinite_deflatable(const DiagonalSite<Real>& s, const DeflationPolicy<Real>& pol) {
  const Real t = std::abs(s.t_ii);
  switch (pol.infinite) {
    case InfiniteCriterion::normwise: return t <= pol.u * pol.norm_t;
    case InfiniteCriterion::elementwise:
      return t <= pol.u * (std::abs(s.t_left) + std::abs(s.t_right));
    case InfiniteCriterion::ultra_strict: return t < pol.u_s;
  }
  return false;
}

template <typename Real>
bool infinite_deflatable(const HtForm<Real>& ht, index_t i, const DeflationPolicy<Real>& pol) {
  return infinite_deflatable(diagonal_site(ht.pencil, i), pol);
}

}  // namespace qzdefl
