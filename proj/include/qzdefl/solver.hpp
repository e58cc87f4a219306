#pragma once

// Complex single-shift QZ iteration with pluggable deflation criteria.
//
// The iteration works on an active window [lo, hi] (0-based, inclusive) at
// the bottom of the still-unreduced part of the pencil. Each outer step
//   1. scans the window bottom-up for a finite deflation and splits there,
//   2. scans the window for a diagonal entry of T that should be treated as
//      an infinite eigenvalue and chases it out at the bottom,
//   3. otherwise performs one implicit single-shift bulge chase.

#include <algorithm>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qzdefl/core.hpp"
#include "qzdefl/deflation.hpp"
#include "qzdefl/pencil.hpp"
#include "qzdefl/reduction.hpp"

namespace qzdefl {

struct SingularPencilError : std::domain_error {
  using std::domain_error::domain_error;
};

struct QzConfig {
  FiniteCriterion finite = FiniteCriterion::strict;
  InfiniteCriterion infinite = InfiniteCriterion::normwise;
  index_t max_iterations_per_eigenvalue = 30;
  bool accumulate_qz = false;
  /// Start a sweep below two consecutive small subdiagonal entries when the
  /// coupling they represent is negligible (xHGEQZ behaviour, see sweep_start).
  bool early_sweep_start = true;
  /// Record every deflation together with the local entries it was decided on.
  bool log_deflations = false;
};

struct QzStatus {
  enum class Kind { converged, failed };
  Kind kind = Kind::converged;
  index_t failed_at = 0;

  bool converged() const noexcept { return kind == Kind::converged; }
  static QzStatus ok() noexcept { return {}; }
  static QzStatus failure(index_t i) noexcept { return {Kind::failed, i}; }
};

template <typename Real>
struct DeflationEvent {
  enum class Kind { finite, infinite };
  Kind kind = Kind::finite;
  index_t index = 0;
  SubdiagonalSite<Real> site{};   // valid for finite events
  DiagonalSite<Real> diagonal{};  // valid for infinite events
};

template <typename Real>
struct QzOutcome {
  std::vector<EigPair<Real>> eigenvalues;
  index_t total_iterations = 0;
  QzStatus status;
  HtForm<Real> final_form;
  DeflationPolicy<Real> policy;
  std::vector<DeflationEvent<Real>> deflations;

  const std::optional<Matrix<Real>>& q() const noexcept { return final_form.q; }
  const std::optional<Matrix<Real>>& z() const noexcept { return final_form.z; }
  index_t infinite_count() const { return count_infinite(eigenvalues); }
};

// ---------------------------------------------------------------------------
// 2x2 eigenvalues
// ---------------------------------------------------------------------------

/// Both roots of det(beta*H2 - alpha*T2) = 0 for an upper-triangular T2,
/// as normalized pairs. Infinite roots carry beta == 0 exactly.
template <typename Real>
std::pair<EigPair<Real>, EigPair<Real>> eig2x2(Complex<Real> h00, Complex<Real> h01,
                                               Complex<Real> h10, Complex<Real> h11,
                                               Complex<Real> t00, Complex<Real> t01,
                                               Complex<Real> t11) {
  using C = Complex<Real>;
  const Real sh = std::max({std::abs(h00), std::abs(h01), std::abs(h10), std::abs(h11)});
  const Real st = std::max({std::abs(t00), std::abs(t01), std::abs(t11)});
  const Real ih = sh > Real(0) ? Real(1) / sh : Real(1);
  const Real it = st > Real(0) ? Real(1) / st : Real(1);
  h00 *= ih, h01 *= ih, h10 *= ih, h11 *= ih;
  t00 *= it, t01 *= it, t11 *= it;

  // a alpha^2 + b alpha beta + c beta^2 = 0
  const C a = t00 * t11;
  const C b = -(h00 * t11 + h11 * t00 - h10 * t01);
  const C c = h00 * h11 - h01 * h10;
  if (a == C{} && b == C{} && c == C{})
    throw SingularPencilError("eig2x2: det(beta H - alpha T) vanishes identically");

  C disc = std::sqrt(b * b - Real(4) * a * c);
  if ((std::conj(b) * disc).real() < Real(0)) disc = -disc;
  const C q = -(b + disc) / Real(2);

  EigPair<Real> r1, r2;
  if (q == C{}) {
    // b == 0 and a*c == 0: a double root at zero or at infinity.
    r1 = a != C{} ? EigPair<Real>{C{}, C(1)} : EigPair<Real>{C(1), C{}};
    r2 = r1;
  } else {
    r1 = {q, a};
    r2 = {c, q};
  }
  // Undo the separate scalings of H and T: (alpha, beta) -> (alpha sh, beta st).
  auto unscale = [&](EigPair<Real> e) {
    e.alpha *= sh > Real(0) ? sh : Real(1);
    e.beta *= st > Real(0) ? st : Real(1);
    const Real m = std::max(std::abs(e.alpha), std::abs(e.beta));
    if (m > Real(0) && std::isfinite(m)) e.alpha /= m, e.beta /= m;
    return e.normalized();
  };
  return {unscale(r1), unscale(r2)};
}

template <typename Real>
std::pair<EigPair<Real>, EigPair<Real>> eig2x2(const Matrix<Real>& h2, const Matrix<Real>& t2) {
  if (h2.rows() != 2 || h2.cols() != 2 || t2.rows() != 2 || t2.cols() != 2)
    throw DimensionError("eig2x2 expects 2x2 matrices");
  return eig2x2(h2(0, 0), h2(0, 1), h2(1, 0), h2(1, 1), t2(0, 0), t2(0, 1), t2(1, 1));
}

// ---------------------------------------------------------------------------
// Shifts
// ---------------------------------------------------------------------------

/// h(hi,hi)/t(hi,hi) + h(hi,hi-1)/t(hi-1,hi-1), written as a pair.
template <typename Real>
EigPair<Real> exceptional_shift(const HtForm<Real>& ht, index_t hi) {
  const auto& h = ht.h();
  const auto& t = ht.t();
  EigPair<Real> e{h(hi, hi) * t(hi - 1, hi - 1) + h(hi, hi - 1) * t(hi, hi),
                  t(hi, hi) * t(hi - 1, hi - 1)};
  if (e.is_infinite()) e = {h(hi, hi) + h(hi, hi - 1), Complex<Real>(1)};
  return e.normalized();
}

/// Eigenvalue of the trailing 2x2 subpencil of the window closest (chordally)
/// to the corner pair (h(hi,hi), t(hi,hi)). Infinite roots are never returned.
template <typename Real>
EigPair<Real> wilkinson_shift(const HtForm<Real>& ht, index_t lo, index_t hi) {
  if (hi <= lo) throw std::invalid_argument("wilkinson_shift: window must have size >= 2");
  const auto& h = ht.h();
  const auto& t = ht.t();
  const index_t p = hi - 1;
  const auto [r1, r2] =
      eig2x2(h(p, p), h(p, hi), h(hi, p), h(hi, hi), t(p, p), t(p, hi), t(hi, hi));
  const EigPair<Real> corner{h(hi, hi), t(hi, hi)};
  const bool first = chordal_distance(r1, corner) <= chordal_distance(r2, corner);
  const auto& near = first ? r1 : r2;
  const auto& far = first ? r2 : r1;
  if (!near.is_infinite()) return near;
  if (!far.is_infinite()) return far;
  return exceptional_shift(ht, hi);
}

/// First row of the sweep. Returns the largest j in (lo, hi-1] with
///   |h(j,j-1)| |h(j+1,j)| <= tol |h(j,j) - shift t(j,j)|,
/// so that a bulge introduced at row j does not need to pass h(j,j-1).
/// tol is u*||H||_F for the normwise criterion and the local scale
/// u*(|h(j-1,j-1)| + |h(j,j)|) otherwise; a normwise tolerance here would
/// undo the elementwise and strict tests on graded pencils.
template <typename Real>
index_t sweep_start(const HtForm<Real>& ht, index_t lo, index_t hi, const EigPair<Real>& shift,
                    const DeflationPolicy<Real>& pol) {
  if (hi < lo + 2 || shift.is_infinite()) return lo;
  const auto& h = ht.h();
  const auto& t = ht.t();
  const Real tiny = std::numeric_limits<Real>::min();
  const Real ascale = Real(1) / std::max(tiny, pol.norm_h);
  const Real atol = std::max(tiny, pol.u * pol.norm_h);
  const Complex<Real> lambda = shift.alpha / shift.beta;
  for (index_t j = hi - 1; j > lo; --j) {
    Real temp = ascale * std::abs(h(j, j) - lambda * t(j, j));
    Real temp2 = ascale * std::abs(h(j + 1, j));
    const Real tempr = std::max(temp, temp2);
    if (tempr < Real(1) && tempr != Real(0)) {
      temp /= tempr;
      temp2 /= tempr;
    }
    Real tol = atol;
    if (pol.finite != FiniteCriterion::normwise)
      tol = std::max(tiny, pol.u * (std::abs(h(j - 1, j - 1)) + std::abs(h(j, j))));
    if (std::abs(h(j, j - 1)) * temp2 <= temp * tol) return j;
  }
  return lo;
}

// ---------------------------------------------------------------------------
// Sweeps and infinite deflation
// ---------------------------------------------------------------------------

namespace detail {

template <typename Real>
void left(HtForm<Real>& ht, const GivensRotation<Real>& g, index_t h_from, index_t t_from) {
  const index_t n = ht.size();
  rotate_rows(ht.h(), g, h_from, n);
  rotate_rows(ht.t(), g, t_from, n);
  if (ht.q) rotate_cols(*ht.q, g.conj(), 0, n);
}

template <typename Real>
void right(HtForm<Real>& ht, const GivensRotation<Real>& g, index_t h_rows, index_t t_rows) {
  rotate_cols(ht.h(), g, 0, h_rows);
  rotate_cols(ht.t(), g, 0, t_rows);
  if (ht.z) rotate_cols(*ht.z, g, 0, ht.size());
}

}  // namespace detail

/// One implicit single-shift QZ sweep over rows/columns [lo, hi].
/// Returns the number of sweeps performed (always 1).
template <typename Real>
index_t single_shift_sweep(HtForm<Real>& ht, index_t lo, index_t hi, const EigPair<Real>& shift) {
  using C = Complex<Real>;
  if (hi <= lo) return 0;
  auto& h = ht.h();
  auto& t = ht.t();

  const Real m = std::hypot(std::abs(shift.alpha), std::abs(shift.beta));
  const C alpha = shift.alpha / m;
  const C beta = shift.beta / m;

  // Bulge introduction: first column of beta H - alpha T.
  {
    const auto g = compute_givens(beta * h(lo, lo) - alpha * t(lo, lo), beta * h(lo + 1, lo),
                                  lo, lo + 1);
    detail::left(ht, g.rotation, lo, lo);
  }

  for (index_t k = lo; k < hi; ++k) {
    if (k > lo) {
      const auto g = compute_givens(h(k, k - 1), h(k + 1, k - 1), k, k + 1);
      detail::left(ht, g.rotation, k - 1, k);
      h(k, k - 1) = g.r;
      h(k + 1, k - 1) = C{};
    }
    const auto g = compute_givens(t(k + 1, k + 1), t(k + 1, k), k + 1, k);
    detail::right(ht, g.rotation, std::min(k + 3, hi + 1), k + 1);
    t(k + 1, k + 1) = g.r;
    t(k + 1, k) = C{};
  }
  return 1;
}

/// Sets t(i,i) to zero, chases the zero down to t(hi,hi) and splits off a
/// 1x1 block with beta = 0 at hi by zeroing h(hi, hi-1).
template <typename Real>
void deflate_infinite(HtForm<Real>& ht, index_t lo, index_t hi, index_t i) {
  using C = Complex<Real>;
  if (i < lo || i > hi) throw std::out_of_range("deflate_infinite: index outside window");
  auto& h = ht.h();
  auto& t = ht.t();
  t(i, i) = C{};
  for (index_t k = i; k < hi; ++k) {
    const auto gl = compute_givens(t(k, k + 1), t(k + 1, k + 1), k, k + 1);
    detail::left(ht, gl.rotation, k > 0 ? k - 1 : 0, k + 2);
    t(k, k + 1) = gl.r;
    t(k + 1, k + 1) = C{};
    if (k > lo) {
      const auto gr = compute_givens(h(k + 1, k), h(k + 1, k - 1), k, k - 1);
      detail::right(ht, gr.rotation, k + 1, k + 1);
      h(k + 1, k) = gr.r;
      h(k + 1, k - 1) = C{};
    }
  }
  if (hi > lo) {
    const auto gr = compute_givens(h(hi, hi), h(hi, hi - 1), hi, hi - 1);
    detail::right(ht, gr.rotation, hi, hi);
    h(hi, hi) = gr.r;
    h(hi, hi - 1) = C{};
  }
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

template <typename Real>
QzOutcome<Real> qz_iterate(HtForm<Real> ht, const QzConfig& config) {
  using C = Complex<Real>;
  if (config.max_iterations_per_eigenvalue < 1)
    throw std::invalid_argument("max_iterations_per_eigenvalue must be >= 1");
  ht.pencil.validate();
  if (!is_hessenberg_triangular(ht.pencil))
    throw std::invalid_argument("qz_iterate: pencil is not in Hessenberg-triangular form");

  const index_t n = ht.size();
  if (config.accumulate_qz) {
    if (!ht.q) ht.q = Matrix<Real>::identity(n);
    if (!ht.z) ht.z = Matrix<Real>::identity(n);
  }

  QzOutcome<Real> out;
  out.policy = make_policy(config.finite, config.infinite, ht.pencil);
  const auto& pol = out.policy;
  auto& h = ht.h();
  auto& t = ht.t();

  auto log_finite = [&](index_t j) {
    if (config.log_deflations)
      out.deflations.push_back({DeflationEvent<Real>::Kind::finite, j,
                                subdiagonal_site(ht.pencil, j), {}});
  };
  auto log_infinite = [&](index_t j) {
    if (config.log_deflations)
      out.deflations.push_back({DeflationEvent<Real>::Kind::infinite, j, {},
                                diagonal_site(ht.pencil, j)});
  };

  // hi is kept one past the active bottom row so the loop can reach zero.
  index_t end = n;
  index_t since_deflation = 0;
  while (end > 0) {
    const index_t hi = end - 1;

    index_t lo = 0;
    for (index_t j = hi; j >= 1; --j) {
      if (h(j, j - 1) == C{}) {
        lo = j;
        break;
      }
      if (finite_deflatable(ht, j, pol)) {
        log_finite(j);
        h(j, j - 1) = C{};
        lo = j;
        break;
      }
    }

    if (lo == hi) {
      if (t(hi, hi) != C{} && infinite_deflatable(ht, hi, pol)) {
        log_infinite(hi);
        t(hi, hi) = C{};
      }
      --end;
      since_deflation = 0;
      continue;
    }

    bool split_infinite = false;
    for (index_t j = end; j-- > lo;) {
      if (infinite_deflatable(ht, j, pol)) {
        log_infinite(j);
        deflate_infinite(ht, lo, hi, j);
        split_infinite = true;
        break;
      }
    }
    if (split_infinite) {
      --end;
      since_deflation = 0;
      continue;
    }

    if (since_deflation >= config.max_iterations_per_eigenvalue * (hi - lo + 1)) {
      out.status = QzStatus::failure(hi);
      break;
    }

    const bool exceptional = since_deflation > 0 && since_deflation % 10 == 0;
    const auto shift = exceptional ? exceptional_shift(ht, hi) : wilkinson_shift(ht, lo, hi);
    const index_t start = config.early_sweep_start ? sweep_start(ht, lo, hi, shift, pol) : lo;
    out.total_iterations += single_shift_sweep(ht, start, hi, shift);
    ++since_deflation;
  }

  out.eigenvalues.reserve(n);
  for (index_t i = 0; i < n; ++i)
    out.eigenvalues.push_back(EigPair<Real>{h(i, i), t(i, i)}.normalized());
  out.final_form = std::move(ht);
  return out;
}

/// Reduction to Hessenberg-triangular form followed by the QZ iteration.
template <typename Real>
QzOutcome<Real> solve(const Pencil<Real>& p, const QzConfig& config) {
  if (!all_finite(p.h) || !all_finite(p.t))
    throw std::invalid_argument("solve: pencil has non-finite entries");
  return qz_iterate(hessenberg_triangular(p, config.accumulate_qz), config);
}

}  // namespace qzdefl
