#pragma once

// Direct reduction of a general pencil (A, B) to Hessenberg-triangular form.

#include <optional>

#include "qzdefl/core.hpp"
#include "qzdefl/pencil.hpp"

namespace qzdefl {

/// Upper-triangularizes `r` in place by Givens rotations and returns the
/// unitary factor, r_in = q * r_out. Below-diagonal entries are stored as
/// exact zeros.
template <typename Real>
Matrix<Real> givens_qr(Matrix<Real>& r) {
  const index_t m = r.rows();
  const index_t n = r.cols();
  auto q = Matrix<Real>::identity(m);
  for (index_t j = 0; j < std::min(m, n); ++j) {
    for (index_t i = m - 1; i > j; --i) {
      if (r(i, j) == Complex<Real>{}) continue;
      const auto g = compute_givens(r(i - 1, j), r(i, j), i - 1, i);
      rotate_rows(r, g.rotation, j, n);
      r(i - 1, j) = g.r;
      r(i, j) = Complex<Real>{};
      rotate_cols(q, g.rotation.conj(), 0, m);
    }
  }
  return q;
}

/// Moler-Stewart reduction: triangularize B, then sweep A to Hessenberg form
/// column by column while restoring the triangularity of B after each
/// left rotation.
template <typename Real>
HtForm<Real> hessenberg_triangular(const Pencil<Real>& p, bool accumulate) {
  p.validate();
  const index_t n = p.size();
  HtForm<Real> out{p, std::nullopt, std::nullopt};
  auto& a = out.pencil.h;
  auto& b = out.pencil.t;
  if (accumulate) {
    out.q = Matrix<Real>::identity(n);
    out.z = Matrix<Real>::identity(n);
  }
  if (n < 2) return out;

  for (index_t j = 0; j + 1 < n; ++j) {
    for (index_t i = n - 1; i > j; --i) {
      if (b(i, j) == Complex<Real>{}) continue;
      const auto g = compute_givens(b(i - 1, j), b(i, j), i - 1, i);
      rotate_rows(b, g.rotation, j, n);
      b(i - 1, j) = g.r;
      b(i, j) = Complex<Real>{};
      rotate_rows(a, g.rotation, 0, n);
      if (out.q) rotate_cols(*out.q, g.rotation.conj(), 0, n);
    }
  }

  for (index_t j = 0; j + 2 < n; ++j) {
    for (index_t i = n - 1; i >= j + 2; --i) {
      if (a(i, j) == Complex<Real>{}) continue;
      // Left rotation on rows (i-1, i) annihilates a(i, j) ...
      const auto gl = compute_givens(a(i - 1, j), a(i, j), i - 1, i);
      rotate_rows(a, gl.rotation, j, n);
      a(i - 1, j) = gl.r;
      a(i, j) = Complex<Real>{};
      rotate_rows(b, gl.rotation, i - 1, n);
      if (out.q) rotate_cols(*out.q, gl.rotation.conj(), 0, n);

      // ... and fills b(i, i-1), removed by a column rotation on (i, i-1).
      const auto gr = compute_givens(b(i, i), b(i, i - 1), i, i - 1);
      rotate_cols(b, gr.rotation, 0, i);
      b(i, i) = gr.r;
      b(i, i - 1) = Complex<Real>{};
      rotate_cols(a, gr.rotation, 0, n);
      if (out.z) rotate_cols(*out.z, gr.rotation, 0, n);
    }
  }
  return out;
}

}  // namespace qzdefl
