#pragma once

#include <cmath>
#include <cstdint>

#include "qzdefl/qzdefl.hpp"

namespace qztest {

using namespace qzdefl;

/// Random pencil with entries uniform on the complex unit square.
template <typename Real = double>
Pencil<Real> random_pencil(index_t n, std::uint64_t seed) {
  CounterStream rng(seed);
  auto a = random_matrix(n, n, rng);
  auto b = random_matrix(n, n, rng);
  return Pencil<double>(std::move(a), std::move(b)).template cast<Real>();
}

/// Random pencil already in Hessenberg-triangular form.
template <typename Real = double>
HtForm<Real> random_ht(index_t n, std::uint64_t seed) {
  CounterStream rng(seed);
  Matrix<double> h(n, n), t(n, n);
  for (index_t j = 0; j < n; ++j)
    for (index_t i = 0; i < n; ++i) {
      if (i <= j + 1) h(i, j) = rng.uniform_complex();
      if (i <= j) t(i, j) = rng.uniform_complex();
    }
  for (index_t i = 0; i < n; ++i) t(i, i) += Complex<double>(t(i, i).real() >= 0 ? 0.5 : -0.5);
  return HtForm<Real>{Pencil<double>(h, t).template cast<Real>(), std::nullopt, std::nullopt};
}

template <typename Real>
bool is_schur_form(const Pencil<Real>& p) {
  for (index_t j = 0; j < p.size(); ++j)
    for (index_t i = j + 1; i < p.size(); ++i)
      if (p.h(i, j) != Complex<Real>{} || p.t(i, j) != Complex<Real>{}) return false;
  return true;
}

template <typename Real>
double unitarity_error(const Matrix<Real>& q) {
  const auto qd = q.template cast<double>();
  return frobenius_norm(adjoint(qd) * qd - Matrix<double>::identity(q.rows()));
}

/// Largest chordal distance after greedy matching.
template <typename Real>
double max_chordal(const std::vector<EigPair<Real>>& computed,
                   const std::vector<EigPair<double>>& reference) {
  const auto rep = match_and_error(computed, reference);
  double worst = 0;
  for (index_t r = 0; r < reference.size(); ++r)
    worst = std::max(worst, chordal_distance(computed[rep.match[r]].template cast<double>(),
                                             reference[r]));
  return worst;
}

}  // namespace qztest
