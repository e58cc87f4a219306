#pragma once

// Reference oracles, eigenvalue matching and accuracy statistics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qzdefl/core.hpp"
#include "qzdefl/pencil.hpp"

namespace qzdefl {

struct OracleFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Dense LU with partial pivoting (binary64), used by the oracles only.
// ---------------------------------------------------------------------------

class LuFactorization {
 public:
  explicit LuFactorization(Matrix<double> a) : lu_(std::move(a)), piv_(lu_.rows()) {
    if (!lu_.is_square()) throw DimensionError("LU: matrix must be square");
    const index_t n = lu_.rows();
    for (index_t k = 0; k < n; ++k) {
      index_t p = k;
      double best = std::abs(lu_(k, k));
      for (index_t i = k + 1; i < n; ++i)
        if (std::abs(lu_(i, k)) > best) best = std::abs(lu_(i, k)), p = i;
      piv_[k] = p;
      if (p != k) {
        sign_ = -sign_;
        for (index_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
      }
      if (lu_(k, k) == Complex<double>{}) {
        singular_ = true;
        continue;
      }
      for (index_t i = k + 1; i < n; ++i) {
        const auto l = lu_(i, k) / lu_(k, k);
        lu_(i, k) = l;
        for (index_t j = k + 1; j < n; ++j) lu_(i, j) -= l * lu_(k, j);
      }
    }
  }

  bool singular() const noexcept { return singular_; }

  Complex<double> determinant() const {
    Complex<double> d(sign_);
    for (index_t i = 0; i < lu_.rows(); ++i) d *= lu_(i, i);
    return d;
  }

  /// Solves A x = b (adjoint == false) or A^H x = b (adjoint == true).
  std::vector<Complex<double>> solve(std::vector<Complex<double>> b, bool adjoint = false) const {
    const index_t n = lu_.rows();
    if (singular_) throw OracleFailure("LU: singular matrix");
    if (!adjoint) {
      for (index_t k = 0; k < n; ++k) std::swap(b[k], b[piv_[k]]);
      for (index_t i = 0; i < n; ++i)
        for (index_t j = 0; j < i; ++j) b[i] -= lu_(i, j) * b[j];
      for (index_t i = n; i-- > 0;) {
        for (index_t j = i + 1; j < n; ++j) b[i] -= lu_(i, j) * b[j];
        b[i] /= lu_(i, i);
      }
    } else {
      // A^H = U^H L^H P
      for (index_t i = 0; i < n; ++i) {
        for (index_t j = 0; j < i; ++j) b[i] -= std::conj(lu_(j, i)) * b[j];
        b[i] /= std::conj(lu_(i, i));
      }
      for (index_t i = n; i-- > 0;)
        for (index_t j = i + 1; j < n; ++j) b[i] -= std::conj(lu_(j, i)) * b[j];
      for (index_t k = n; k-- > 0;) std::swap(b[k], b[piv_[k]]);
    }
    return b;
  }

 private:
  Matrix<double> lu_;
  std::vector<index_t> piv_;
  double sign_ = 1.0;
  bool singular_ = false;
};

namespace detail {

inline double vec_norm(const std::vector<Complex<double>>& v) {
  double s = 0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

inline std::vector<Complex<double>> mat_vec(const Matrix<double>& m,
                                            const std::vector<Complex<double>>& x,
                                            bool adjoint = false) {
  std::vector<Complex<double>> y(adjoint ? m.cols() : m.rows());
  for (index_t j = 0; j < m.cols(); ++j)
    for (index_t i = 0; i < m.rows(); ++i) {
      if (adjoint)
        y[j] += std::conj(m(i, j)) * x[i];
      else
        y[i] += m(i, j) * x[j];
    }
  return y;
}

inline std::vector<Complex<double>> start_vector(index_t n) {
  std::vector<Complex<double>> x(n);
  for (index_t i = 0; i < n; ++i)
    x[i] = {1.0 + 0.37 * double(i % 7), 0.25 * double(i % 3) - 0.2};
  const double s = vec_norm(x);
  for (auto& v : x) v /= s;
  return x;
}

}  // namespace detail

/// Largest singular value by power iteration on M^H M (a lower bound that
/// converges from below).
inline double norm2_estimate(const Matrix<double>& m, int iterations = 200) {
  auto x = detail::start_vector(m.cols());
  double sigma = 0;
  for (int it = 0; it < iterations; ++it) {
    auto y = detail::mat_vec(m, detail::mat_vec(m, x), true);
    const double ny = detail::vec_norm(y);
    if (ny == 0.0) return 0.0;
    const double next = std::sqrt(ny);
    for (auto& v : y) v /= ny;
    x = std::move(y);
    if (std::abs(next - sigma) <= 1e-15 * next) {
      sigma = next;
      break;
    }
    sigma = next;
  }
  return detail::vec_norm(detail::mat_vec(m, x));
}

/// The `count` smallest singular values of a square matrix by inverse subspace
/// iteration on (M^H M)^{-1}, each via two triangular solve sweeps.
inline std::vector<double> smallest_singular_values(const Matrix<double>& m, index_t count,
                                                    int iterations = 100) {
  const index_t n = m.rows();
  LuFactorization lu(m);
  if (lu.singular()) return std::vector<double>(count, 0.0);
  std::vector<std::vector<Complex<double>>> basis;
  for (index_t k = 0; k < count; ++k) {
    auto x = detail::start_vector(n);
    x[k % n] += 1.0;
    basis.push_back(std::move(x));
  }
  auto orthonormalize = [&] {
    for (index_t k = 0; k < count; ++k) {
      for (int pass = 0; pass < 2; ++pass)
        for (index_t j = 0; j < k; ++j) {
          Complex<double> d{};
          for (index_t i = 0; i < n; ++i) d += std::conj(basis[j][i]) * basis[k][i];
          for (index_t i = 0; i < n; ++i) basis[k][i] -= d * basis[j][i];
        }
      const double s = detail::vec_norm(basis[k]);
      for (auto& v : basis[k]) v /= s;
    }
  };
  orthonormalize();
  for (int it = 0; it < iterations; ++it) {
    for (auto& x : basis) x = lu.solve(lu.solve(std::move(x), true));
    orthonormalize();
  }
  std::vector<double> sv;
  for (const auto& x : basis) sv.push_back(detail::vec_norm(detail::mat_vec(m, x)));
  std::sort(sv.begin(), sv.end());
  return sv;
}

inline double smallest_singular_value(const Matrix<double>& m) {
  return smallest_singular_values(m, 1).front();
}

// ---------------------------------------------------------------------------
// Characteristic-polynomial oracle
// ---------------------------------------------------------------------------

namespace detail {

inline Matrix<double> shifted(const Pencil<double>& p, Complex<double> z) {
  Matrix<double> m = p.h;
  for (index_t j = 0; j < m.cols(); ++j)
    for (index_t i = 0; i < m.rows(); ++i) m(i, j) -= z * p.t(i, j);
  return m;
}

/// p(z) / p'(z) for p(z) = det(H - zT), via p'/p = -trace((H - zT)^{-1} T).
inline std::optional<Complex<double>> newton_ratio(const Pencil<double>& p, Complex<double> z) {
  const index_t n = p.size();
  LuFactorization lu(shifted(p, z));
  if (lu.singular()) return Complex<double>{};
  Complex<double> trace{};
  for (index_t j = 0; j < n; ++j) {
    std::vector<Complex<double>> col(p.t.column(j).begin(), p.t.column(j).end());
    trace += lu.solve(std::move(col))[j];
  }
  if (trace == Complex<double>{}) return std::nullopt;
  return -Complex<double>(1.0) / trace;
}

template <typename Ratio>
void aberth(std::vector<Complex<double>>& z, Ratio ratio, int max_iterations, double tol) {
  const index_t d = z.size();
  for (int it = 0; it < max_iterations; ++it) {
    double worst = 0;
    for (index_t k = 0; k < d; ++k) {
      const auto w = ratio(z[k]);
      if (!w) continue;
      if (*w == Complex<double>{}) continue;
      Complex<double> s{};
      for (index_t j = 0; j < d; ++j)
        if (j != k) s += 1.0 / (z[k] - z[j]);
      const auto step = *w / (1.0 - *w * s);
      z[k] -= step;
      worst = std::max(worst, std::abs(step) / std::max(1.0, std::abs(z[k])));
    }
    if (worst <= tol) return;
  }
}

}  // namespace detail

/// Eigenvalues as roots of det(H - zT): the determinant is sampled on a circle
/// of n+1 points, the polynomial interpolated, its roots found by Aberth-Ehrlich
/// iteration and then refined with Aberth steps on the exact determinant.
/// A degree deficiency d yields d infinite pairs.
inline std::vector<EigPair<double>> brute_force_eigs(const Pencil<double>& p,
                                                     std::optional<double> radius = {}) {
  using C = Complex<double>;
  p.validate();
  const index_t n = p.size();
  if (n > 12) throw std::invalid_argument("brute_force_eigs: oracle limited to n <= 12");
  if (n == 0) return {};
  const double nh = frobenius_norm(p.h), nt = frobenius_norm(p.t);
  double rho = radius.value_or(nt > 0 && nh > 0 ? nh / nt : 1.0);
  if (!(rho > 0) || !std::isfinite(rho)) throw OracleFailure("degenerate sample radius");

  const index_t samples = n + 1;
  std::vector<C> values(samples), coeff(samples);
  for (index_t k = 0; k < samples; ++k) {
    const C z = std::polar(rho, 2.0 * std::numbers::pi * double(k) / double(samples));
    values[k] = LuFactorization(detail::shifted(p, z)).determinant();
    if (!std::isfinite(values[k].real()) || !std::isfinite(values[k].imag()))
      throw OracleFailure("non-finite determinant sample");
  }
  // coefficients of q(w) = p(rho w): inverse DFT over the roots of unity
  for (index_t j = 0; j < samples; ++j) {
    C s{};
    for (index_t k = 0; k < samples; ++k)
      s += values[k] * std::polar(1.0, -2.0 * std::numbers::pi * double(j * k) / double(samples));
    coeff[j] = s / double(samples);
  }
  double cmax = 0;
  for (const auto& c : coeff) cmax = std::max(cmax, std::abs(c));
  if (cmax == 0.0) throw OracleFailure("determinant vanishes identically (singular pencil)");

  index_t degree = n;
  while (degree > 0 && std::abs(coeff[degree]) <= 1e-11 * cmax) --degree;

  std::vector<C> roots(degree);
  for (index_t k = 0; k < degree; ++k)
    roots[k] = std::polar(1.0, 2.0 * std::numbers::pi * (double(k) + 0.25) / double(degree));
  auto poly_ratio = [&](C w) -> std::optional<C> {
    C val = coeff[degree], der{};
    for (index_t j = degree; j-- > 0;) {
      der = der * w + val;
      val = val * w + coeff[j];
    }
    if (der == C{}) return std::nullopt;
    return val / der;
  };
  detail::aberth(roots, poly_ratio, 500, 1e-15);
  for (auto& r : roots) r *= rho;
  detail::aberth(roots, [&](C z) { return detail::newton_ratio(p, z); }, 50, 1e-16);

  std::vector<EigPair<double>> out;
  for (const auto& r : roots) out.push_back({r, 1.0});
  for (index_t k = degree; k < n; ++k) out.push_back({1.0, 0.0});
  return out;
}

// ---------------------------------------------------------------------------
// Matching and accuracy
// ---------------------------------------------------------------------------

struct AccuracyReport {
  double max_relative_error = 0;
  double accurate_digits = 0;
  /// Relative error per reference eigenvalue (NaN where not applicable).
  std::vector<double> per_eigenvalue_errors;
  /// match[i] is the index of the computed pair matched to reference i.
  std::vector<index_t> match;
  index_t infinite_count_computed = 0;
  index_t infinite_count_reference = 0;
  /// Computed infinite where the reference is finite, or the reverse.
  index_t misclassified = 0;
  index_t iterations = 0;
};

inline double digits_from_error(double err, double cap) {
  if (!(err > 0)) return cap;
  return std::min(cap, -std::log10(err));
}

/// Greedy chordal matching: repeatedly pairs the globally closest unmatched
/// computed/reference pair. Relative errors are taken on finite pairs only.
template <typename Real>
AccuracyReport match_and_error(const std::vector<EigPair<Real>>& computed,
                               const std::vector<EigPair<double>>& reference,
                               double digit_cap = -std::log10(unit_roundoff<Real>())) {
  if (computed.size() != reference.size())
    throw std::invalid_argument("match_and_error: length mismatch");
  const index_t n = reference.size();
  std::vector<EigPair<double>> comp;
  comp.reserve(n);
  for (const auto& e : computed) comp.push_back(e.template cast<double>());

  struct Candidate {
    double dist;
    index_t c, r;
  };
  std::vector<Candidate> cand;
  cand.reserve(n * n);
  for (index_t c = 0; c < n; ++c)
    for (index_t r = 0; r < n; ++r) cand.push_back({chordal_distance(comp[c], reference[r]), c, r});
  std::stable_sort(cand.begin(), cand.end(),
                   [](const Candidate& a, const Candidate& b) { return a.dist < b.dist; });

  AccuracyReport rep;
  rep.match.assign(n, n);
  rep.per_eigenvalue_errors.assign(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<bool> used(n, false);
  index_t matched = 0;
  for (const auto& k : cand) {
    if (matched == n) break;
    if (used[k.c] || rep.match[k.r] != n) continue;
    used[k.c] = true;
    rep.match[k.r] = k.c;
    ++matched;
  }

  for (index_t r = 0; r < n; ++r) {
    const auto& ref = reference[r];
    const auto& got = comp[rep.match[r]];
    rep.infinite_count_reference += ref.is_infinite() ? 1 : 0;
    rep.infinite_count_computed += got.is_infinite() ? 1 : 0;
    if (ref.is_infinite() != got.is_infinite()) {
      ++rep.misclassified;
      continue;
    }
    if (ref.is_infinite()) continue;
    const auto lr = ref.alpha / ref.beta;
    const auto lc = got.alpha / got.beta;
    const double err = std::abs(lr) > 0 ? std::abs(lc - lr) / std::abs(lr) : std::abs(lc);
    rep.per_eigenvalue_errors[r] = err;
    rep.max_relative_error = std::max(rep.max_relative_error, err);
  }
  rep.accurate_digits = digits_from_error(rep.max_relative_error, digit_cap);
  return rep;
}

struct Histogram {
  std::vector<index_t> counts;
  index_t clipped = 0;
};

/// Counts per bin [edges[k], edges[k+1]); values outside are clipped into the
/// first or last bin and tallied in `clipped`.
inline Histogram histogram(const std::vector<double>& values, const std::vector<double>& edges) {
  if (edges.size() < 2) throw std::invalid_argument("histogram: need at least two edges");
  for (std::size_t k = 1; k < edges.size(); ++k)
    if (!(edges[k] > edges[k - 1]))
      throw std::invalid_argument("histogram: edges must be strictly increasing");
  Histogram h;
  h.counts.assign(edges.size() - 1, 0);
  for (double v : values) {
    if (v < edges.front()) {
      ++h.counts.front();
      ++h.clipped;
    } else if (v >= edges.back()) {
      ++h.counts.back();
      ++h.clipped;
    } else {
      const auto it = std::upper_bound(edges.begin(), edges.end(), v);
      ++h.counts[std::size_t(it - edges.begin()) - 1];
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Backward error
// ---------------------------------------------------------------------------

struct Residuals {
  double h = 0;  // ||q H z^H - A||_F / ||A||_F
  double t = 0;  // ||q T z^H - B||_F / ||B||_F
};

/// Relative residuals of a decomposition with accumulated factors, computed
/// in binary64 regardless of the working precision.
template <typename Real>
Residuals relative_residuals(const Pencil<Real>& original, const HtForm<Real>& form) {
  if (!form.q || !form.z) throw std::invalid_argument("relative_residuals: factors not accumulated");
  const auto q = form.q->template cast<double>();
  const auto z = adjoint(form.z->template cast<double>());
  const auto a = original.h.template cast<double>();
  const auto b = original.t.template cast<double>();
  auto rel = [](const Matrix<double>& diff, const Matrix<double>& ref) {
    const double r = frobenius_norm(ref);
    return r > 0 ? frobenius_norm(diff) / r : frobenius_norm(diff);
  };
  return {rel(q * form.h().template cast<double>() * z - a, a),
          rel(q * form.t().template cast<double>() * z - b, b)};
}

}  // namespace qzdefl
