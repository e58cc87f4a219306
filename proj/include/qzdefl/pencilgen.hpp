#pragma once

// Reproducible test pencils.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qzdefl/core.hpp"
#include "qzdefl/pencil.hpp"
#include "qzdefl/reduction.hpp"

namespace qzdefl {

struct SpecError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Counter-based random stream: the k-th draw is splitmix64(key + k * golden).
/// Output depends only on (key, k), so it is identical on every platform.
class CounterStream {
 public:
  explicit CounterStream(std::uint64_t seed) : key_{mix(seed)} {}

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() noexcept { return mix(key_ + 0x9e3779b97f4a7c15ULL * counter_++); }

  /// Uniform on [-1, 1).
  double uniform() noexcept {
    return double(next_u64() >> 11) * 0x1.0p-52 - 1.0;
  }

  Complex<double> uniform_complex() noexcept {
    const double re = uniform();
    return {re, uniform()};
  }

  /// Independent stream for the index-th item of a batch.
  CounterStream substream(std::uint64_t index) const noexcept {
    return CounterStream(key_ ^ mix(index + 0x632be59bd9b4e019ULL), Raw{});
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  struct Raw {};
  CounterStream(std::uint64_t key, Raw) : key_{key} {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Seed of the index-th pencil of an experiment.
inline std::uint64_t batch_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return CounterStream::mix(CounterStream::mix(seed) ^ CounterStream::mix(index + 1));
}

inline Matrix<double> random_matrix(index_t rows, index_t cols, CounterStream& rng) {
  Matrix<double> m(rows, cols);
  for (index_t j = 0; j < cols; ++j)
    for (index_t i = 0; i < rows; ++i) m(i, j) = rng.uniform_complex();
  return m;
}

/// Q factor of a matrix with entries uniform on [-1,1] + i[-1,1], with the
/// column phases fixed so that R has a real positive diagonal.
inline Matrix<double> random_unitary(index_t n, CounterStream& rng) {
  if (n == 0) throw SpecError("random_unitary: n must be >= 1");
  auto r = random_matrix(n, n, rng);
  auto q = givens_qr(r);
  for (index_t j = 0; j < n; ++j) {
    const auto d = r(j, j);
    if (d == Complex<double>{}) continue;
    const auto phase = d / std::abs(d);
    for (index_t i = 0; i < n; ++i) q(i, j) *= phase;
  }
  return q;
}

/// Diagonal entries logarithmically spaced from 1 down to 1/kappa.
inline std::vector<double> log_spaced(index_t n, double kappa) {
  std::vector<double> d(n, 1.0);
  if (n < 2) return d;
  for (index_t i = 0; i < n; ++i)
    d[i] = std::pow(kappa, -double(i) / double(n - 1));
  return d;
}

/// (A, B) = V (D1, D2) W with V, W = unitary * diag(1 .. 1/kappa) * unitary.
inline Pencil<double> prescribed_pencil(const std::vector<EigPair<double>>& eigenvalues,
                                        double kappa, CounterStream& rng) {
  const index_t n = eigenvalues.size();
  if (n == 0) throw SpecError("prescribed_pencil: no eigenvalues");
  if (!(kappa >= 1.0)) throw SpecError("prescribed_pencil: kappa must be >= 1");
  const auto spacing = log_spaced(n, kappa);
  auto scaled = [&](void) {
    auto left = random_unitary(n, rng);
    auto right = random_unitary(n, rng);
    for (index_t j = 0; j < n; ++j)
      for (index_t i = 0; i < n; ++i) left(i, j) *= spacing[j];
    return left * right;
  };
  const auto v = scaled();
  const auto w = scaled();
  Matrix<double> d1(n, n), d2(n, n);
  for (index_t i = 0; i < n; ++i) {
    d1(i, i) = eigenvalues[i].alpha;
    d2(i, i) = eigenvalues[i].beta;
  }
  return Pencil<double>(v * d1 * w, v * d2 * w);
}

enum class PencilClass {
  unitarily_diagonalizable,
  non_unitarily_diagonalizable,
  graded,
  graded_beta,
  sparse_b,
  adversarial_3x3,
};

inline std::string_view to_string(PencilClass c) noexcept {
  switch (c) {
    case PencilClass::unitarily_diagonalizable: return "unitary";
    case PencilClass::non_unitarily_diagonalizable: return "nonunitary";
    case PencilClass::graded: return "graded";
    case PencilClass::graded_beta: return "graded-beta";
    case PencilClass::sparse_b: return "sparse-b";
    case PencilClass::adversarial_3x3: return "example3x3";
  }
  return "?";
}

inline PencilClass parse_pencil_class(std::string_view s) {
  if (s == "unitary" || s == "unitarily-diagonalizable") return PencilClass::unitarily_diagonalizable;
  if (s == "nonunitary" || s == "non-unitarily-diagonalizable")
    return PencilClass::non_unitarily_diagonalizable;
  if (s == "graded") return PencilClass::graded;
  if (s == "graded-beta") return PencilClass::graded_beta;
  if (s == "sparse-b") return PencilClass::sparse_b;
  if (s == "example3x3") return PencilClass::adversarial_3x3;
  throw std::invalid_argument("unknown pencil class '" + std::string(s) + "'");
}

struct GenSpec {
  PencilClass cls = PencilClass::unitarily_diagonalizable;
  index_t n = 50;
  /// Eigenvector conditioning; the class default is used when unset.
  std::optional<double> kappa;
  index_t m1 = 0;  // sparse-b block sizes, m1 + m2 == n
  index_t m2 = 0;
  std::uint64_t seed = 0;
  /// Overrides the random eigenvalues of the prescribed-spectrum classes.
  std::optional<std::vector<EigPair<double>>> prescribed;
};

struct Generated {
  Pencil<double> pencil;
  std::optional<std::vector<EigPair<double>>> reference;
  std::optional<index_t> expected_infinite;
};

/// The 3x3 pencil whose last subdiagonal entry looks negligible to criteria
/// that only inspect H: eta = 1.1e-8, c = 1.1e5, d = 1e-2.
template <typename Real = double>
Pencil<Real> example_3x3() {
  const double eta = 1.1e-8, c = 1.1e5, d = 1e-2;
  Matrix<double> h(3, 3), t(3, 3);
  h(0, 0) = 1;
  h(0, 1) = c;
  h(1, 0) = eta;
  h(1, 1) = 1 + d;
  h(1, 2) = 1;
  h(2, 1) = eta;
  h(2, 2) = (1 + 2 * d) / c;
  t(0, 0) = 1;
  t(1, 1) = 1;
  t(2, 2) = 1 / c;
  return Pencil<double>(h, t).template cast<Real>();
}

/// Reference values for example_3x3 (as returned by a
/// double-precision xHGEQZ run), paired with beta = 1.
inline std::vector<EigPair<double>> example_3x3_reference() {
  return {{0.95371503, 1.0}, {1.0261424, 1.0}, {1.0501426, 1.0}};
}

inline void validate(const GenSpec& spec) {
  if (spec.cls == PencilClass::adversarial_3x3) return;
  if (spec.n < 2) throw SpecError("n must be >= 2");
  if (spec.kappa && !(*spec.kappa >= 1.0)) throw SpecError("kappa must be >= 1");
  if (spec.cls == PencilClass::sparse_b && spec.m1 + spec.m2 != spec.n)
    throw SpecError("sparse-b requires m1 + m2 == n");
  if (spec.prescribed && spec.prescribed->size() != spec.n)
    throw SpecError("prescribed eigenvalue count differs from n");
}

inline Generated generate(const GenSpec& spec) {
  validate(spec);
  CounterStream rng(spec.seed);
  const index_t n = spec.n;
  Generated out;

  auto from_spectrum = [&](std::vector<EigPair<double>> eig, double default_kappa) {
    out.pencil = prescribed_pencil(eig, spec.kappa.value_or(default_kappa), rng);
    for (auto& e : eig) e = e.normalized();
    out.reference = std::move(eig);
  };
  auto random_alphas = [&] {
    if (spec.prescribed) return *spec.prescribed;
    std::vector<EigPair<double>> eig(n);
    for (auto& e : eig) e = {rng.uniform_complex(), 1.0};
    return eig;
  };

  switch (spec.cls) {
    case PencilClass::unitarily_diagonalizable: from_spectrum(random_alphas(), 1.0); break;
    case PencilClass::non_unitarily_diagonalizable: from_spectrum(random_alphas(), 1000.0); break;
    case PencilClass::graded_beta: {
      std::vector<EigPair<double>> eig(n);
      // beta runs logarithmically from 1 down to 1e-16
      for (index_t i = 0; i < n; ++i)
        eig[i] = {1.0, std::pow(10.0, -16.0 * double(i) / double(n - 1))};
      if (spec.prescribed) eig = *spec.prescribed;
      from_spectrum(std::move(eig), 1.0);
      break;
    }
    case PencilClass::graded: {
      auto a = random_matrix(n, n, rng);
      auto b = random_matrix(n, n, rng);
      const auto scale = log_spaced(n, 1e3);
      for (index_t j = 0; j < n; ++j)
        for (index_t i = 0; i < n; ++i) {
          a(i, j) *= scale[i] * scale[j];
          b(i, j) *= scale[i] * scale[j];
        }
      out.pencil = Pencil<double>(std::move(a), std::move(b));
      break;
    }
    case PencilClass::sparse_b: {
      auto a = random_matrix(n, n, rng);
      Matrix<double> b(n, n);
      // B = [B1 0; 0 B2], B1 is m1 x m2 and B2 is m2 x m1.
      for (index_t j = 0; j < spec.m2; ++j)
        for (index_t i = 0; i < spec.m1; ++i) b(i, j) = rng.uniform_complex();
      for (index_t j = spec.m2; j < n; ++j)
        for (index_t i = spec.m1; i < n; ++i) b(i, j) = rng.uniform_complex();
      out.pencil = Pencil<double>(std::move(a), std::move(b));
      out.expected_infinite = spec.m1 > spec.m2 ? spec.m1 - spec.m2 : spec.m2 - spec.m1;
      break;
    }
    case PencilClass::adversarial_3x3:
      out.pencil = example_3x3<double>();
      out.reference = example_3x3_reference();
      break;
  }
  return out;
}

}  // namespace qzdefl
