#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "test_support.hpp"

using namespace qzdefl;
using C = Complex<double>;
using qztest::max_chordal;
using qztest::unitarity_error;

namespace {

/// Numerical rank by Gaussian elimination with complete pivoting.
index_t numerical_rank(Matrix<double> a, double rel_tol) {
  const index_t n = a.rows();
  double amax = 0;
  for (const auto& x : a.values()) amax = std::max(amax, std::abs(x));
  index_t rank = 0;
  for (index_t k = 0; k < n; ++k) {
    index_t pi = k, pj = k;
    double best = 0;
    for (index_t j = k; j < n; ++j)
      for (index_t i = k; i < n; ++i)
        if (std::abs(a(i, j)) > best) best = std::abs(a(i, j)), pi = i, pj = j;
    if (best <= rel_tol * amax) break;
    ++rank;
    for (index_t j = 0; j < n; ++j) std::swap(a(k, j), a(pi, j));
    for (index_t i = 0; i < n; ++i) std::swap(a(i, k), a(i, pj));
    for (index_t i = k + 1; i < n; ++i) {
      const C f = a(i, k) / a(k, k);
      for (index_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  return rank;
}

}  // namespace

TEST(CounterStream, SplitmixReferenceValue) {
  static_assert(CounterStream::mix(0) == 0xe220a8397b1dcdafULL);
  EXPECT_EQ(CounterStream::mix(0), 0xe220a8397b1dcdafULL);
}

TEST(CounterStream, DeterministicAndInRange) {
  CounterStream a(42), b(42), c(43);
  bool differs = false;
  for (int k = 0; k < 1000; ++k) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_GE(x, -1.0);
    EXPECT_LT(x, 1.0);
    differs |= x != c.uniform();
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(a.counter(), 1000u);
}

TEST(CounterStream, BatchSeedsDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t k = 0; k < 1000; ++k) seen.insert(batch_seed(7, k));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(batch_seed(7, 0), batch_seed(8, 0));
}

TEST(RandomUnitary, IsUnitary) {
  for (index_t n : {1, 2, 5, 30}) {
    CounterStream rng(n);
    const auto q = random_unitary(n, rng);
    EXPECT_LE(unitarity_error(q), 10.0 * double(n) * unit_roundoff<double>());
  }
  CounterStream rng(0);
  EXPECT_THROW(random_unitary(0, rng), SpecError);
}

TEST(RandomUnitary, Deterministic) {
  CounterStream a(5), b(5);
  const auto qa = random_unitary(6, a);
  const auto qb = random_unitary(6, b);
  for (index_t j = 0; j < 6; ++j)
    for (index_t i = 0; i < 6; ++i) EXPECT_EQ(qa(i, j), qb(i, j));
}

TEST(Generate, DeterministicInSeed) {
  for (auto cls : {PencilClass::unitarily_diagonalizable, PencilClass::graded, PencilClass::sparse_b}) {
    GenSpec spec;
    spec.cls = cls;
    spec.n = 10;
    spec.m1 = 4;
    spec.m2 = 6;
    spec.seed = 11;
    const auto a = generate(spec).pencil;
    const auto b = generate(spec).pencil;
    spec.seed = 12;
    const auto c = generate(spec).pencil;
    EXPECT_EQ(frobenius_norm(a.h - b.h), 0.0);
    EXPECT_EQ(frobenius_norm(a.t - b.t), 0.0);
    EXPECT_GT(frobenius_norm(a.h - c.h), 0.0);
  }
}

TEST(Generate, ExampleEntries) {
  const auto p = example_3x3<double>();
  EXPECT_EQ(p.h(0, 1), C(1.1e5));
  EXPECT_EQ(p.h(1, 0), C(1.1e-8));
  EXPECT_EQ(p.h(2, 1), C(1.1e-8));
  EXPECT_EQ(p.h(1, 1), C(1.01));
  EXPECT_EQ(p.h(1, 2), C(1.0));
  EXPECT_EQ(p.h(2, 2), C(1.02 / 1.1e5));
  EXPECT_EQ(p.h(2, 0), C{});
  EXPECT_EQ(p.h(0, 2), C{});
  EXPECT_EQ(p.t(2, 2), C(1 / 1.1e5));
  for (index_t i = 0; i < 3; ++i)
    for (index_t j = 0; j < 3; ++j)
      if (i != j) {
        EXPECT_EQ(p.t(i, j), C{});
      }
  EXPECT_TRUE(is_hessenberg_triangular(p));
  GenSpec spec;
  spec.cls = PencilClass::adversarial_3x3;
  EXPECT_TRUE(generate(spec).reference.has_value());
}

TEST(Generate, ExampleExactEigenvalues) {
  // the trailing 2x2 block decouples to first order; brute force pins the exact roots
  const auto eig = brute_force_eigs(example_3x3<double>());
  std::vector<double> re;
  for (const auto& e : eig) re.push_back((e.alpha / e.beta).real());
  std::sort(re.begin(), re.end());
  EXPECT_NEAR(re[0], 0.95980040, 1e-7);
  EXPECT_NEAR(re[1], 1.01, 1e-7);
  EXPECT_NEAR(re[2], 1.06019960, 1e-7);
}

TEST(Generate, PrescribedUnitary) {
  GenSpec spec;
  spec.n = 4;
  spec.seed = 2;
  spec.prescribed = std::vector<EigPair<double>>{{1.0, 1.0}, {2.0, 1.0}, {3.0, 1.0}, {4.0, 1.0}};
  const auto gen = generate(spec);
  EXPECT_LE(max_chordal(brute_force_eigs(gen.pencil), *gen.reference), 1e-13);
}

TEST(Generate, PrescribedSpectrumMatchesReference) {
  for (auto cls : {PencilClass::unitarily_diagonalizable, PencilClass::non_unitarily_diagonalizable}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      GenSpec spec;
      spec.cls = cls;
      spec.n = 8;
      spec.seed = seed;
      const auto gen = generate(spec);
      ASSERT_TRUE(gen.reference);
      ASSERT_EQ(gen.reference->size(), 8u);
      for (const auto& e : *gen.reference) {
        EXPECT_LE(std::abs(e.alpha.real()), 1.0);
        EXPECT_LE(std::abs(e.alpha.imag()), 1.0);
      }
      // conditioning of the eigenvectors limits how well the oracle can agree
      const double tol = cls == PencilClass::unitarily_diagonalizable ? 1e-12 : 1e-7;
      EXPECT_LE(max_chordal(brute_force_eigs(gen.pencil), *gen.reference), tol);
    }
  }
}

TEST(Generate, GradedScaling) {
  GenSpec spec;
  spec.cls = PencilClass::graded;
  spec.n = 20;
  spec.seed = 4;
  const auto p = generate(spec).pencil;
  const double top = std::abs(p.h(0, 0)), bottom = std::abs(p.h(19, 19));
  EXPECT_LE(top, std::sqrt(2.0));
  EXPECT_LE(bottom, std::sqrt(2.0) * 1e-6 * (1 + 1e-12));
}

TEST(Generate, SparseBStructure) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    GenSpec spec;
    spec.cls = PencilClass::sparse_b;
    spec.n = 50;
    spec.m1 = 22;
    spec.m2 = 28;
    spec.seed = seed;
    const auto gen = generate(spec);
    ASSERT_EQ(gen.expected_infinite, 6u);
    const auto& b = gen.pencil.t;
    for (index_t j = 0; j < 50; ++j)
      for (index_t i = 0; i < 50; ++i) {
        const bool block1 = i < 22 && j < 28;
        const bool block2 = i >= 22 && j >= 28;
        if (!block1 && !block2) {
          EXPECT_EQ(b(i, j), C{});
        }
      }
    // rank(B) = 2 min(m1, m2) = 44
    EXPECT_EQ(numerical_rank(b, 1e-12), 44u);
  }
}

TEST(Generate, GradedBetaSingularValues) {
  GenSpec spec;
  spec.cls = PencilClass::graded_beta;
  spec.n = 50;
  spec.seed = 1;
  const auto gen = generate(spec);
  EXPECT_NEAR(norm2_estimate(gen.pencil.t), 1.0, 1e-10);
  const auto sv = smallest_singular_values(gen.pencil.t, 2);
  // both values sit at the roundoff level of a unit-norm matrix, so only their
  // order of magnitude is meaningful
  EXPECT_NEAR(sv[0], 1e-16, 0.15e-16);
  EXPECT_NEAR(sv[1], 2.089e-16, 0.15 * 2.089e-16);
  ASSERT_TRUE(gen.reference);
  EXPECT_EQ(gen.reference->front().beta, C(1.0));
  EXPECT_NEAR(gen.reference->back().beta.real(), 1e-16, 1e-30);
}

TEST(Generate, InvalidSpecs) {
  GenSpec spec;
  spec.n = 1;
  EXPECT_THROW(generate(spec), SpecError);
  spec.n = 5;
  spec.kappa = 0.5;
  EXPECT_THROW(generate(spec), SpecError);
  spec.kappa.reset();
  spec.cls = PencilClass::sparse_b;
  spec.m1 = 2;
  spec.m2 = 2;
  EXPECT_THROW(generate(spec), SpecError);
  spec.cls = PencilClass::unitarily_diagonalizable;
  spec.prescribed = std::vector<EigPair<double>>(3, EigPair<double>{1.0, 1.0});
  EXPECT_THROW(generate(spec), SpecError);
  EXPECT_THROW(parse_pencil_class("banded"), std::invalid_argument);
  CounterStream rng(0);
  EXPECT_THROW(prescribed_pencil({}, 1.0, rng), SpecError);
}

TEST(Generate, ClassNamesRoundTrip) {
  for (auto c : {PencilClass::unitarily_diagonalizable, PencilClass::non_unitarily_diagonalizable,
                 PencilClass::graded, PencilClass::graded_beta, PencilClass::sparse_b,
                 PencilClass::adversarial_3x3})
    EXPECT_EQ(parse_pencil_class(to_string(c)), c);
}
