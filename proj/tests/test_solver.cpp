#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace qzdefl;
using C = Complex<double>;
using qztest::max_chordal;

namespace {

Matrix<double> diag(std::initializer_list<C> d) {
  Matrix<double> m(d.size(), d.size());
  index_t i = 0;
  for (auto x : d) m(i, i) = x, ++i;
  return m;
}

template <typename Real>
std::vector<EigPair<double>> widen(const std::vector<EigPair<Real>>& v) {
  std::vector<EigPair<double>> out;
  for (const auto& e : v) out.push_back(e.template cast<double>());
  return out;
}

}  // namespace

TEST(Eig2x2, Diagonal) {
  const auto [a, b] = eig2x2(diag({2.0, 3.0}), Matrix<double>::identity(2));
  EXPECT_LE(max_chordal(std::vector{a, b}, {{2.0, 1.0}, {3.0, 1.0}}), 4 * unit_roundoff<double>());
}

TEST(Eig2x2, Antidiagonal) {
  Matrix<double> h(2, 2);
  h(0, 1) = 1, h(1, 0) = 1;
  const auto [a, b] = eig2x2(h, Matrix<double>::identity(2));
  EXPECT_LE(max_chordal(std::vector{a, b}, {{1.0, 1.0}, {-1.0, 1.0}}), 4 * unit_roundoff<double>());
}

TEST(Eig2x2, SingularTGivesExactInfinity) {
  const auto [a, b] = eig2x2(Matrix<double>::identity(2), diag({1.0, 0.0}));
  EXPECT_EQ(int(a.is_infinite()) + int(b.is_infinite()), 1);
  EXPECT_LE(max_chordal(std::vector{a, b}, {{1.0, 1.0}, {1.0, 0.0}}), 4 * unit_roundoff<double>());
}

TEST(Eig2x2, IdenticallySingularThrows) {
  EXPECT_THROW(eig2x2(Matrix<double>(2, 2), Matrix<double>(2, 2)), SingularPencilError);
  // common null vector e2
  EXPECT_THROW(eig2x2(diag({1.0, 0.0}), diag({2.0, 0.0})), SingularPencilError);
}

TEST(Eig2x2, ExtremeScalesStayFinite) {
  Matrix<double> h(2, 2), t(2, 2);
  h(0, 0) = 1e150, h(0, 1) = 3e150, h(1, 0) = 1e149, h(1, 1) = 2e150;
  t(0, 0) = 1e-150, t(0, 1) = 1e-151, t(1, 1) = 2e-150;
  const auto [a, b] = eig2x2(h, t);
  for (const auto& e : {a, b}) {
    EXPECT_TRUE(std::isfinite(std::abs(e.alpha)) && std::isfinite(std::abs(e.beta)));
    EXPECT_FALSE(e.is_infinite());
  }
  EXPECT_GT(chordal_distance(a, b), 0.0);
}

TEST(WilkinsonShift, TriangularCornerReturnedExactly) {
  auto ht = qztest::random_ht<double>(4, 1);
  ht.h()(3, 2) = {};
  const auto s = wilkinson_shift(ht, 0, 3);
  EXPECT_LE(chordal_distance(s, EigPair<double>{ht.h()(3, 3), ht.t()(3, 3)}), 1e-16);
}

TEST(WilkinsonShift, NearCornerForSmallCoupling) {
  Matrix<double> h(2, 2);
  h(0, 0) = 1, h(0, 1) = 1, h(1, 0) = 1e-3, h(1, 1) = 1.5;
  const HtForm<double> ht{Pencil<double>(h, Matrix<double>::identity(2)), std::nullopt, std::nullopt};
  const auto s = wilkinson_shift(ht, 0, 1);
  const auto [r1, r2] = eig2x2(h, Matrix<double>::identity(2));
  const auto expected = std::abs(r1.alpha / r1.beta - 1.5) < std::abs(r2.alpha / r2.beta - 1.5) ? r1 : r2;
  EXPECT_LE(chordal_distance(s, expected), 1e-15);
  EXPECT_LE(std::abs(s.alpha / s.beta - 1.5), 1e-2);
}

TEST(WilkinsonShift, InfiniteRootIsSkipped) {
  Matrix<double> h(2, 2), t(2, 2);
  h(0, 0) = 2, h(0, 1) = 1, h(1, 0) = 0.5, h(1, 1) = 3;
  t(0, 0) = 1, t(0, 1) = 0.25;
  const HtForm<double> ht{Pencil<double>(h, t), std::nullopt, std::nullopt};
  const auto s = wilkinson_shift(ht, 0, 1);
  EXPECT_FALSE(s.is_infinite());
  const auto [r1, r2] = eig2x2(h, t);
  const auto& finite = r1.is_infinite() ? r2 : r1;
  EXPECT_LE(chordal_distance(s, finite), 1e-15);
}

TEST(Sweep, ExactShiftDeflatesTwoByTwo) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto ht = qztest::random_ht<double>(2, seed);
    const auto shift = wilkinson_shift(ht, 0, 1);
    single_shift_sweep(ht, 0, 1, shift);
    EXPECT_TRUE(is_hessenberg_triangular(ht.pencil));
    EXPECT_LE(std::abs(ht.h()(1, 0)), 100 * unit_roundoff<double>() * frobenius_norm(ht.h()));
  }
}

TEST(Sweep, PreservesEigenvalues) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const index_t n = 3 + seed % 4;
    auto ht = qztest::random_ht<double>(n, 40 + seed);
    const auto before = brute_force_eigs(ht.pencil);
    single_shift_sweep(ht, 0, n - 1, wilkinson_shift(ht, 0, n - 1));
    EXPECT_TRUE(is_hessenberg_triangular(ht.pencil));
    EXPECT_LE(max_chordal(brute_force_eigs(ht.pencil), before),
              100.0 * double(n) * unit_roundoff<double>());
  }
}

TEST(Sweep, ZeroShiftKeepsStructure) {
  auto ht = qztest::random_ht<float>(7, 3);
  ht.q = Matrix<float>::identity(7);
  ht.z = Matrix<float>::identity(7);
  const auto orig = ht.pencil;
  single_shift_sweep(ht, 0, 6, EigPair<float>{0.0f, 1.0f});
  EXPECT_TRUE(is_hessenberg_triangular(ht.pencil));
  const auto r = relative_residuals(orig, ht);
  EXPECT_LE(r.h, 100 * 7 * unit_roundoff<float>());
  EXPECT_LE(r.t, 100 * 7 * unit_roundoff<float>());
}

TEST(DeflateInfinite, AtWindowEdge) {
  auto ht = qztest::random_ht<double>(4, 12);
  ht.t()(3, 3) = 1e-30;
  deflate_infinite(ht, 0, 3, 3);
  EXPECT_EQ(ht.t()(3, 3), C{});
  EXPECT_EQ(ht.h()(3, 2), C{});
  EXPECT_TRUE(is_hessenberg_triangular(ht.pencil));
}

TEST(DeflateInfinite, ChasesInteriorZeroToBottom) {
  for (index_t i = 0; i < 6; ++i) {
    auto ht = qztest::random_ht<double>(6, 60 + i);
    ht.q = Matrix<double>::identity(6);
    ht.z = Matrix<double>::identity(6);
    auto orig = ht.pencil;
    orig.t(i, i) = {};
    deflate_infinite(ht, 0, 5, i);
    EXPECT_TRUE(is_hessenberg_triangular(ht.pencil));
    EXPECT_EQ(ht.t()(5, 5), C{});
    EXPECT_EQ(ht.h()(5, 4), C{});
    const auto r = relative_residuals(orig, ht);
    EXPECT_LE(r.h, 100 * 6 * unit_roundoff<double>());
    EXPECT_LE(r.t, 100 * 6 * unit_roundoff<double>());
  }
}

TEST(DeflateInfinite, FiniteEigenvaluesUnchanged) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const index_t n = 5 + seed % 6;
    auto ht = qztest::random_ht<double>(n, 80 + seed);
    const index_t i = seed % n;
    ht.t()(i, i) = 1e-300;
    auto exact = ht.pencil;
    exact.t(i, i) = {};
    const auto reference = brute_force_eigs(exact);
    QzConfig cfg;
    cfg.infinite = InfiniteCriterion::normwise;
    const auto res = qz_iterate(ht, cfg);
    ASSERT_TRUE(res.status.converged());
    EXPECT_EQ(res.infinite_count(), 1u);
    EXPECT_LE(max_chordal(res.eigenvalues, reference), 1e-10) << "seed " << seed;
  }
}

TEST(QzIterate, TriangularPencilNeedsNoSweeps) {
  auto ht = qztest::random_ht<double>(5, 2);
  for (index_t i = 1; i < 5; ++i) ht.h()(i, i - 1) = {};
  const auto res = qz_iterate(ht, QzConfig{});
  EXPECT_EQ(res.total_iterations, 0u);
  for (index_t i = 0; i < 5; ++i) {
    const auto e = res.eigenvalues[i];
    const auto d = EigPair<double>{ht.h()(i, i), ht.t()(i, i)}.normalized();
    EXPECT_EQ(e.alpha, d.alpha);
    EXPECT_EQ(e.beta, d.beta);
  }
}

TEST(QzIterate, ExampleThreeByThreeStrictSingle) {
  QzConfig cfg;
  cfg.finite = FiniteCriterion::strict;
  const auto strict = solve(example_3x3<float>(), cfg);
  cfg.finite = FiniteCriterion::elementwise;
  const auto elem = solve(example_3x3<float>(), cfg);
  const auto rep = match_and_error(strict.eigenvalues, example_3x3_reference());
  EXPECT_LE(rep.max_relative_error, 5e-6);
  EXPECT_GE(strict.total_iterations, elem.total_iterations + 2);
}

TEST(QzIterate, ExampleThreeByThreeLooseCriteriaLoseAccuracy) {
  for (auto c : {FiniteCriterion::elementwise, FiniteCriterion::normwise}) {
    QzConfig cfg;
    cfg.finite = c;
    const auto res = solve(example_3x3<float>(), cfg);
    EXPECT_GE(match_and_error(res.eigenvalues, example_3x3_reference()).max_relative_error, 1e-3);
  }
}

TEST(QzIterate, RandomEightByEightMatchesOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = qztest::random_pencil<double>(8, 500 + seed);
    const auto res = solve(p, QzConfig{});
    ASSERT_TRUE(res.status.converged());
    EXPECT_LE(max_chordal(res.eigenvalues, brute_force_eigs(p)), 1e-12) << "seed " << seed;
  }
}

TEST(QzIterate, FailureReportedAsStatus) {
  // cyclic shift: the corner 2x2 gives a zero shift and plain QZ stagnates
  const index_t n = 4;
  Matrix<double> h(n, n);
  for (index_t i = 1; i < n; ++i) h(i, i - 1) = 1;
  h(0, n - 1) = 1;
  const Pencil<double> p(h, Matrix<double>::identity(n));
  QzConfig cfg;
  cfg.max_iterations_per_eigenvalue = 1;
  const auto res = solve(p, cfg);
  EXPECT_FALSE(res.status.converged());
  EXPECT_EQ(res.status.failed_at, n - 1);
  EXPECT_EQ(res.eigenvalues.size(), n);
  // exceptional shifts break the cycle with the default budget
  const auto ok = solve(p, QzConfig{});
  ASSERT_TRUE(ok.status.converged());
  std::vector<EigPair<double>> roots;
  for (index_t k = 0; k < n; ++k) roots.push_back({std::polar(1.0, 2 * M_PI * double(k) / n), 1.0});
  EXPECT_LE(max_chordal(ok.eigenvalues, roots), 1e-12);
}

TEST(QzIterate, RejectsBadInput) {
  QzConfig cfg;
  cfg.max_iterations_per_eigenvalue = 0;
  EXPECT_THROW(qz_iterate(qztest::random_ht<double>(3, 1), cfg), std::invalid_argument);
  auto p = qztest::random_pencil<double>(3, 1);
  EXPECT_THROW(qz_iterate(HtForm<double>{p, std::nullopt, std::nullopt}, QzConfig{}),
               std::invalid_argument);
  p.h(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(solve(p, QzConfig{}), std::invalid_argument);
}

TEST(Solve, DiagonalPencil) {
  const Pencil<double> p(diag({1.0, C(2, 1), -3.0}), diag({2.0, 1.0, C(0, 1)}));
  const auto res = solve(p, QzConfig{});
  ASSERT_TRUE(res.status.converged());
  EXPECT_LE(max_chordal(res.eigenvalues, {{0.5, 1.0}, {C(2, 1), 1.0}, {C(0, 3), 1.0}}), 1e-16);
}

TEST(Solve, PrescribedEigenvaluesRecovered) {
  GenSpec spec;
  spec.cls = PencilClass::unitarily_diagonalizable;
  spec.n = 3;
  spec.seed = 1;
  spec.prescribed = std::vector<EigPair<double>>{{1.0, 1.0}, {2.0, 1.0}, {3.0, 1.0}};
  const auto gen = generate(spec);
  const auto res = solve(gen.pencil, QzConfig{});
  EXPECT_LE(max_chordal(res.eigenvalues, *gen.reference), 1e-13);
}

TEST(Solve, SparseBHasSixInfiniteEigenvalues) {
  GenSpec spec;
  spec.cls = PencilClass::sparse_b;
  spec.n = 50;
  spec.m1 = 22;
  spec.m2 = 28;
  spec.seed = 3;
  const auto gen = generate(spec);
  QzConfig cfg;
  cfg.infinite = InfiniteCriterion::normwise;
  const auto res = solve(gen.pencil, cfg);
  ASSERT_TRUE(res.status.converged());
  EXPECT_EQ(res.infinite_count(), 6u);
  EXPECT_EQ(res.eigenvalues.size(), 50u);
}

template <typename Real>
void check_backward_stability(FiniteCriterion f, InfiniteCriterion inf) {
  const double u = unit_roundoff<Real>();
  for (index_t n : {5, 20, 50}) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto p = qztest::random_pencil<Real>(n, 700 + seed + 10 * n);
      QzConfig cfg;
      cfg.finite = f;
      cfg.infinite = inf;
      cfg.accumulate_qz = true;
      const auto res = solve(p, cfg);
      ASSERT_TRUE(res.status.converged());
      EXPECT_TRUE(qztest::is_schur_form(res.final_form.pencil));
      const auto r = relative_residuals(p, res.final_form);
      EXPECT_LE(r.h, 100.0 * double(n) * u);
      EXPECT_LE(r.t, 100.0 * double(n) * u);
      EXPECT_EQ(res.eigenvalues.size(), n);
    }
  }
}

TEST(Solve, BackwardStableForAllPolicies) {
  for (auto f : all_finite_criteria)
    for (auto inf : all_infinite_criteria) {
      check_backward_stability<double>(f, inf);
      check_backward_stability<float>(f, inf);
    }
}

TEST(Solve, StrictDeflationsAreElementwiseDeflations) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GenSpec spec;
    spec.cls = seed % 2 ? PencilClass::graded : PencilClass::non_unitarily_diagonalizable;
    spec.n = 30;
    spec.seed = seed;
    const auto ht = hessenberg_triangular(generate(spec).pencil, false).cast<float>();
    QzConfig cfg;
    cfg.log_deflations = true;
    const auto res = qz_iterate(ht, cfg);
    auto elem = res.policy;
    elem.finite = FiniteCriterion::elementwise;
    index_t finite_events = 0;
    for (const auto& e : res.deflations) {
      if (e.kind != DeflationEvent<float>::Kind::finite) continue;
      ++finite_events;
      EXPECT_TRUE(finite_deflatable(e.site, elem));
    }
    EXPECT_GT(finite_events, 0u);
  }
}

TEST(Solve, IterationCountsOnlySweeps) {
  auto ht = qztest::random_ht<double>(6, 5);
  ht.t()(2, 2) = {};
  for (index_t i = 1; i < 6; ++i) ht.h()(i, i - 1) = {};
  const auto res = qz_iterate(ht, QzConfig{});
  EXPECT_EQ(res.total_iterations, 0u);
  EXPECT_EQ(res.infinite_count(), 1u);
}

TEST(Solve, AccumulatedFactorsAreUnitary) {
  const auto p = qztest::random_pencil<double>(12, 9);
  QzConfig cfg;
  cfg.accumulate_qz = true;
  const auto res = solve(p, cfg);
  EXPECT_LE(qztest::unitarity_error(*res.q()), 50 * 12 * unit_roundoff<double>());
  EXPECT_LE(qztest::unitarity_error(*res.z()), 50 * 12 * unit_roundoff<double>());
}
