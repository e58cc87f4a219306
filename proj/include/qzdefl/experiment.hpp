#pragma once

// Batch accuracy and infinite-eigenvalue experiments with CSV output.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "qzdefl/analysis.hpp"
#include "qzdefl/deflation.hpp"
#include "qzdefl/pencilgen.hpp"
#include "qzdefl/solver.hpp"

namespace qzdefl {

/// Runs body(0..count-1) on up to `jobs` threads. Results must be written to
/// per-index slots so the outcome does not depend on scheduling.
inline void parallel_for(index_t count, unsigned jobs, const std::function<void(index_t)>& body) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = unsigned(std::min<index_t>(jobs, std::max<index_t>(count, 1)));
  if (jobs <= 1) {
    for (index_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<index_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (index_t k; (k = next++) < count;) {
        try {
          body(k);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline constexpr std::array<FiniteCriterion, 3> all_finite_criteria{
    FiniteCriterion::normwise, FiniteCriterion::elementwise, FiniteCriterion::strict};
inline constexpr std::array<InfiniteCriterion, 3> all_infinite_criteria{
    InfiniteCriterion::normwise, InfiniteCriterion::elementwise, InfiniteCriterion::ultra_strict};

// ---------------------------------------------------------------------------
// Finite-eigenvalue accuracy
// ---------------------------------------------------------------------------

struct FiniteExperimentConfig {
  PencilClass cls = PencilClass::graded;
  index_t count = 200;
  index_t n = 50;
  std::uint64_t seed = 0;
  PrecisionTag test_precision = PrecisionTag::binary32;
  unsigned jobs = 0;
};

struct FiniteSample {
  std::array<double, 3> digits{};
  std::array<index_t, 3> iterations{};
  std::array<bool, 3> failed{};
  std::array<index_t, 3> misclassified{};
  index_t reference_iterations = 0;
};

struct FiniteExperimentResult {
  FiniteExperimentConfig config;
  std::vector<FiniteSample> samples;

  double mean_digits(std::size_t c) const {
    double s = 0;
    for (const auto& x : samples) s += x.digits[c];
    return samples.empty() ? 0.0 : s / double(samples.size());
  }
  double mean_iterations(std::size_t c) const {
    double s = 0;
    for (const auto& x : samples) s += double(x.iterations[c]);
    return samples.empty() ? 0.0 : s / double(samples.size());
  }
  index_t failures(std::size_t c) const {
    index_t k = 0;
    for (const auto& x : samples) k += x.failed[c] ? 1 : 0;
    return k;
  }
  index_t misclassified(std::size_t c) const {
    index_t k = 0;
    for (const auto& x : samples) k += x.misclassified[c];
    return k;
  }
};

namespace detail {

template <typename Real>
FiniteSample finite_sample(const HtForm<double>& ht, const std::vector<EigPair<double>>& reference) {
  FiniteSample s;
  const auto work = ht.template cast<Real>();
  const double cap = -std::log10(double(unit_roundoff<Real>()));
  for (std::size_t c = 0; c < all_finite_criteria.size(); ++c) {
    QzConfig cfg;
    cfg.finite = all_finite_criteria[c];
    const auto out = qz_iterate(work, cfg);
    s.iterations[c] = out.total_iterations;
    s.failed[c] = !out.status.converged();
    const auto rep = match_and_error(out.eigenvalues, reference, cap);
    s.digits[c] = rep.accurate_digits;
    s.misclassified[c] = rep.misclassified;
  }
  return s;
}

}  // namespace detail

/// Each pencil is reduced once in binary64. The binary64 Strict solve of the
/// reduced pencil is the reference; the test-precision runs start from the
/// same reduced pencil rounded to the test precision.
inline FiniteExperimentResult run_finite_experiment(const FiniteExperimentConfig& cfg) {
  if (cfg.count < 1) throw SpecError("count must be >= 1");
  FiniteExperimentResult res{cfg, std::vector<FiniteSample>(cfg.count)};
  parallel_for(cfg.count, cfg.jobs, [&](index_t k) {
    GenSpec spec;
    spec.cls = cfg.cls;
    spec.n = cfg.n;
    spec.seed = batch_seed(cfg.seed, k);
    if (cfg.cls == PencilClass::sparse_b) {
      spec.m1 = cfg.n / 2;
      spec.m2 = cfg.n - spec.m1;
    }
    const auto gen = generate(spec);
    const auto ht = hessenberg_triangular(gen.pencil, false);
    QzConfig ref_cfg;
    ref_cfg.finite = FiniteCriterion::strict;
    const auto ref = qz_iterate(ht, ref_cfg);
    auto& sample = res.samples[k];
    sample = cfg.test_precision == PrecisionTag::binary32
                 ? detail::finite_sample<float>(ht, ref.eigenvalues)
                 : detail::finite_sample<double>(ht, ref.eigenvalues);
    sample.reference_iterations = ref.total_iterations;
  });
  return res;
}

// ---------------------------------------------------------------------------
// Infinite-eigenvalue counts
// ---------------------------------------------------------------------------

struct InfiniteExperimentConfig {
  PencilClass cls = PencilClass::sparse_b;
  index_t count = 100;
  index_t n = 50;
  index_t m1 = 22;
  index_t m2 = 28;
  std::uint64_t seed = 0;
  PrecisionTag precision = PrecisionTag::binary64;
  FiniteCriterion finite = FiniteCriterion::strict;
  unsigned jobs = 0;
};

struct InfiniteSample {
  std::array<index_t, 3> infinite{};
  std::array<bool, 3> failed{};
};

struct InfiniteExperimentResult {
  InfiniteExperimentConfig config;
  std::vector<InfiniteSample> samples;

  double mean(std::size_t c) const {
    double s = 0;
    for (const auto& x : samples) s += double(x.infinite[c]);
    return samples.empty() ? 0.0 : s / double(samples.size());
  }
  index_t count_equal(std::size_t c, index_t value) const {
    index_t k = 0;
    for (const auto& x : samples) k += x.infinite[c] == value ? 1 : 0;
    return k;
  }
  index_t failures(std::size_t c) const {
    index_t k = 0;
    for (const auto& x : samples) k += x.failed[c] ? 1 : 0;
    return k;
  }
};

namespace detail {

template <typename Real>
InfiniteSample infinite_sample(const Pencil<double>& p, FiniteCriterion finite) {
  InfiniteSample s;
  const auto work = p.template cast<Real>();
  const auto ht = hessenberg_triangular(work, false);
  for (std::size_t c = 0; c < all_infinite_criteria.size(); ++c) {
    QzConfig cfg;
    cfg.finite = finite;
    cfg.infinite = all_infinite_criteria[c];
    const auto out = qz_iterate(ht, cfg);
    s.infinite[c] = out.infinite_count();
    s.failed[c] = !out.status.converged();
  }
  return s;
}

}  // namespace detail

inline InfiniteExperimentResult run_infinite_experiment(const InfiniteExperimentConfig& cfg) {
  if (cfg.count < 1) throw SpecError("count must be >= 1");
  InfiniteExperimentResult res{cfg, std::vector<InfiniteSample>(cfg.count)};
  parallel_for(cfg.count, cfg.jobs, [&](index_t k) {
    GenSpec spec;
    spec.cls = cfg.cls;
    spec.n = cfg.n;
    spec.m1 = cfg.m1;
    spec.m2 = cfg.m2;
    spec.seed = batch_seed(cfg.seed, k);
    const auto gen = generate(spec);
    res.samples[k] = cfg.precision == PrecisionTag::binary32
                         ? detail::infinite_sample<float>(gen.pencil, cfg.finite)
                         : detail::infinite_sample<double>(gen.pencil, cfg.finite);
  });
  return res;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fixed(double v, int decimals = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace detail

inline constexpr const char* finite_csv_header = "bins,normwise,elementwise,strict";

/// Accuracy histogram: bin k counts pencils with -log10(max relative error)
/// in [k - 0.5, k + 0.5), for k = -1 .. 7.
inline void write_accuracy_csv(std::ostream& out, const FiniteExperimentResult& res) {
  std::vector<double> edges;
  for (int k = -1; k <= 8; ++k) edges.push_back(double(k) - 0.5);
  std::array<Histogram, 3> h;
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<double> v;
    for (const auto& s : res.samples) v.push_back(s.digits[c]);
    h[c] = histogram(v, edges);
  }
  out << finite_csv_header << '\n';
  for (std::size_t b = 0; b + 1 < edges.size(); ++b)
    out << (int(b) - 1) << ',' << h[0].counts[b] << ',' << h[1].counts[b] << ','
        << h[2].counts[b] << '\n';
}

/// Iteration histogram over sweeps per pencil; the bins column holds the
/// left edge of each bin.
inline void write_iteration_csv(std::ostream& out, const FiniteExperimentResult& res) {
  index_t lo = ~index_t(0), hi = 0;
  for (const auto& s : res.samples)
    for (auto it : s.iterations) lo = std::min(lo, it), hi = std::max(hi, it);
  if (res.samples.empty()) lo = hi = 0;
  const index_t width = std::max<index_t>(1, (hi - lo + 19) / 20);
  std::vector<double> edges;
  for (index_t e = lo; e <= hi + width; e += width) edges.push_back(double(e));
  if (edges.size() < 2) edges.push_back(edges.back() + double(width));
  std::array<Histogram, 3> h;
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<double> v;
    for (const auto& s : res.samples) v.push_back(double(s.iterations[c]));
    h[c] = histogram(v, edges);
  }
  out << finite_csv_header << '\n';
  for (std::size_t b = 0; b + 1 < edges.size(); ++b)
    out << index_t(edges[b]) << ',' << h[0].counts[b] << ',' << h[1].counts[b] << ','
        << h[2].counts[b] << '\n';
}

inline void write_summary_csv(std::ostream& out, const FiniteExperimentResult& res) {
  const double n = double(res.config.n);
  out << "metric,normwise,elementwise,strict\n";
  auto row = [&](const char* name, auto f) {
    out << name;
    for (std::size_t c = 0; c < 3; ++c) out << ',' << f(c);
    out << '\n';
  };
  row("mean_digits", [&](std::size_t c) { return detail::fixed(res.mean_digits(c), 4); });
  row("mean_iterations", [&](std::size_t c) { return detail::fixed(res.mean_iterations(c), 4); });
  row("mean_iterations_per_n",
      [&](std::size_t c) { return detail::fixed(res.mean_iterations(c) / n, 4); });
  row("failures", [&](std::size_t c) { return std::to_string(res.failures(c)); });
  row("misclassified", [&](std::size_t c) { return std::to_string(res.misclassified(c)); });
}

inline void write_infinite_csv(std::ostream& out, const InfiniteExperimentResult& res) {
  out << "pencil,normwise,elementwise,ultra-strict\n";
  for (std::size_t k = 0; k < res.samples.size(); ++k) {
    const auto& s = res.samples[k];
    out << k << ',' << s.infinite[0] << ',' << s.infinite[1] << ',' << s.infinite[2] << '\n';
  }
  out << "mean," << detail::fixed(res.mean(0), 2) << ',' << detail::fixed(res.mean(1), 2) << ','
      << detail::fixed(res.mean(2), 2) << '\n';
}

}  // namespace qzdefl
