// Solve a small random pencil under each finite deflation criterion and
// report the backward error of the computed generalized Schur form.

#include <cstdio>

#include "qzdefl/qzdefl.hpp"

int main() {
  using namespace qzdefl;

  GenSpec spec;
  spec.cls = PencilClass::non_unitarily_diagonalizable;
  spec.n = 12;
  spec.seed = 7;
  const auto gen = generate(spec);

  for (const auto c : all_finite_criteria) {
    QzConfig cfg;
    cfg.finite = c;
    cfg.accumulate_qz = true;
    const auto res = solve(gen.pencil, cfg);
    const auto rep = match_and_error(res.eigenvalues, *gen.reference);
    const auto r = relative_residuals(gen.pencil, res.final_form);
    std::printf("%-12s sweeps %3zu  max rel err %.2e  residuals %.1e %.1e\n",
                std::string(to_string(c)).c_str(), res.total_iterations, rep.max_relative_error,
                r.h, r.t);
  }
}
