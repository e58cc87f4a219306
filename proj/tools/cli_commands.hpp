#pragma once

// Subcommands of the qzdefl command-line tool. Kept in a header so the test
// suite can drive them in-process.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qzdefl/qzdefl.hpp"

namespace qzdefl::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_io = 1,
  exit_usage = 2,
  exit_failed = 3,
};

struct SolveOptions {
  std::string input;
  std::string criterion = "strict";
  std::string infinite_criterion = "normwise";
  bool ultra_strict = false;
  std::string precision = "binary64";
  bool accumulate = false;
  std::size_t max_iterations = 30;
};

struct GenerateOptions {
  std::string cls = "unitary";
  std::size_t n = 50;
  double kappa = 0;  // 0: class default
  std::size_t m1 = 22, m2 = 28;
  std::string out;
  std::string reference;
};

struct ExperimentOptions {
  std::string type = "finite";
  std::string cls = "graded";
  std::size_t count = 200;
  std::size_t n = 50;
  std::size_t m1 = 22, m2 = 28;
  std::string precision;  // empty: binary32 for finite, binary64 for infinite
  unsigned jobs = 0;
  std::string out_dir = ".";
};

inline std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("QZ_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument(std::string("QZ_SEED is not an unsigned integer: '") + env + "'");
  }
  return 0;
}

namespace detail {

template <typename Real>
int solve_file(const SolveOptions& opt, std::ostream& out) {
  const auto pencil = load_pencil<Real>(opt.input);
  QzConfig cfg;
  cfg.finite = parse_finite_criterion(opt.criterion);
  cfg.infinite = opt.ultra_strict ? InfiniteCriterion::ultra_strict
                                  : parse_infinite_criterion(opt.infinite_criterion);
  cfg.accumulate_qz = opt.accumulate;
  cfg.max_iterations_per_eigenvalue = opt.max_iterations;
  const auto res = solve(pencil, cfg);
  write_eigenvalues(out, res.eigenvalues);
  out << "iterations " << res.total_iterations << '\n';
  if (opt.accumulate) {
    const auto r = relative_residuals(pencil, res.final_form);
    out << "residual_h " << qzdefl::detail::format_real(r.h) << '\n';
    out << "residual_t " << qzdefl::detail::format_real(r.t) << '\n';
  }
  if (!res.status.converged()) {
    out << "status failed_at " << res.status.failed_at << '\n';
    return exit_failed;
  }
  out << "status converged\n";
  return exit_ok;
}

inline std::string relative_error_text(const AccuracyReport& rep) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(3) << rep.max_relative_error;
  return s.str();
}

template <typename Real>
void run_example(std::ostream& out) {
  const auto pencil = example_3x3<Real>();
  const auto reference = example_3x3_reference();
  out << "precision " << to_string(precision_of<Real>::tag) << '\n';
  for (const auto c : all_finite_criteria) {
    QzConfig cfg;
    cfg.finite = c;
    const auto res = solve(pencil, cfg);
    const auto rep = match_and_error(res.eigenvalues, reference);
    out << std::left << std::setw(12) << to_string(c) << " sweeps " << res.total_iterations
        << "  max_rel_err " << relative_error_text(rep) << "  eigenvalues";
    for (const auto& e : res.eigenvalues) {
      const auto v = e.alpha / e.beta;
      out << ' ' << std::setprecision(8) << double(v.real());
    }
    out << '\n';
  }
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace detail

inline int cmd_solve(const SolveOptions& opt, std::ostream& out) {
  return parse_precision(opt.precision) == PrecisionTag::binary32
             ? detail::solve_file<float>(opt, out)
             : detail::solve_file<double>(opt, out);
}

inline int cmd_generate(const GenerateOptions& opt, std::uint64_t seed, std::ostream& out) {
  GenSpec spec;
  spec.cls = parse_pencil_class(opt.cls);
  spec.n = opt.n;
  if (opt.kappa != 0) spec.kappa = opt.kappa;
  spec.m1 = opt.m1;
  spec.m2 = opt.m2;
  if (spec.cls == PencilClass::sparse_b && opt.m1 + opt.m2 != opt.n) spec.n = opt.m1 + opt.m2;
  spec.seed = seed;
  const auto gen = generate(spec);

  std::ostringstream text;
  text << "# class " << to_string(spec.cls) << " seed " << seed << '\n';
  if (gen.expected_infinite) text << "# expected infinite eigenvalues " << *gen.expected_infinite << '\n';
  write_pencil(text, gen.pencil);
  if (opt.out.empty())
    out << text.str();
  else
    detail::write_file(opt.out, text.str());

  if (!opt.reference.empty()) {
    if (!gen.reference) throw std::invalid_argument("class has no reference eigenvalues");
    std::ostringstream ref;
    write_eigenvalues(ref, *gen.reference);
    detail::write_file(opt.reference, ref.str());
  }
  return exit_ok;
}

inline int cmd_experiment(const ExperimentOptions& opt, std::uint64_t seed, std::ostream& out) {
  namespace fs = std::filesystem;
  const fs::path dir(opt.out_dir);
  fs::create_directories(dir);
  const auto cls = parse_pencil_class(opt.cls);
  const std::string tag(to_string(cls));

  if (opt.type == "finite") {
    FiniteExperimentConfig cfg;
    cfg.cls = cls;
    cfg.count = opt.count;
    cfg.n = opt.n;
    cfg.seed = seed;
    cfg.jobs = opt.jobs;
    cfg.test_precision = opt.precision.empty() ? PrecisionTag::binary32 : parse_precision(opt.precision);
    const auto res = run_finite_experiment(cfg);
    std::ostringstream acc, it, sum;
    write_accuracy_csv(acc, res);
    write_iteration_csv(it, res);
    write_summary_csv(sum, res);
    detail::write_file(dir / ("accuracy_" + tag + ".csv"), acc.str());
    detail::write_file(dir / ("iterations_" + tag + ".csv"), it.str());
    detail::write_file(dir / ("summary_" + tag + ".csv"), sum.str());
    out << sum.str();
    return exit_ok;
  }
  if (opt.type == "infinite") {
    InfiniteExperimentConfig cfg;
    cfg.cls = cls;
    cfg.count = opt.count;
    cfg.n = opt.n;
    cfg.m1 = opt.m1;
    cfg.m2 = opt.m2;
    if (cls == PencilClass::sparse_b) cfg.n = opt.m1 + opt.m2;
    cfg.seed = seed;
    cfg.jobs = opt.jobs;
    cfg.precision = opt.precision.empty() ? PrecisionTag::binary64 : parse_precision(opt.precision);
    const auto res = run_infinite_experiment(cfg);
    std::ostringstream csv;
    write_infinite_csv(csv, res);
    detail::write_file(dir / ("infinite_" + tag + ".csv"), csv.str());
    out << "mean infinite count: normwise " << qzdefl::detail::fixed(res.mean(0), 2)
        << ", elementwise " << qzdefl::detail::fixed(res.mean(1), 2) << ", ultra-strict "
        << qzdefl::detail::fixed(res.mean(2), 2) << '\n';
    return exit_ok;
  }
  throw std::invalid_argument("unknown experiment type '" + opt.type + "'");
}

inline int cmd_example3x3(const std::string& precision, const std::string& write,
                          std::ostream& out) {
  if (!write.empty()) {
    std::ostringstream text;
    text << "# 3x3 pencil with eta = 1.1e-8, c = 1.1e5, d = 1e-2\n";
    write_pencil(text, example_3x3<double>());
    detail::write_file(write, text.str());
  }
  if (precision.empty() || precision == "both") {
    detail::run_example<float>(out);
    detail::run_example<double>(out);
  } else if (parse_precision(precision) == PrecisionTag::binary32) {
    detail::run_example<float>(out);
  } else {
    detail::run_example<double>(out);
  }
  return exit_ok;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"QZ eigensolver with selectable deflation criteria"};
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<std::uint64_t> seed_flag;
  app.add_option("--seed", seed_flag, "random seed (overrides QZ_SEED)");

  SolveOptions sopt;
  auto* solve_cmd = app.add_subcommand("solve", "compute the eigenvalues of a pencil file");
  solve_cmd->add_option("input", sopt.input, "pencil file")->required();
  solve_cmd->add_option("--criterion", sopt.criterion, "normwise | elementwise | strict")
      ->check(CLI::IsMember({"normwise", "elementwise", "strict"}));
  solve_cmd
      ->add_option("--infinite-criterion", sopt.infinite_criterion,
                   "normwise | elementwise | ultra-strict")
      ->check(CLI::IsMember({"normwise", "elementwise", "ultra-strict"}));
  solve_cmd->add_flag("--ultra-strict", sopt.ultra_strict,
                      "only deflate t(i,i) below the smallest subnormal");
  solve_cmd->add_option("--precision", sopt.precision, "binary32 | binary64")
      ->check(CLI::IsMember({"binary32", "binary64"}));
  solve_cmd->add_flag("--accumulate", sopt.accumulate, "accumulate Q and Z, print residuals");
  solve_cmd->add_option("--max-iterations", sopt.max_iterations, "sweeps per eigenvalue")
      ->check(CLI::PositiveNumber);

  GenerateOptions gopt;
  auto* gen_cmd = app.add_subcommand("generate", "write a test pencil");
  gen_cmd->add_option("--class", gopt.cls,
                      "unitary | nonunitary | graded | graded-beta | sparse-b | example3x3");
  gen_cmd->add_option("--n", gopt.n, "size");
  gen_cmd->add_option("--kappa", gopt.kappa, "eigenvector conditioning");
  gen_cmd->add_option("--m1", gopt.m1, "sparse-b block rows");
  gen_cmd->add_option("--m2", gopt.m2, "sparse-b block columns");
  gen_cmd->add_option("--out", gopt.out, "output file (default stdout)");
  gen_cmd->add_option("--reference", gopt.reference, "write reference eigenvalues here");

  ExperimentOptions eopt;
  auto* exp_cmd = app.add_subcommand("experiment", "run a batch experiment and write CSVs");
  exp_cmd->add_option("--type", eopt.type, "finite | infinite")
      ->check(CLI::IsMember({"finite", "infinite"}));
  exp_cmd->add_option("--class", eopt.cls, "pencil class");
  exp_cmd->add_option("--count", eopt.count, "number of pencils")->check(CLI::PositiveNumber);
  exp_cmd->add_option("--n", eopt.n, "pencil size");
  exp_cmd->add_option("--m1", eopt.m1, "sparse-b block rows");
  exp_cmd->add_option("--m2", eopt.m2, "sparse-b block columns");
  exp_cmd->add_option("--precision", eopt.precision, "working precision of the tested runs")
      ->check(CLI::IsMember({"binary32", "binary64"}));
  exp_cmd->add_option("--jobs", eopt.jobs, "worker threads (0: all cores)");
  exp_cmd->add_option("--out-dir", eopt.out_dir, "directory for the CSV files");

  std::string ex_precision, ex_write;
  auto* ex_cmd = app.add_subcommand("example3x3", "run the 3x3 example under every criterion");
  ex_cmd->add_option("--precision", ex_precision, "binary32 | binary64 | both")
      ->check(CLI::IsMember({"binary32", "binary64", "both"}));
  ex_cmd->add_option("--write", ex_write, "also write the pencil to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*solve_cmd) return cmd_solve(sopt, out);
    if (*gen_cmd) return cmd_generate(gopt, resolve_seed(seed_flag), out);
    if (*exp_cmd) return cmd_experiment(eopt, resolve_seed(seed_flag), out);
    if (*ex_cmd) return cmd_example3x3(ex_precision, ex_write, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_io;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << '\n';
    return exit_io;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_io;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_io;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_io;
  }
  return exit_usage;
}

}  // namespace qzdefl::cli
