#pragma once

// Plain-text pencil and eigenvalue files.
//
//   n
//   re im  re im ...   (n*n entries of H, row by row)
//   re im  re im ...   (n*n entries of T, row by row)
//
// Lines starting with '#' are comments. Whitespace and line breaks between
// numbers are free-form.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qzdefl/core.hpp"
#include "qzdefl/pencil.hpp"

namespace qzdefl {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

/// Shortest decimal form that reads back to the same value.
template <typename Real>
std::string format_real(Real x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string> tokens(std::istream& in) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) out.push_back(tok);
  }
  return out;
}

inline double parse_double(const std::string& tok) {
  double v = 0;
  const auto* end = tok.data() + tok.size();
  const auto res = std::from_chars(tok.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) throw ParseError("not a number: '" + tok + "'");
  return v;
}

}  // namespace detail

template <typename Real>
void write_pencil(std::ostream& out, const Pencil<Real>& p) {
  const index_t n = p.size();
  out << n << '\n';
  for (const auto* m : {&p.h, &p.t}) {
    for (index_t i = 0; i < n; ++i) {
      for (index_t j = 0; j < n; ++j) {
        if (j) out << "  ";
        out << detail::format_real((*m)(i, j).real()) << ' '
            << detail::format_real((*m)(i, j).imag());
      }
      out << '\n';
    }
  }
}

/// Reads a pencil; values are parsed in binary64 and rounded to Real.
template <typename Real>
Pencil<Real> read_pencil(std::istream& in) {
  const auto tok = detail::tokens(in);
  if (tok.empty()) throw ParseError("empty pencil file");
  std::size_t n = 0;
  {
    const auto& s = tok[0];
    const auto res = std::from_chars(s.data(), s.data() + s.size(), n);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || n == 0)
      throw ParseError("first entry must be a positive size, got '" + s + "'");
  }
  if (n > 100000) throw ParseError("pencil size too large");
  const std::size_t expected = 1 + 4 * n * n;
  if (tok.size() != expected)
    throw ParseError("expected " + std::to_string(expected - 1) + " numbers for n = " +
                     std::to_string(n) + ", found " + std::to_string(tok.size() - 1));
  Matrix<Real> h(n, n), t(n, n);
  std::size_t k = 1;
  for (auto* m : {&h, &t})
    for (index_t i = 0; i < n; ++i)
      for (index_t j = 0; j < n; ++j) {
        const double re = detail::parse_double(tok[k++]);
        const double im = detail::parse_double(tok[k++]);
        (*m)(i, j) = Complex<Real>(Real(re), Real(im));
      }
  return Pencil<Real>(std::move(h), std::move(t));
}

template <typename Real>
void write_eigenvalues(std::ostream& out, const std::vector<EigPair<Real>>& eig) {
  for (const auto& e : eig)
    out << detail::format_real(e.alpha.real()) << ' ' << detail::format_real(e.alpha.imag())
        << ' ' << detail::format_real(e.beta.real()) << ' '
        << detail::format_real(e.beta.imag()) << '\n';
}

inline std::vector<EigPair<double>> read_eigenvalues(std::istream& in) {
  const auto tok = detail::tokens(in);
  if (tok.size() % 4 != 0) throw ParseError("eigenvalue file needs 4 numbers per line");
  std::vector<EigPair<double>> out;
  for (std::size_t k = 0; k < tok.size(); k += 4)
    out.push_back({{detail::parse_double(tok[k]), detail::parse_double(tok[k + 1])},
                   {detail::parse_double(tok[k + 2]), detail::parse_double(tok[k + 3])}});
  return out;
}

template <typename Real>
Pencil<Real> load_pencil(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_pencil<Real>(in);
}

}  // namespace qzdefl
