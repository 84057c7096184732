#pragma once

#include "specsys/problem.hpp"

#include <optional>

namespace specsys {

/// Parsed problem-definition file: interval, J, the measures q and w as
/// piecewise-polynomial densities plus atoms, an optional boundary matrix
/// and an optional piecewise-polynomial function f.
struct ProblemFile {
  double a = 0, b = 1;
  int n = 0;
  double x0 = 0;
  Matrix J;
  std::vector<Piece> q_pieces, w_pieces;
  std::vector<Atom> q_atoms, w_atoms;
  std::optional<Matrix> boundary;
  std::vector<Piece> f_pieces;  // n x 1 coefficient columns

  MatrixMeasure q_measure() const;
  MatrixMeasure w_measure() const;
  SpectralProblem problem() const;
  bool has_f() const { return !f_pieces.empty(); }
  /// Piecewise-polynomial evaluator of the f block (zero off its pieces).
  VectorFn f_function() const;
};

/// Complex number in the wire format "re+imj" with 17 significant digits.
std::string format_complex(Complex z);
Complex parse_complex(const std::string& token);

std::string format_double(double x);  // handles -inf / inf

ProblemFile parse_problem(const std::string& text);
ProblemFile parse_problem_file(const std::string& path);

/// Canonical serialization; parse -> serialize -> parse is the identity and
/// serialize -> parse -> serialize is byte-stable.
std::string serialize_problem(const ProblemFile& pf);

}  // namespace specsys
