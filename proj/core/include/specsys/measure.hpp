#pragma once

#include "specsys/quadrature.hpp"
#include "specsys/types.hpp"

#include <optional>

namespace specsys {

/// Point mass of a matrix-valued measure.
struct Atom {
  double location;
  Matrix jump;
};

/// Absolutely continuous part on one sub-interval. The density is either a
/// polynomial in x with matrix coefficients (serializable) or an arbitrary
/// evaluator (API use only).
struct Piece {
  double left;
  double right;
  std::vector<Matrix> poly;  // density(x) = sum_k poly[k] * x^k, lowest first
  MatrixFn evaluator;        // used when poly is empty

  bool is_polynomial() const { return !poly.empty(); }
  Matrix density(double x) const;
};

/// Matrix-valued distribution of order 0 on an interval: finitely many
/// piecewise densities plus finitely many atoms. Immutable after
/// construction; all operations are pure.
class MatrixMeasure {
 public:
  MatrixMeasure(RealInterval interval, int rows, int cols,
                std::vector<Piece> pieces, std::vector<Atom> atoms);

  static MatrixMeasure zero(RealInterval interval, int rows, int cols);
  /// Constant density on the whole interval.
  static MatrixMeasure constant_density(RealInterval interval, const Matrix& value);
  static MatrixMeasure point_mass(RealInterval interval, double x, const Matrix& jump);

  const RealInterval& interval() const { return interval_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  /// Antiderivative Q normalized so that the balanced value at the reference
  /// point is zero.
  Matrix antiderivative(double x, Side side = Side::Balanced) const;
  double reference_point() const { return ref_; }

  /// Atom matrix at x (zero when x carries no mass).
  Matrix jump_at(double x) const;
  bool has_atom_at(double x) const { return atom_index(x).has_value(); }

  /// Total variation of the antiderivative over [c,d] in the entrywise
  /// 1-norm; atoms in the closed interval count fully.
  double variation(double c, double d, const QuadOptions& opt = {}) const;

  /// Density value at x (zero off all pieces).
  Matrix density_at(double x) const;

  /// Measure of the half-open interval [c,d) (densities + atoms).
  Matrix mass(double c, double d, const QuadOptions& opt = {}) const;

  /// Piece edges and atom locations inside [lo,hi], sorted, deduplicated.
  std::vector<double> breakpoints(double lo, double hi) const;

  /// Smallest interval carrying all pieces and atoms. Empty measure gives
  /// an empty hull (lo > hi).
  std::pair<double, double> support_hull() const;
  bool is_zero() const { return pieces_.empty() && atoms_.empty(); }

  /// True when Q has bounded variation near the endpoint (always true at a
  /// finite endpoint for this representation).
  bool regular_at(Endpoint e) const;

  MatrixMeasure conjugate_transpose() const;

 private:
  std::optional<std::size_t> atom_index(double x) const;

  RealInterval interval_;
  int rows_, cols_;
  std::vector<Piece> pieces_;  // sorted by left edge, non-overlapping
  std::vector<Atom> atoms_;    // sorted by location, distinct
  double ref_;                 // reference point for the antiderivative
};

/// Stieltjes integral  int_{[c,d]} F dM G  with the stated end convention.
/// F and G may be null (treated as identity). Atoms contribute
/// F(x) * jump * G(x); the density part is integrated adaptively.
Matrix stieltjes_integrate(const MatrixFn& F, const MatrixMeasure& m, const MatrixFn& G,
                           double c, double d, Ends ends = Ends::ClosedClosed,
                           const QuadOptions& opt = {});

/// int_{[c,d]} f dM (spec surface; atoms contribute f(x) * jump).
Matrix stieltjes_integrate(const MatrixFn& f, const MatrixMeasure& m,
                           double c, double d, Ends ends = Ends::ClosedClosed,
                           const QuadOptions& opt = {});

/// Same integral with the range split at the given discontinuity points of
/// F or G (typically the atoms of the problem coefficients), so that every
/// quadrature panel sees a smooth integrand. Atoms on a split point count
/// exactly once.
Matrix stieltjes_integrate_split(const MatrixFn& F, const MatrixMeasure& m,
                                 const MatrixFn& G, double c, double d, Ends ends,
                                 const std::vector<double>& splits,
                                 const QuadOptions& opt = {});

/// Build the order-0 distribution m*f (density(x)*f(x) dx plus jump*f(x)
/// atoms), optionally multiplied by a constant matrix on the left.
MatrixMeasure measure_times_function(const MatrixMeasure& m, const VectorFn& f,
                                     const Matrix* left = nullptr);

/// Checks of the standing coefficient hypotheses: J invertible and
/// skew-Hermitian, q Hermitian, w non-negative, 2J +/- Delta_q(x) invertible
/// at every atom of q. Densities are sampled at quadrature nodes and piece
/// endpoints.
ValidationReport validate_coefficients(const MatrixMeasure& q, const MatrixMeasure& w,
                                       const Matrix& J);

}  // namespace specsys
