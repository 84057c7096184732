#pragma once

#include "specsys/ode.hpp"
#include "specsys/problem.hpp"

#include <memory>
#include <mutex>

namespace specsys {

/// Balanced solution of  U' = r U + g  on a range around the initial point.
/// Holds one-sided and balanced values at every atom and dense output in
/// between; the state may be a vector or a matrix of columns. Solutions
/// produced by integral formulas are backed by closures instead.
class BalancedSolution {
 public:
  BalancedSolution() = default;

  static BalancedSolution from_closures(RealInterval domain, double lo, double hi,
                                        double x0, MatrixFn value, MatrixFn left,
                                        MatrixFn right, std::vector<double> atom_xs);

  Matrix value(double x) const;  // balanced
  Matrix left(double x) const;
  Matrix right(double x) const;

  double range_lo() const { return lo_; }
  double range_hi() const { return hi_; }
  double initial_point() const { return x0_; }

  /// One-sided limit at the edge of the solved range.
  Matrix endpoint_value(Endpoint e) const;

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<Matrix>& values() const { return values_; }
  const std::vector<double>& atom_locations() const { return atom_xs_; }
  double achieved_tolerance() const { return achieved_tol_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  friend class IvpBuilder;
  struct AtomRecord {
    double x;
    Matrix left, balanced, right;
  };
  std::vector<OdeTrajectory> segments_;  // increasing x order
  std::vector<AtomRecord> atom_records_;
  std::vector<double> atom_xs_;
  std::vector<double> grid_;
  std::vector<Matrix> values_;
  Matrix initial_value_;
  MatrixFn fn_value_, fn_left_, fn_right_;  // closure-backed variant
  double lo_ = 0, hi_ = 0, x0_ = 0;
  double achieved_tol_ = 0;
  std::vector<std::string> warnings_;
  RealInterval domain_{0, 1};
};

/// Solve the balanced initial value problem U' = rU + g, U(x0) = u0 on
/// [lo,hi] (which must contain x0). g may be null. Atom crossings use exact
/// linear solves; a singular 1 +/- Delta_r/2 at a crossed atom raises
/// LambdaForbiddenError.
BalancedSolution solve_ivp_balanced(const MatrixMeasure& r, const MatrixMeasure* g,
                                    double x0, const Matrix& u0, double lo, double hi,
                                    const IvpOptions& opt = {});

/// Fundamental matrix U(., lambda) of J u' + q u = lambda w u with
/// U(x0, lambda) = 1. Evaluation extends an internal dense cache lazily;
/// the cache is synchronized, so one instance may be shared across threads.
class FundamentalMatrix {
 public:
  FundamentalMatrix(const SpectralProblem& p, Complex lambda, IvpOptions opt = {});

  Matrix value(double x) const;
  Matrix left(double x) const;
  Matrix right(double x) const;
  /// Limit at an interval endpoint (Lower = a, Upper = b).
  Matrix endpoint_value(Endpoint e) const;

  Complex lambda() const { return lambda_; }
  const SpectralProblem& problem() const { return *p_; }

 private:
  const BalancedSolution& ensure(double lo, double hi) const;

  const SpectralProblem* p_;
  Complex lambda_;
  IvpOptions opt_;
  MatrixMeasure r_;  // J^{-1}(lambda w - q)
  mutable std::mutex mu_;
  mutable std::shared_ptr<const BalancedSolution> sol_;
  mutable double cov_lo_, cov_hi_;
};

/// The coefficient measure r = J^{-1} (lambda w - q).
MatrixMeasure coefficient_measure(const SpectralProblem& p, Complex lambda);

struct LambdaPoint {
  Complex lambda;
  double atom_location;
  int sign;  // +1: det(2J + Delta_{lambda w - q}) = 0, -1: the mirrored pencil
};

struct LambdaSet {
  std::vector<LambdaPoint> points;
  int infinite_count = 0;  // pencil eigenvalues at infinity (flagged, not listed)
  bool closed_and_isolated = true;  // finite atom lists give finite sets

  bool real_axis_clear(double tol = 1e-9) const {
    for (const auto& p : points)
      if (std::abs(p.lambda.imag()) <= tol) return false;
    return true;
  }
  double distance_to(Complex z) const {
    double d = kInf;
    for (const auto& p : points) d = std::min(d, std::abs(p.lambda - z));
    return d;
  }
};

/// All lambda for which 2J +/- Delta_{lambda w - q}(x) is singular at some
/// atom, computed per atom as eigenvalues of a shifted pencil.
LambdaSet lambda_set(const SpectralProblem& p);

/// Direct membership test on the evaluation range [lo,hi]. Returns the
/// offending atom location through `where` when forbidden.
bool lambda_forbidden(const SpectralProblem& p, Complex lambda, double lo, double hi,
                      double* where = nullptr);

struct WronskianReport {
  std::vector<Matrix> plus_values;   // u^{+*} J v^{+} per grid point
  std::vector<Matrix> minus_values;  // u^{-*} J v^{-}
  Matrix mean;
  double max_deviation;  // entrywise 1-norm distance to the mean
};

/// Constancy check of u^{+*} J v^{+} = u^{-*} J v^{-} for u solving the
/// conjugate equation and v the plain one, sampled on a common grid.
WronskianReport wronskian(const BalancedSolution& u, const BalancedSolution& v,
                          const Matrix& J, const std::vector<double>& grid);

/// Solution of J u' + q u = lambda w u + w f with u(x0) = 0, built from the
/// fundamental matrix by the variation of constants integral.
BalancedSolution variation_of_constants(const SpectralProblem& p, Complex lambda,
                                        const VectorFn& f, double lo, double hi,
                                        const IvpOptions& opt = {},
                                        const QuadOptions& quad = {});

struct DlambdaReport {
  Matrix derivative;        // Richardson-refined central difference
  double richardson_ratio;  // coarse/fine error ratio, approx 4 when smooth
  double step;
};

/// Finite-difference probe of the analyticity of U(x, .) at lambda0.
DlambdaReport dlambda_check(const SpectralProblem& p, Complex lambda0, double x,
                            double step = 1e-4, const IvpOptions& opt = {});

}  // namespace specsys
