#pragma once

#include "specsys/measure.hpp"

namespace specsys {

/// The system  J u' + q u = lambda w u + w f  on an interval, with a fixed
/// anchor point x0 at which fundamental matrices are normalized to the
/// identity. Construction enforces the coefficient hypotheses.
class SpectralProblem {
 public:
  SpectralProblem(RealInterval interval, Matrix J, MatrixMeasure q, MatrixMeasure w,
                  double x0);

  const RealInterval& interval() const { return interval_; }
  const Matrix& J() const { return J_; }
  const Matrix& J_inverse() const { return J_inv_; }
  const MatrixMeasure& q() const { return q_; }
  const MatrixMeasure& w() const { return w_; }
  double x0() const { return x0_; }
  int size() const { return n_; }
  const ValidationReport& report() const { return report_; }

  bool regular_at(Endpoint e) const {
    return q_.regular_at(e) && w_.regular_at(e);
  }
  bool regular() const {
    return regular_at(Endpoint::Lower) && regular_at(Endpoint::Upper);
  }

  /// Finite range that carries all mass of q and w; evaluation beyond it
  /// extends solutions as constants. Both ends clamped into the interval.
  std::pair<double, double> effective_range() const;

  /// Atom locations and piece edges of q and w in [lo,hi]: the solution
  /// discontinuity / kink points every pairing integral should split at.
  std::vector<double> coefficient_breakpoints(double lo, double hi) const;

  /// A copy anchored at a different continuity point.
  SpectralProblem with_anchor(double new_x0) const;

 private:
  RealInterval interval_;
  Matrix J_, J_inv_;
  MatrixMeasure q_, w_;
  double x0_;
  int n_;
  ValidationReport report_;
};

}  // namespace specsys
