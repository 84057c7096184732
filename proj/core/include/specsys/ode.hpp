#pragma once

#include "specsys/types.hpp"

namespace specsys {

/// One accepted step of the embedded pair together with its interpolant
/// coefficients. The interpolant is the standard fourth-order polynomial of
/// the Dormand-Prince 5(4) scheme.
struct OdeStep {
  double x0;
  double h;  // signed
  Matrix r1, r2, r3, r4, r5;

  Matrix eval(double x) const {
    double th = (x - x0) / h;
    double th1 = 1.0 - th;
    return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
  }
};

/// Dense-output trajectory of a smooth segment, traversed monotonically in
/// either direction.
struct OdeTrajectory {
  double x_begin = 0.0, x_end = 0.0;
  std::vector<OdeStep> steps;  // in traversal order
  Matrix y_begin, y_end;
  double max_error_estimate = 0.0;

  bool covers(double x) const {
    return (x_begin <= x && x <= x_end) || (x_end <= x && x <= x_begin);
  }
  Matrix eval(double x) const;
};

/// Integrate Y' = rhs(x, Y) from (x0, y0) to x1 with the adaptive
/// Dormand-Prince 4/5 pair. Works on complex matrix states of any shape;
/// x1 may lie on either side of x0.
OdeTrajectory integrate_ode(const std::function<Matrix(double, const Matrix&)>& rhs,
                            double x0, double x1, const Matrix& y0,
                            const IvpOptions& opt = {});

}  // namespace specsys
