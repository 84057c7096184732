#pragma once

#include "specsys/types.hpp"

namespace specsys {

/// Adaptive Gauss-Kronrod 15(7) quadrature of a matrix-valued integrand on a
/// finite interval. The error estimate is the entrywise 1-norm of the
/// difference between the Kronrod and embedded Gauss values.
Matrix gk15_adaptive(const MatrixFn& f, double a, double b, int rows, int cols,
                     const QuadOptions& opt = {});

/// Single non-adaptive Kronrod panel with error estimate (building block,
/// exposed for tests).
Matrix gk15_panel(const MatrixFn& f, double a, double b, double* err);

}  // namespace specsys
