#pragma once

#include "specsys/greens.hpp"

namespace specsys {

/// Transform coefficients over the eigenvalues of a spectral measure window.
struct TransformResult {
  std::vector<double> lambdas;
  std::vector<Vector> coefficients;  // one per eigenvalue, in ran P
  double tail_energy = 0.0;          // |f|_w^2 - sum fhat^* Dnu fhat
};

/// Forward transform: fhat_n = int U(.,lambda_n)^* w f, atoms contributing
/// through the balanced fundamental matrix values.
TransformResult fourier(const SpectralProblem& p, const SpectralMeasure& sm,
                        const VectorFn& f, const QuadOptions& quad = {},
                        const IvpOptions& ivp = {});

/// Pointwise transform int U(., conj(lambda))^* w f at one spectral value.
Vector fourier_at(const SpectralProblem& p, Complex lambda, const VectorFn& f,
                  const QuadOptions& quad = {}, const IvpOptions& ivp = {});

/// Inverse transform evaluator: x -> sum_n U(x,lambda_n) Dnu_n c_n.
VectorFn inverse(const SpectralProblem& p, const SpectralMeasure& sm,
                 const std::vector<Vector>& coefficients, const IvpOptions& ivp = {});

struct ParsevalReport {
  Complex lhs;      // <f, P g>_w with P realized as inverse(forward(.))
  Complex rhs;      // sum fhat^* Dnu ghat
  double residual;  // |lhs - rhs|
  double tail_f, tail_g;
};

ParsevalReport parseval_check(const SpectralProblem& p, const SpectralMeasure& sm,
                              const VectorFn& f, const VectorFn& g,
                              const QuadOptions& quad = {}, const IvpOptions& ivp = {});

/// For a pair (u,f) in the relation (equation + boundary conditions), the
/// transform must satisfy fhat_n = lambda_n uhat_n.
double diagonalization_check(const SpectralProblem& p, const SpectralMeasure& sm,
                             const BoundaryConditions& bc, const BalancedSolution& u,
                             const VectorFn& f, const QuadOptions& quad = {},
                             const IvpOptions& ivp = {});

}  // namespace specsys
