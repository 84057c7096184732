#pragma once

#include "specsys/structure.hpp"

namespace specsys {

/// Characteristic matrix of a regular self-adjoint problem: n_+ boundary
/// rows A_a U(a,lambda) + A_b U(b,lambda) stacked over an orthonormal row
/// basis of N0. Invertible exactly off the spectrum.
Matrix assemble_F(const SpectralProblem& p, const KernelData& k,
                  const BoundaryConditions& bc, Complex lambda,
                  const IvpOptions& ivp = {});

/// Matrix Herglotz function of the problem. Two algebraically independent
/// evaluation routes exist (through the upper or lower endpoint data); they
/// agree on the resolvent set and the discrepancy is reported for tests.
class MFunction {
 public:
  MFunction(const SpectralProblem& p, const KernelData& k, const BoundaryConditions& bc,
            IvpOptions ivp = {});

  Matrix operator()(Complex lambda) const { return eval_upper(lambda); }
  Matrix eval_upper(Complex lambda) const;  // through A_b U(b,lambda)
  Matrix eval_lower(Complex lambda) const;  // through A_a U(a,lambda)

  const SpectralProblem& problem() const { return *p_; }
  const KernelData& kernel() const { return k_; }
  const BoundaryConditions& bc() const { return bc_; }
  const IvpOptions& ivp() const { return ivp_; }

 private:
  friend class GreenKernel;
  std::shared_ptr<const SpectralProblem> p_;
  KernelData k_;
  BoundaryConditions bc_;
  IvpOptions ivp_;
};

MFunction m_function(const SpectralProblem& p, const KernelData& k,
                     const BoundaryConditions& bc, const IvpOptions& ivp = {});

/// Green's kernel  G(x,y,lambda) = U(x,lambda) H(x,y,lambda) U(y,conj)^*.
class GreenKernel {
 public:
  GreenKernel(const MFunction& mf, Complex lambda);
  Matrix operator()(double x, double y) const;
  Complex lambda() const { return lambda_; }

 private:
  std::shared_ptr<const SpectralProblem> p_;
  Matrix M_, P_, Jinv_;
  Complex lambda_;
  std::shared_ptr<FundamentalMatrix> U_, Ubar_;
  MatrixMeasure r_;
};

GreenKernel green_kernel(const SpectralProblem& p, const KernelData& k,
                         const BoundaryConditions& bc, Complex lambda,
                         const IvpOptions& ivp = {});

/// Resolvent application: the unique balanced v with J v' + q v = w (lambda
/// v + f), the boundary conditions, and (1-P) v(x0) = 0.
BalancedSolution resolvent_apply(const SpectralProblem& p, const KernelData& k,
                                 const BoundaryConditions& bc, Complex lambda,
                                 const VectorFn& f, const IvpOptions& ivp = {},
                                 const QuadOptions& quad = {});

struct EigOptions {
  int initial_cells = 800;
  double locate_tol = 1e-12;   // relative bracket width for pole bisection
  double rank_tol = 1e-8;      // singular-value threshold on F for multiplicity
  double lambda_margin = 1e-6; // refuse windows this close to the forbidden set
  double residue_tol = 1e-9;
  double max_residue_radius = 0.1;
};

struct SpectralMeasure {
  struct Point {
    double lambda;
    int multiplicity;
    Matrix weight;              // Delta_nu, Hermitian PSD
    double hermiticity_defect;  // |Delta - Delta^*|_1 / 2 before symmetrizing
  };
  std::vector<Point> points;  // increasing lambda
  double window_lo = 0, window_hi = 0;
  Matrix P;
};

/// Real eigenvalues in [lo,hi]: located by monotonicity breaks of Herglotz
/// traces of M plus smallest-singular-value dips of F, refined by bisection.
/// Multiplicities are rank deficiencies of F. Weights left empty.
SpectralMeasure eigenvalues(const MFunction& mf, double lo, double hi,
                            const EigOptions& opt = {});

/// Residue of the Herglotz function at an isolated eigenvalue by a circular
/// contour, doubled until stable; returns the symmetrized weight.
Matrix residue_weights(const MFunction& mf, double lambda_n, double radius,
                       const EigOptions& opt = {}, double* defect = nullptr);

/// eigenvalues + residue weights with the standard radius policy
/// min(gap/4, dist-to-forbidden/4, cap).
SpectralMeasure spectral_measure(const MFunction& mf, double lo, double hi,
                                 const EigOptions& opt = {});

}  // namespace specsys
