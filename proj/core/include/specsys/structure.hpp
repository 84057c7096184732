#pragma once

#include "specsys/ivp.hpp"

namespace specsys {

/// Null directions of the problem: solutions of Ju'+qu=0 with vanishing
/// w-norm, described through their values at the anchor point.
struct KernelData {
  int kernel_dim = 0;    // dim of the w-null solution space
  Matrix N0_basis;       // n x k, orthonormal columns spanning N0
  Matrix range_basis;    // n x (n-k), orthonormal columns spanning N0-perp
  Matrix P;              // orthogonal projector onto N0-perp
  Matrix gram;           // int U(.,0)^* w U(.,0)
};

/// Gram matrix of the zero-energy fundamental system; its numerical
/// nullspace yields N0 and the projector P. Requires regular endpoints.
KernelData compute_kernel(const SpectralProblem& p, const QuadOptions& quad = {},
                          const IvpOptions& ivp = {});

/// n_+ = n_- = n - dim(kernel) when both endpoints are regular.
std::pair<int, int> deficiency_indices_regular(const SpectralProblem& p,
                                               const KernelData& k);

enum class BcClass { Separated, Coupled, Mixed };

/// Validated self-adjoint boundary-condition matrix acting on (u(a); u(b)).
/// A_tilde is the matrix as supplied; A_canonical is its representative with
/// rows drawn from the admissible boundary space (the two act identically on
/// every achievable boundary datum, and all internal computation uses the
/// canonical form).
struct BoundaryConditions {
  Matrix A_tilde;      // n_+ x 2n, as supplied
  Matrix A_canonical;  // n_+ x 2n, rows in (J2 W)^*
  int n_plus = 0;
  BcClass classification = BcClass::Separated;

  Matrix block_a() const { return A_canonical.leftCols(A_canonical.cols() / 2); }
  Matrix block_b() const { return A_canonical.rightCols(A_canonical.cols() / 2); }
};

struct BoundaryRejection : ValidationError {
  BoundaryRejection(const std::string& msg, ValidationReport rep)
      : ValidationError(msg + "\n" + rep.summary()), report(std::move(rep)) {}
  ValidationReport report;
};

/// Boundary values of the deficiency solution spaces at +/-i: the 2n x
/// 2(n-k) matrix whose columns span the space W of admissible boundary data.
Matrix boundary_space_W(const SpectralProblem& p, const KernelData& k,
                        const IvpOptions& ivp = {});

/// Accept A iff it has n_+ rows, annihilates the boundary data of the
/// w-null solutions, acts with full rank on W, and its canonical
/// representative satisfies A J2^{-1} A^* = 0 (J2 = diag(J,-J)). Throws
/// BoundaryRejection naming every failed check.
BoundaryConditions validate_boundary_conditions(const SpectralProblem& p,
                                                const KernelData& k, const Matrix& A,
                                                const IvpOptions& ivp = {});

/// Self-adjoint boundary conditions from a unitary parameter (n-k square):
/// every self-adjoint restriction arises from some unitary V.
Matrix self_adjoint_bc_from_unitary(const SpectralProblem& p, const KernelData& k,
                                    const Matrix& V, const QuadOptions& quad = {},
                                    const IvpOptions& ivp = {});

/// A pair (u, f) with J u' + q u = w f (any spectral shift folded into f).
struct EquationPair {
  BalancedSolution u;
  VectorFn f;
};

/// L2(w) pairing of two functions over the whole interval, atoms taken at
/// the (balanced) function values.
Matrix inner_product_w(const SpectralProblem& p, const MatrixFn& x, const MatrixFn& y,
                       const QuadOptions& quad = {});

double w_norm(const SpectralProblem& p, const VectorFn& f, const QuadOptions& quad = {});

/// Max over consecutive grid cells [s,t) of | J(u-(t)-u-(s)) + int dQ u -
/// int dW f |, the defect of J u' + q u = w f as measures.
double equation_residual(const SpectralProblem& p, const BalancedSolution& u,
                         const VectorFn& f_total, int grid_points = 17,
                         const QuadOptions& quad = {});

/// Both sides of Green's formula: (v^*Ju)^-(b) - (v^*Ju)^+(a) - (<v,f> -
/// <g,u>). Pairs are verified to satisfy their equations first.
Complex lagrange_residual(const SpectralProblem& p, const EquationPair& uf,
                          const EquationPair& vg, const QuadOptions& quad = {});

}  // namespace specsys
