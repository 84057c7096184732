#pragma once

#include "specsys/greens.hpp"

#include <optional>

namespace specsys {

enum class WeylVerdict { LimitPoint, LimitCircle, Undecided };

struct TruncationDiag {
  double cut;          // truncation point b_k (or a_k)
  double norm_min;     // eigenvalues of the solution Gram on the nested range
  double norm_max;
  double disk_radius;  // Weyl disk radius 1/(2 Im(lambda) |phi|^2), alpha = 0
};

struct WeylClassification {
  Endpoint endpoint;
  WeylVerdict verdict = WeylVerdict::Undecided;
  std::vector<TruncationDiag> diagnostics;
  std::string reason;
};

/// Endpoint dichotomy for 2x2 systems with real J = beta [[0,-1],[1,0]] and
/// real q, w: limit-circle iff every solution of Ju'+qu = lambda w u has
/// finite w-norm near the endpoint. Decided from Gram growth over nested
/// intervals; growth past the budget without a verdict gives Undecided.
WeylClassification classify_endpoint(const SpectralProblem& p, Endpoint e,
                                     Complex lambda_probe, const QuadOptions& quad = {},
                                     const IvpOptions& ivp = {});

/// beta with J = beta [[0,-1],[1,0]]; throws unless the problem is a real
/// 2x2 system of this form.
double beta_of(const SpectralProblem& p);

/// Row fragment of the separated condition cos(a) u1 - sin(a) u2 = 0 at one
/// endpoint (the paper normalization at a regular endpoint).
Eigen::RowVector2cd separated_condition(double alpha);

/// Assemble the full boundary-condition matrix from separated conditions.
/// An alpha may only be supplied at a regular or limit-circle endpoint; a
/// condition at a limit-point endpoint is refused. Row count must match
/// the deficiency index.
Matrix apply_separated(const SpectralProblem& p, const KernelData& k,
                       const WeylClassification& cls_a, const WeylClassification& cls_b,
                       std::optional<double> alpha_a, std::optional<double> alpha_b);

struct TitchmarshWeylResult {
  Complex m;            // accepted value (route ii after extrapolation)
  Complex route_contraction;  // via truncated regular M-functions
  Complex route_disk_center;  // via the L2-minimizing coefficient
  double disagreement;
  int truncations_used;
  std::vector<double> cuts;
};

/// Titchmarsh-Weyl coefficient for a regular at a, limit-point at b problem
/// (beta = 1, x0 = a): theta + m phi is the w-square-integrable solution.
/// Computed two ways and cross-checked.
TitchmarshWeylResult m_function_2x2(const SpectralProblem& p, double alpha,
                                    Complex lambda, const QuadOptions& quad = {},
                                    const IvpOptions& ivp = {},
                                    double agree_tol = 1e-5);

/// Number of directions whose solutions lie in L2(w) over the whole
/// interval, estimated from nested Gram growth (test support for the
/// deficiency-index trichotomy).
int global_l2_solution_count(const SpectralProblem& p, Complex lambda_probe,
                             const QuadOptions& quad = {}, const IvpOptions& ivp = {});

/// Generalized boundary vector at a limit-circle endpoint:
/// (v1^*Ju, v2^*Ju) limits computed through the Lagrange pairing integral.
/// v1, v2 are real solutions of Ju'+qu=0 with v1^*J v2 = -1/beta.
Vector lc_boundary_vector(const SpectralProblem& p, const BalancedSolution& u,
                          const VectorFn& f, Endpoint e, const BalancedSolution& v1,
                          const BalancedSolution& v2, const WeylClassification& cls,
                          const QuadOptions& quad = {});

/// Real zero-energy solutions with the paper normalization at a regular
/// endpoint: v1(a) = (0, 1/beta), v2(a) = (-1/beta, 0).
std::pair<BalancedSolution, BalancedSolution> default_lc_frame(
    const SpectralProblem& p, Endpoint e, const IvpOptions& ivp = {});

}  // namespace specsys
