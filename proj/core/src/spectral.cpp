#include "specsys/spectral.hpp"

#include <cmath>

namespace specsys {

TransformResult fourier(const SpectralProblem& p, const SpectralMeasure& sm,
                        const VectorFn& f, const QuadOptions& quad,
                        const IvpOptions& ivp) {
  TransformResult out;
  auto [lo, hi] = p.effective_range();
  MatrixFn ff = [f](double t) { return Matrix(f(t)); };
  auto splits = p.coefficient_breakpoints(lo, hi);
  for (const auto& pt : sm.points) {
    FundamentalMatrix U(p, Complex(pt.lambda, 0.0), ivp);
    MatrixFn ustar = [&U](double t) { return Matrix(U.value(t).adjoint()); };
    Matrix c = stieltjes_integrate_split(ustar, p.w(), ff, lo, hi, Ends::ClosedClosed,
                                         splits, quad);
    out.lambdas.push_back(pt.lambda);
    out.coefficients.push_back(Vector(c.col(0)));
  }
  double captured = 0.0;
  for (std::size_t i = 0; i < out.coefficients.size(); ++i)
    captured += (out.coefficients[i].adjoint() * sm.points[i].weight *
                 out.coefficients[i])(0, 0)
                    .real();
  double total = w_norm(p, f, quad);
  out.tail_energy = total * total - captured;
  return out;
}

Vector fourier_at(const SpectralProblem& p, Complex lambda, const VectorFn& f,
                  const QuadOptions& quad, const IvpOptions& ivp) {
  auto [lo, hi] = p.effective_range();
  FundamentalMatrix U(p, std::conj(lambda), ivp);
  MatrixFn ustar = [&U](double t) { return Matrix(U.value(t).adjoint()); };
  MatrixFn ff = [f](double t) { return Matrix(f(t)); };
  return Vector(stieltjes_integrate_split(ustar, p.w(), ff, lo, hi,
                                          Ends::ClosedClosed,
                                          p.coefficient_breakpoints(lo, hi), quad)
                    .col(0));
}

VectorFn inverse(const SpectralProblem& p, const SpectralMeasure& sm,
                 const std::vector<Vector>& coefficients, const IvpOptions& ivp) {
  if (coefficients.size() != sm.points.size())
    throw UsageError("coefficient count does not match the eigenvalue list");
  auto mats = std::make_shared<std::vector<std::shared_ptr<FundamentalMatrix>>>();
  auto weighted = std::make_shared<std::vector<Vector>>();
  for (std::size_t i = 0; i < sm.points.size(); ++i) {
    mats->push_back(std::make_shared<FundamentalMatrix>(
        p, Complex(sm.points[i].lambda, 0.0), ivp));
    weighted->push_back(Vector(sm.points[i].weight * coefficients[i]));
  }
  const int n = p.size();
  return [mats, weighted, n](double x) -> Vector {
    Vector acc = Vector::Zero(n);
    for (std::size_t i = 0; i < mats->size(); ++i)
      acc += (*mats)[i]->value(x) * (*weighted)[i];
    return acc;
  };
}

ParsevalReport parseval_check(const SpectralProblem& p, const SpectralMeasure& sm,
                              const VectorFn& f, const VectorFn& g,
                              const QuadOptions& quad, const IvpOptions& ivp) {
  TransformResult fh = fourier(p, sm, f, quad, ivp);
  TransformResult gh = fourier(p, sm, g, quad, ivp);
  Complex rhs = 0.0;
  for (std::size_t i = 0; i < sm.points.size(); ++i)
    rhs += (fh.coefficients[i].adjoint() * sm.points[i].weight *
            gh.coefficients[i])(0, 0);
  VectorFn pg = inverse(p, sm, gh.coefficients, ivp);
  MatrixFn mf = [f](double t) { return Matrix(f(t)); };
  MatrixFn mpg = [pg](double t) { return Matrix(pg(t)); };
  Complex lhs = inner_product_w(p, mf, mpg, quad)(0, 0);
  ParsevalReport rep;
  rep.lhs = lhs;
  rep.rhs = rhs;
  rep.residual = std::abs(lhs - rhs);
  rep.tail_f = fh.tail_energy;
  rep.tail_g = gh.tail_energy;
  return rep;
}

double diagonalization_check(const SpectralProblem& p, const SpectralMeasure& sm,
                             const BoundaryConditions& bc, const BalancedSolution& u,
                             const VectorFn& f, const QuadOptions& quad,
                             const IvpOptions& ivp) {
  double res = equation_residual(p, u, f, 9, quad);
  if (res > 1e-6)
    throw UsageError("pair does not satisfy the equation (residual " +
                     std::to_string(res) + ")");
  Matrix bnd(2 * p.size(), 1);
  bnd << u.endpoint_value(Endpoint::Lower), u.endpoint_value(Endpoint::Upper);
  double bres = ent1_norm(Matrix(bc.A_tilde * bnd));
  if (bres > 1e-6)
    throw UsageError("pair does not satisfy the boundary conditions (residual " +
                     std::to_string(bres) + ")");

  VectorFn uv = [&u](double x) { return Vector(u.value(x)); };
  TransformResult uh = fourier(p, sm, uv, quad, ivp);
  TransformResult fh = fourier(p, sm, f, quad, ivp);
  double worst = 0.0;
  for (std::size_t i = 0; i < sm.points.size(); ++i) {
    Vector d = fh.coefficients[i] - sm.points[i].lambda * uh.coefficients[i];
    worst = std::max(worst, d.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace specsys
