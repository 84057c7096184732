#include "specsys/greens.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace specsys {

namespace {

double sigma_ratio_min(const Matrix& m, double* smax_out = nullptr) {
  Eigen::JacobiSVD<Matrix> svd(m);
  double smax = svd.singularValues()(0);
  if (smax_out) *smax_out = smax;
  return svd.singularValues()(svd.singularValues().size() - 1) /
         std::max(1.0, smax);
}

int rank_deficiency(const Matrix& m, double tol, double scale_floor = 0.0) {
  Eigen::JacobiSVD<Matrix> svd(m);
  double scale = std::max({1e-300, svd.singularValues()(0), scale_floor});
  int def = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) <= tol * scale) ++def;
  return def;
}

struct FParts {
  Matrix F;        // n x n
  Matrix Ub, Ua;   // endpoint values of the fundamental matrix
};

FParts f_parts(const SpectralProblem& p, const KernelData& k,
               const BoundaryConditions& bc, Complex lambda, const IvpOptions& ivp) {
  const int n = p.size();
  const int np = bc.n_plus;
  double bad;
  auto [lo, hi] = p.effective_range();
  if (lambda_forbidden(p, lambda, lo, hi, &bad))
    throw LambdaForbiddenError(
        "lambda in the forbidden set at atom x = " + std::to_string(bad), bad);
  FundamentalMatrix U(p, lambda, ivp);
  FParts parts;
  parts.Ua = U.endpoint_value(Endpoint::Lower);
  parts.Ub = U.endpoint_value(Endpoint::Upper);
  parts.F = Matrix(n, n);
  parts.F.topRows(np) = bc.block_a() * parts.Ua + bc.block_b() * parts.Ub;
  if (np < n) parts.F.bottomRows(n - np) = k.N0_basis.adjoint();
  return parts;
}

}  // namespace

Matrix assemble_F(const SpectralProblem& p, const KernelData& k,
                  const BoundaryConditions& bc, Complex lambda, const IvpOptions& ivp) {
  return f_parts(p, k, bc, lambda, ivp).F;
}

MFunction::MFunction(const SpectralProblem& p, const KernelData& k,
                     const BoundaryConditions& bc, IvpOptions ivp)
    : p_(std::make_shared<const SpectralProblem>(p)), k_(k), bc_(bc), ivp_(ivp) {}

MFunction m_function(const SpectralProblem& p, const KernelData& k,
                     const BoundaryConditions& bc, const IvpOptions& ivp) {
  return MFunction(p, k, bc, ivp);
}

Matrix MFunction::eval_upper(Complex lambda) const {
  const int n = p_->size();
  const int np = bc_.n_plus;
  FParts parts = f_parts(*p_, k_, bc_, lambda, ivp_);
  if (sigma_ratio_min(parts.F) <= 1e-12)
    throw NumericError("M evaluated at a spectral point (F is singular)");
  Matrix B = Matrix::Zero(n, n);
  B.topRows(np) = bc_.block_b() * parts.Ub * p_->J_inverse();
  Matrix M = -k_.P * parts.F.partialPivLu().solve(B) * k_.P +
             0.5 * k_.P * p_->J_inverse() * k_.P;
  return M;
}

Matrix MFunction::eval_lower(Complex lambda) const {
  const int n = p_->size();
  const int np = bc_.n_plus;
  FParts parts = f_parts(*p_, k_, bc_, lambda, ivp_);
  if (sigma_ratio_min(parts.F) <= 1e-12)
    throw NumericError("M evaluated at a spectral point (F is singular)");
  Matrix B = Matrix::Zero(n, n);
  B.topRows(np) = bc_.block_a() * parts.Ua * p_->J_inverse();
  Matrix M = k_.P * parts.F.partialPivLu().solve(B) * k_.P -
             0.5 * k_.P * p_->J_inverse() * k_.P;
  return M;
}

GreenKernel::GreenKernel(const MFunction& mf, Complex lambda)
    : p_(mf.p_), M_(mf(lambda)), P_(mf.kernel().P), Jinv_(p_->J_inverse()),
      lambda_(lambda),
      U_(std::make_shared<FundamentalMatrix>(*p_, lambda, mf.ivp_)),
      Ubar_(std::make_shared<FundamentalMatrix>(*p_, std::conj(lambda), mf.ivp_)),
      r_(coefficient_measure(*p_, lambda)) {}

Matrix GreenKernel::operator()(double x, double y) const {
  const int n = p_->size();
  const Matrix id = Matrix::Identity(n, n);
  auto sgn = [](double t) { return (t > 0) - (t < 0); };
  Matrix H = M_ +
             0.5 * static_cast<double>(sgn(y - p_->x0())) * (id - P_) * Jinv_ * P_ -
             0.5 * static_cast<double>(sgn(y - x)) * Jinv_ * P_;
  if (x == y) {
    Matrix dr = r_.jump_at(x);
    if (ent1_norm(dr) > 0) {
      Matrix S = 0.25 * U_->value(x).partialPivLu().solve(dr * U_->value(x)) * Jinv_;
      H += S * P_;
    }
  }
  return U_->value(x) * H * Ubar_->value(y).adjoint();
}

GreenKernel green_kernel(const SpectralProblem& p, const KernelData& k,
                         const BoundaryConditions& bc, Complex lambda,
                         const IvpOptions& ivp) {
  return GreenKernel(MFunction(p, k, bc, ivp), lambda);
}

BalancedSolution resolvent_apply(const SpectralProblem& p, const KernelData& k,
                                 const BoundaryConditions& bc, Complex lambda,
                                 const VectorFn& f, const IvpOptions& ivp,
                                 const QuadOptions& quad) {
  const int n = p.size();
  const int np = bc.n_plus;
  FParts parts = f_parts(p, k, bc, lambda, ivp);
  if (sigma_ratio_min(parts.F) <= 1e-10)
    throw NumericError("resolvent at an eigenvalue (F is singular)");

  auto U = std::make_shared<FundamentalMatrix>(p, lambda, ivp);
  auto Ubar = std::make_shared<FundamentalMatrix>(p, std::conj(lambda), ivp);
  auto w = std::make_shared<MatrixMeasure>(p.w());
  auto q = std::make_shared<MatrixMeasure>(p.q());
  const Matrix jinv = p.J_inverse();
  const double x0 = p.x0();
  auto [lo, hi] = p.effective_range();

  MatrixFn ustar = [Ubar](double t) { return Matrix(Ubar->value(t).adjoint()); };
  MatrixFn ff = [f](double t) { return Matrix(f(t)); };
  auto splits = std::make_shared<std::vector<double>>(
      p.coefficient_breakpoints(lo, hi));

  Matrix xi_plus = (x0 < hi)
                       ? Matrix(stieltjes_integrate_split(ustar, *w, ff, x0, hi,
                                                          Ends::OpenClosed, *splits,
                                                          quad))
                       : Matrix(Matrix::Zero(n, 1));
  Matrix xi_minus = (lo < x0)
                        ? Matrix(stieltjes_integrate_split(ustar, *w, ff, lo, x0,
                                                           Ends::ClosedOpen, *splits,
                                                           quad))
                        : Matrix(Matrix::Zero(n, 1));

  // u0 = H_- xi_- + H_+ xi_+ with H_+ = -P F^{-1} [A_b U_b J^{-1}; 0] and
  // H_- = P F^{-1} [A_a U_a J^{-1}; 0]
  Matrix Bp = Matrix::Zero(n, n), Bm = Matrix::Zero(n, n);
  Bp.topRows(np) = bc.block_b() * parts.Ub * jinv;
  Bm.topRows(np) = bc.block_a() * parts.Ua * jinv;
  auto lu = parts.F.partialPivLu();
  Matrix u0 = k.P * (lu.solve(Bm) * xi_minus - lu.solve(Bp) * xi_plus);

  Complex lam = lambda;
  auto balanced = [=](double x) -> Matrix {
    Matrix corr = 0.5 * jinv * Ubar->value(x).adjoint() * w->jump_at(x) * f(x);
    if (x >= x0) {
      Matrix acc = (x0 < x)
                       ? Matrix(stieltjes_integrate_split(ustar, *w, ff, x0, x,
                                                          Ends::OpenOpen, *splits, quad))
                       : Matrix(Matrix::Zero(n, 1));
      return U->value(x) * (u0 + jinv * acc) + U->right(x) * corr;
    }
    Matrix acc = (x < x0)
                     ? Matrix(stieltjes_integrate_split(ustar, *w, ff, x, x0,
                                                        Ends::OpenOpen, *splits, quad))
                     : Matrix(Matrix::Zero(n, 1));
    return U->value(x) * (u0 - jinv * acc) - U->left(x) * corr;
  };
  auto one_sided = [=](double x, double side) -> Matrix {
    Matrix bal = balanced(x);
    Matrix d = lam * w->jump_at(x) - q->jump_at(x);
    Matrix dg = w->jump_at(x) * f(x);
    return bal + 0.5 * side * jinv * (d * bal + dg);
  };
  auto fleft = [one_sided](double x) { return one_sided(x, -1.0); };
  auto fright = [one_sided](double x) { return one_sided(x, +1.0); };

  std::vector<double> atom_xs;
  for (const auto& at : p.w().atoms()) atom_xs.push_back(at.location);
  for (const auto& at : p.q().atoms()) atom_xs.push_back(at.location);
  std::sort(atom_xs.begin(), atom_xs.end());
  atom_xs.erase(std::unique(atom_xs.begin(), atom_xs.end()), atom_xs.end());

  return BalancedSolution::from_closures(p.interval(), lo, hi, x0, balanced, fleft,
                                         fright, std::move(atom_xs));
}

SpectralMeasure eigenvalues(const MFunction& mf, double lo, double hi,
                            const EigOptions& opt) {
  if (!(lo < hi)) throw UsageError("empty eigenvalue window");
  const auto& p = mf.problem();
  LambdaSet forb = lambda_set(p);
  if (!forb.real_axis_clear())
    throw ValidationError("forbidden set intersects the real line");
  for (const auto& pt : forb.points) {
    double dist = (pt.lambda.real() < lo)   ? std::abs(pt.lambda - Complex(lo, 0))
                  : (pt.lambda.real() > hi) ? std::abs(pt.lambda - Complex(hi, 0))
                                            : std::abs(pt.lambda.imag());
    if (dist < opt.lambda_margin)
      throw ValidationError("window touches the forbidden set");
  }

  const int n = p.size();
  // Herglotz trace probes: fixed pseudo-random directions in ran P
  std::mt19937_64 rng(0x5eeded);
  std::normal_distribution<double> gauss;
  std::vector<Vector> probes;
  for (int t = 0; t < 2; ++t) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = Complex(gauss(rng), gauss(rng));
    v = mf.kernel().P * v;
    double nrm = v.norm();
    probes.push_back(nrm > 0 ? Vector(v / nrm) : v);
  }
  // unguarded evaluator: near a pole the solve may blow up, which the
  // bisection interprets as having landed on the eigenvalue
  auto m_at = [&](double x) -> Matrix {
    FParts parts = f_parts(p, mf.kernel(), mf.bc(), Complex(x, 0.0), mf.ivp());
    Matrix B = Matrix::Zero(n, n);
    B.topRows(mf.bc().n_plus) = mf.bc().block_b() * parts.Ub * p.J_inverse();
    return Matrix(-mf.kernel().P * parts.F.partialPivLu().solve(B) * mf.kernel().P +
                  0.5 * mf.kernel().P * p.J_inverse() * mf.kernel().P);
  };
  auto htrace = [&](double x, int probe) -> double {
    Matrix M = m_at(x);
    return (probes[probe].adjoint() * M * probes[probe])(0, 0).real();
  };

  const int cells = std::max(8, opt.initial_cells);
  std::vector<double> xs(cells + 1);
  std::vector<std::vector<double>> h(probes.size(), std::vector<double>(cells + 1));
  std::vector<double> smin(cells + 1), smax_grid(cells + 1);
  for (int i = 0; i <= cells; ++i) {
    xs[i] = lo + (hi - lo) * static_cast<double>(i) / cells;
    FParts parts = f_parts(p, mf.kernel(), mf.bc(), Complex(xs[i], 0.0), mf.ivp());
    smin[i] = sigma_ratio_min(parts.F, &smax_grid[i]);
    Matrix B = Matrix::Zero(n, n);
    B.topRows(mf.bc().n_plus) = mf.bc().block_b() * parts.Ub * p.J_inverse();
    Matrix M = -mf.kernel().P * parts.F.partialPivLu().solve(B) * mf.kernel().P +
               0.5 * mf.kernel().P * p.J_inverse() * mf.kernel().P;
    for (std::size_t t = 0; t < probes.size(); ++t)
      h[t][i] = (probes[t].adjoint() * M * probes[t])(0, 0).real();
  }

  // candidate brackets: Herglotz monotonicity violations or sigma_min dips
  struct Bracket {
    double a, b;
    int probe;
  };
  std::vector<Bracket> brackets;
  for (int i = 0; i < cells; ++i) {
    bool added = false;
    for (std::size_t t = 0; t < probes.size() && !added; ++t)
      if (h[t][i + 1] < h[t][i] - 1e-13 * (std::abs(h[t][i]) + 1)) {
        brackets.push_back({xs[i], xs[i + 1], static_cast<int>(t)});
        added = true;
      }
    if (!added && i > 0 && i < cells &&
        smin[i] < std::min(smin[i - 1], smin[i + 1]) && smin[i] < 1e-2) {
      // dip without a detected break: bracket the neighborhood with probe 0
      brackets.push_back({xs[i - 1], xs[i + 1], -1});
    }
  }

  std::vector<double> found;
  auto polish = [&](double a, double b, int probe) -> bool {
    // keep the half where the Herglotz trace still decreases
    double ha = htrace(a, probe), hb = htrace(b, probe);
    if (!(hb < ha)) return false;
    while (b - a > opt.locate_tol * std::max(1.0, std::abs(a) + std::abs(b))) {
      double m = 0.5 * (a + b);
      double hm = htrace(m, probe);
      if (!std::isfinite(hm)) {  // solve blew up: m is the pole
        a = b = m;
        break;
      }
      if (hm < ha) {
        b = m;
        hb = hm;
      } else {
        a = m;
        ha = hm;
      }
    }
    found.push_back(0.5 * (a + b));
    return true;
  };

  for (const auto& br : brackets) {
    if (br.probe >= 0) {
      polish(br.a, br.b, br.probe);
    } else {
      // sigma dip: try both probes, else golden-section on sigma_min
      if (polish(br.a, br.b, 0) || polish(br.a, br.b, 1)) continue;
      double a = br.a, b = br.b;
      auto s_at = [&](double x) {
        return sigma_ratio_min(assemble_F(p, mf.kernel(), mf.bc(), Complex(x, 0.0)));
      };
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      double c = b - gr * (b - a), d = a + gr * (b - a);
      double fc = s_at(c), fd = s_at(d);
      for (int it = 0; it < 120 && (b - a) > opt.locate_tol * std::max(1.0, std::abs(a));
           ++it) {
        if (fc < fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - gr * (b - a);
          fc = s_at(c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + gr * (b - a);
          fd = s_at(d);
        }
      }
      double cand = 0.5 * (a + b);
      if (s_at(cand) < opt.rank_tol) found.push_back(cand);
    }
  }

  std::sort(found.begin(), found.end());
  std::vector<double> uniq;
  for (double x : found) {
    if (!uniq.empty() &&
        std::abs(x - uniq.back()) < 1e3 * opt.locate_tol * std::max(1.0, std::abs(x)))
      continue;
    uniq.push_back(x);
  }

  // reference magnitude of F across the window, for the rank tests
  std::vector<double> sorted_smax = smax_grid;
  std::sort(sorted_smax.begin(), sorted_smax.end());
  double f_scale = sorted_smax[sorted_smax.size() / 2];

  SpectralMeasure sm;
  sm.window_lo = lo;
  sm.window_hi = hi;
  sm.P = mf.kernel().P;
  for (double x : uniq) {
    Matrix F = assemble_F(p, mf.kernel(), mf.bc(), Complex(x, 0.0));
    int mult = rank_deficiency(F, opt.rank_tol, f_scale);
    if (mult == 0) continue;  // spurious candidate
    if (x < lo || x > hi) continue;
    sm.points.push_back({x, mult, Matrix(), 0.0});
  }
  return sm;
}

Matrix residue_weights(const MFunction& mf, double lambda_n, double radius,
                       const EigOptions& opt, double* defect) {
  if (!(radius > 0)) throw UsageError("contour radius must be positive");
  LambdaSet forb = lambda_set(mf.problem());
  if (forb.distance_to(Complex(lambda_n, 0.0)) <= radius)
    throw ValidationError("residue contour hits the forbidden set");

  const int n = mf.problem().size();
  auto contour = [&](int N) -> Matrix {
    Matrix acc = Matrix::Zero(n, n);
    for (int j = 0; j < N; ++j) {
      double th = 2.0 * M_PI * j / N;
      Complex e(std::cos(th), std::sin(th));
      acc += mf(Complex(lambda_n, 0.0) + radius * e) * e;
    }
    return Matrix(-(radius / N) * acc);
  };
  int N = 16;
  Matrix val = contour(N);
  for (; N <= 1024; N *= 2) {
    Matrix next = contour(2 * N);
    if (ent1_norm(next - val) <= opt.residue_tol * std::max(1.0, ent1_norm(next))) {
      val = next;
      break;
    }
    val = next;
  }
  double dev = 0.5 * ent1_norm(val - val.adjoint());
  if (defect) *defect = dev;
  return 0.5 * (val + val.adjoint());
}

SpectralMeasure spectral_measure(const MFunction& mf, double lo, double hi,
                                 const EigOptions& opt) {
  SpectralMeasure sm = eigenvalues(mf, lo, hi, opt);
  LambdaSet forb = lambda_set(mf.problem());
  for (std::size_t i = 0; i < sm.points.size(); ++i) {
    double gap = kInf;
    if (i > 0) gap = std::min(gap, sm.points[i].lambda - sm.points[i - 1].lambda);
    if (i + 1 < sm.points.size())
      gap = std::min(gap, sm.points[i + 1].lambda - sm.points[i].lambda);
    double dist_forb = forb.distance_to(Complex(sm.points[i].lambda, 0.0));
    double radius = opt.max_residue_radius;
    if (std::isfinite(gap)) radius = std::min(radius, gap / 4.0);
    if (std::isfinite(dist_forb)) radius = std::min(radius, dist_forb / 4.0);
    sm.points[i].weight = residue_weights(mf, sm.points[i].lambda, radius, opt,
                                          &sm.points[i].hermiticity_defect);
  }
  return sm;
}

}  // namespace specsys
