#include "specsys/structure.hpp"

#include <cmath>

namespace specsys {

namespace {

// Pairing range: the finite window carrying all mass, clamped to finite
// interval endpoints.
std::pair<double, double> pairing_range(const SpectralProblem& p) {
  return p.effective_range();
}

Matrix orthonormal_columns(const Matrix& cols) {
  if (cols.cols() == 0) return cols;
  Eigen::HouseholderQR<Matrix> qr(cols);
  Matrix q = qr.householderQ() * Matrix::Identity(cols.rows(), cols.cols());
  return q;
}

}  // namespace

KernelData compute_kernel(const SpectralProblem& p, const QuadOptions& quad,
                          const IvpOptions& ivp) {
  if (!p.regular())
    throw ValidationError("kernel computation requires regular endpoints");
  const int n = p.size();
  auto U0 = std::make_shared<FundamentalMatrix>(p, Complex(0.0), ivp);
  auto [lo, hi] = pairing_range(p);

  MatrixFn F = [U0](double x) { return Matrix(U0->value(x).adjoint()); };
  MatrixFn G = [U0](double x) { return U0->value(x); };
  Matrix gram = stieltjes_integrate_split(F, p.w(), G, lo, hi, Ends::ClosedClosed,
                                          p.coefficient_breakpoints(lo, hi), quad);
  gram = 0.5 * (gram + gram.adjoint());

  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  const double thresh = 1e-10 * scale;

  KernelData k;
  k.gram = gram;
  std::vector<int> null_idx, range_idx;
  for (int i = 0; i < n; ++i)
    (es.eigenvalues()(i) <= thresh ? null_idx : range_idx).push_back(i);
  k.kernel_dim = static_cast<int>(null_idx.size());
  k.N0_basis = Matrix(n, k.kernel_dim);
  for (std::size_t j = 0; j < null_idx.size(); ++j)
    k.N0_basis.col(j) = es.eigenvectors().col(null_idx[j]);
  k.range_basis = Matrix(n, static_cast<int>(range_idx.size()));
  for (std::size_t j = 0; j < range_idx.size(); ++j)
    k.range_basis.col(j) = es.eigenvectors().col(range_idx[j]);
  k.P = k.range_basis * k.range_basis.adjoint();
  return k;
}

std::pair<int, int> deficiency_indices_regular(const SpectralProblem& p,
                                               const KernelData& k) {
  if (!p.regular())
    throw ValidationError("deficiency index formula requires regular endpoints");
  int np = p.size() - k.kernel_dim;
  return {np, np};
}

Matrix boundary_space_W(const SpectralProblem& p, const KernelData& k,
                        const IvpOptions& ivp) {
  const int n = p.size();
  const int np = n - k.kernel_dim;
  FundamentalMatrix Up(p, Complex(0, 1), ivp), Um(p, Complex(0, -1), ivp);
  Matrix W(2 * n, 2 * np);
  Matrix ua_p = Up.endpoint_value(Endpoint::Lower) * k.range_basis;
  Matrix ub_p = Up.endpoint_value(Endpoint::Upper) * k.range_basis;
  Matrix ua_m = Um.endpoint_value(Endpoint::Lower) * k.range_basis;
  Matrix ub_m = Um.endpoint_value(Endpoint::Upper) * k.range_basis;
  W << ua_p, ua_m, ub_p, ub_m;
  return W;
}

BoundaryConditions validate_boundary_conditions(const SpectralProblem& p,
                                                const KernelData& k, const Matrix& A,
                                                const IvpOptions& ivp) {
  const int n = p.size();
  const int np = n - k.kernel_dim;
  ValidationReport rep;

  rep.add("row count equals n+", A.rows() == np && A.cols() == 2 * n,
          "expected " + std::to_string(np) + " x " + std::to_string(2 * n));
  if (!rep.ok()) throw BoundaryRejection("boundary conditions rejected", rep);

  Matrix J2inv = Matrix::Zero(2 * n, 2 * n);
  J2inv.topLeftCorner(n, n) = p.J_inverse();
  J2inv.bottomRightCorner(n, n) = -p.J_inverse();
  Matrix J2 = Matrix::Zero(2 * n, 2 * n);
  J2.topLeftCorner(n, n) = p.J();
  J2.bottomRightCorner(n, n) = -p.J();

  // well-definedness on equivalence classes: A kills the boundary data of
  // the w-null solutions
  if (k.kernel_dim > 0) {
    FundamentalMatrix U0(p, Complex(0.0), ivp);
    Matrix Nbnd(2 * n, k.kernel_dim);
    Nbnd << U0.endpoint_value(Endpoint::Lower) * k.N0_basis,
        U0.endpoint_value(Endpoint::Upper) * k.N0_basis;
    double nres = ent1_norm(Matrix(A * Nbnd)) / std::max(1.0, ent1_norm(A));
    rep.add("annihilates w-null boundary data", nres <= 1e-8,
            "residual " + std::to_string(nres));
  }

  // independence as functionals on the admissible boundary space W
  Matrix W = boundary_space_W(p, k, ivp);
  Matrix AW = A * W;
  {
    Eigen::JacobiSVD<Matrix> svd(AW);
    double smax = svd.singularValues()(0);
    bool full = svd.singularValues()(np - 1) > 1e-10 * std::max(1.0, smax);
    rep.add("full rank on the boundary space", full);
  }
  if (!rep.ok()) throw BoundaryRejection("boundary conditions rejected", rep);

  // canonical representative: rows of the form (J2 W eta)^* acting like A on
  // W (they automatically kill the w-null boundary data)
  // Row(eta) = (J2 W eta)^*; matching Row(eta_j) W = (A W)_j means
  // Gsym^* eta_j = (A W)_j^* with the skew form Gsym = W^* J2^* W
  Matrix Gsym = W.adjoint() * J2.adjoint() * W;
  Eigen::PartialPivLU<Matrix> lu(Matrix(Gsym.adjoint()));
  Matrix Eta = lu.solve(Matrix(AW.adjoint()));  // columns eta_j
  Matrix Acan = (J2 * W * Eta).adjoint();
  {
    double resid = ent1_norm(Matrix(Acan * W - AW)) / std::max(1.0, ent1_norm(AW));
    rep.add("canonical representative consistent", resid <= 1e-8,
            "residual " + std::to_string(resid));
  }

  Matrix sym = Acan * J2inv * Acan.adjoint();
  double sym_scale = std::max(1.0, ent1_norm(Acan) * ent1_norm(J2inv) * ent1_norm(Acan));
  rep.add("A J2^{-1} A^* = 0 (canonical)", ent1_norm(sym) <= 1e-8 * sym_scale,
          "|A J2^{-1} A^*|_1 = " + std::to_string(ent1_norm(sym)));

  if (!rep.ok()) throw BoundaryRejection("boundary conditions rejected", rep);

  BoundaryConditions bc;
  bc.A_tilde = A;
  bc.A_canonical = Acan;
  bc.n_plus = np;

  // Classification at the relation level: count independent row combinations
  // acting at one endpoint only.
  auto corank = [&](const Matrix& block) {
    if (np == 0) return 0;
    Eigen::JacobiSVD<Matrix> s(block);
    double top = s.singularValues()(0);
    int r = 0;
    for (int i = 0; i < s.singularValues().size(); ++i)
      if (s.singularValues()(i) > 1e-9 * std::max(1.0, top)) ++r;
    return np - r;
  };
  int only_b = corank(bc.block_a());  // combos with zero action at a
  int only_a = corank(bc.block_b());
  if (only_a + only_b == np)
    bc.classification = BcClass::Separated;
  else if (only_a == 0 && only_b == 0)
    bc.classification = BcClass::Coupled;
  else
    bc.classification = BcClass::Mixed;
  return bc;
}

Matrix self_adjoint_bc_from_unitary(const SpectralProblem& p, const KernelData& k,
                                    const Matrix& V, const QuadOptions& quad,
                                    const IvpOptions& ivp) {
  const int n = p.size();
  const int np = n - k.kernel_dim;
  if (V.rows() != np || V.cols() != np)
    throw UsageError("unitary parameter must be (n-k) square");
  auto Up = std::make_shared<FundamentalMatrix>(p, Complex(0, 1), ivp);
  auto Um = std::make_shared<FundamentalMatrix>(p, Complex(0, -1), ivp);
  auto [lo, hi] = pairing_range(p);

  auto splits = p.coefficient_breakpoints(lo, hi);
  auto gram_of = [&](const std::shared_ptr<FundamentalMatrix>& U) {
    MatrixFn F = [U, &k](double x) { return Matrix((U->value(x) * k.range_basis).adjoint()); };
    MatrixFn G = [U, &k](double x) { return Matrix(U->value(x) * k.range_basis); };
    Matrix g = stieltjes_integrate_split(F, p.w(), G, lo, hi, Ends::ClosedClosed,
                                         splits, quad);
    return Matrix(0.5 * (g + g.adjoint()));
  };
  Matrix Gp = gram_of(Up), Gm = gram_of(Um);
  Eigen::LLT<Matrix> lp(Gp), lm(Gm);
  if (lp.info() != Eigen::Success || lm.info() != Eigen::Success)
    throw NumericError("deficiency Gram not positive definite");
  Matrix Lp = lp.matrixL(), Lm = lm.matrixL();
  Matrix Cp = Lp.adjoint().triangularView<Eigen::Upper>().solve(
      Matrix(Matrix::Identity(np, np)));
  Matrix Cm = Lm.adjoint().triangularView<Eigen::Upper>().solve(V);

  // boundary values of g_j = i (U(.,i) c_j+ - U(.,-i) c_j-)
  Complex i1(0, 1);
  Matrix Ga = i1 * (Up->endpoint_value(Endpoint::Lower) * k.range_basis * Cp -
                    Um->endpoint_value(Endpoint::Lower) * k.range_basis * Cm);
  Matrix Gb = i1 * (Up->endpoint_value(Endpoint::Upper) * k.range_basis * Cp -
                    Um->endpoint_value(Endpoint::Upper) * k.range_basis * Cm);
  Matrix A(np, 2 * n);
  A << Matrix(-Ga.adjoint() * p.J()), Matrix(Gb.adjoint() * p.J());
  return A;
}

Matrix inner_product_w(const SpectralProblem& p, const MatrixFn& x, const MatrixFn& y,
                       const QuadOptions& quad) {
  auto [lo, hi] = pairing_range(p);
  MatrixFn xs = [x](double t) { return Matrix(x(t).adjoint()); };
  return stieltjes_integrate_split(xs, p.w(), y, lo, hi, Ends::ClosedClosed,
                                   p.coefficient_breakpoints(lo, hi), quad);
}

double w_norm(const SpectralProblem& p, const VectorFn& f, const QuadOptions& quad) {
  MatrixFn mf = [f](double t) { return Matrix(f(t)); };
  Matrix v = inner_product_w(p, mf, mf, quad);
  return std::sqrt(std::max(0.0, v(0, 0).real()));
}

double equation_residual(const SpectralProblem& p, const BalancedSolution& u,
                         const VectorFn& f_total, int grid_points,
                         const QuadOptions& quad) {
  auto [lo, hi] = pairing_range(p);
  lo = std::max(lo, u.range_lo());
  hi = std::min(hi, u.range_hi());
  std::vector<double> grid;
  for (int i = 0; i < grid_points; ++i)
    grid.push_back(lo + (hi - lo) * static_cast<double>(i) / (grid_points - 1));
  MatrixFn ub = [&u](double x) { return u.value(x); };
  MatrixFn ft = [&](double x) { return Matrix(f_total(x)); };
  auto splits = p.coefficient_breakpoints(lo, hi);
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    double s = grid[i], t = grid[i + 1];
    Matrix dU = u.left(t) - u.left(s);
    Matrix qu = stieltjes_integrate_split(nullptr, p.q(), ub, s, t, Ends::ClosedOpen,
                                          splits, quad);
    Matrix wf = stieltjes_integrate_split(nullptr, p.w(), ft, s, t, Ends::ClosedOpen,
                                          splits, quad);
    worst = std::max(worst, ent1_norm(Matrix(p.J() * dU + qu - wf)));
  }
  return worst;
}

Complex lagrange_residual(const SpectralProblem& p, const EquationPair& uf,
                          const EquationPair& vg, const QuadOptions& quad) {
  const double check_tol = 1e-6;
  double ru = equation_residual(p, uf.u, uf.f, 9, quad);
  double rv = equation_residual(p, vg.u, vg.f, 9, quad);
  if (ru > check_tol || rv > check_tol)
    throw UsageError("lagrange_residual: inputs do not satisfy their equations"
                     " (residuals " + std::to_string(ru) + ", " + std::to_string(rv) + ")");

  auto [lo, hi] = pairing_range(p);
  bool lo_finite = std::isfinite(p.interval().a);
  bool hi_finite = std::isfinite(p.interval().b);
  Matrix v_hi = hi_finite ? vg.u.left(hi) : vg.u.right(hi);
  Matrix u_hi = hi_finite ? uf.u.left(hi) : uf.u.right(hi);
  Matrix v_lo = lo_finite ? vg.u.right(lo) : vg.u.left(lo);
  Matrix u_lo = lo_finite ? uf.u.right(lo) : uf.u.left(lo);
  Complex boundary = (v_hi.adjoint() * p.J() * u_hi)(0, 0) -
                     (v_lo.adjoint() * p.J() * u_lo)(0, 0);

  MatrixFn vb = [&](double x) { return vg.u.value(x); };
  MatrixFn ub = [&](double x) { return uf.u.value(x); };
  MatrixFn ffn = [&](double x) { return Matrix(uf.f(x)); };
  MatrixFn gfn = [&](double x) { return Matrix(vg.f(x)); };
  Complex vf = inner_product_w(p, vb, ffn, quad)(0, 0);
  Complex gu = inner_product_w(p, gfn, ub, quad)(0, 0);
  return boundary - (vf - gu);
}

}  // namespace specsys
