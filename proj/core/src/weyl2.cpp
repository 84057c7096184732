#include "specsys/weyl2.hpp"

#include <algorithm>
#include <cmath>

namespace specsys {

namespace {

// Gram of the fundamental system columns over [c,d].
Matrix solution_gram(const SpectralProblem& p, FundamentalMatrix& U, double c, double d,
                     const QuadOptions& quad) {
  MatrixFn F = [&U](double x) { return Matrix(U.value(x).adjoint()); };
  MatrixFn G = [&U](double x) { return U.value(x); };
  Matrix g = stieltjes_integrate_split(F, p.w(), G, c, d, Ends::ClosedClosed,
                                       p.coefficient_breakpoints(c, d), quad);
  return 0.5 * (g + g.adjoint());
}

std::vector<double> truncation_cuts(const RealInterval& iv, double anchor, Endpoint e,
                                    int count) {
  std::vector<double> cuts;
  double end = (e == Endpoint::Lower) ? iv.a : iv.b;
  if (std::isfinite(end)) {
    double gap = std::abs(end - anchor);
    for (int k = 1; k <= count; ++k)
      cuts.push_back(end + (e == Endpoint::Lower ? 1.0 : -1.0) * gap * std::pow(0.5, k));
  } else {
    double scale = std::max(1.0, std::abs(anchor));
    for (int k = 0; k < count; ++k)
      cuts.push_back(anchor + (e == Endpoint::Lower ? -1.0 : 1.0) * scale * std::pow(2.0, k));
  }
  return cuts;
}

}  // namespace

double beta_of(const SpectralProblem& p) {
  if (p.size() != 2) throw ValidationError("2x2 machinery needs n = 2");
  const Matrix& J = p.J();
  double beta = J(1, 0).real();
  Matrix ref(2, 2);
  ref << 0.0, -beta, beta, 0.0;
  if (ent1_norm(J - ref) > 1e-12 * std::max(1.0, std::abs(beta)) || beta == 0.0)
    throw ValidationError("J must be beta [[0,-1],[1,0]] with real beta != 0");
  return beta;
}

WeylClassification classify_endpoint(const SpectralProblem& p, Endpoint e,
                                     Complex lambda_probe, const QuadOptions& quad,
                                     const IvpOptions& ivp) {
  beta_of(p);
  if (std::abs(lambda_probe.imag()) <= 0.0)
    throw UsageError("classification probe must be non-real");
  WeylClassification out;
  out.endpoint = e;

  if (p.regular_at(e)) {
    out.verdict = WeylVerdict::LimitCircle;
    out.reason = "regular endpoint: every solution has finite w-norm there";
    return out;
  }

  FundamentalMatrix U(p, lambda_probe, ivp);
  const double c = p.x0();
  const int budget = std::isfinite((e == Endpoint::Lower) ? p.interval().a
                                                          : p.interval().b)
                         ? 40
                         : 30;
  auto cuts = truncation_cuts(p.interval(), c, e, budget);

  Matrix prev_gram;
  Vector reliable_dir;
  double reliable_emin = kInf;
  bool have_dir = false;
  int stable_lc = 0, stable_lp = 0;
  for (double cut : cuts) {
    double lo = (e == Endpoint::Lower) ? cut : c;
    double hi = (e == Endpoint::Lower) ? c : cut;
    Matrix g;
    try {
      g = solution_gram(p, U, lo, hi, quad);
    } catch (const NumericError&) {
      break;  // norms overflowed before the criterion fired
    }
    if (!g.allFinite()) break;
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    double emin = es.eigenvalues()(0), emax = es.eigenvalues()(1);
    Vector dir = es.eigenvectors().col(0);

    MatrixFn phi_fn = [&U](double x) { return Matrix(U.value(x).col(1)); };
    Matrix phin = stieltjes_integrate_split(
        [&U](double x) { return Matrix(U.value(x).col(1).adjoint()); }, p.w(),
        phi_fn, lo, hi, Ends::ClosedClosed, p.coefficient_breakpoints(lo, hi), quad);
    double radius = 1.0 / std::max(1e-300, 2.0 * std::abs(lambda_probe.imag()) *
                                               phin(0, 0).real());
    out.diagnostics.push_back({cut, emin, emax, radius});

    // the minimal eigenpair is only trustworthy above the rounding floor of
    // the eigensolver; beyond that keep the last resolvable direction
    bool dir_ok = false;
    if (emin > std::max(1e-300, emax * 1e-13)) {
      dir_ok = have_dir &&
               std::abs(std::abs(reliable_dir.dot(dir)) - 1.0) < 1e-6;
      reliable_dir = dir;
      reliable_emin = emin;
      have_dir = true;
    } else {
      dir_ok = have_dir;
    }

    if (prev_gram.size() > 0) {
      double change = ent1_norm(g - prev_gram) / (1.0 + ent1_norm(g));
      if (change < 1e-9)
        ++stable_lc;
      else
        stable_lc = 0;
      if (std::isfinite(reliable_emin) &&
          emax > 1e6 * std::max(reliable_emin, 1e-300) && dir_ok)
        ++stable_lp;
      else
        stable_lp = 0;
      if (stable_lc >= 2) {
        out.verdict = WeylVerdict::LimitCircle;
        out.reason = "solution Gram converged over nested intervals";
        return out;
      }
      if (stable_lp >= 3) {
        out.verdict = WeylVerdict::LimitPoint;
        out.reason = "unique minimal-norm direction; complementary norm grew past 1e6x";
        return out;
      }
    }
    prev_gram = g;
  }
  out.verdict = WeylVerdict::Undecided;
  out.reason = "norm growth inconclusive within the truncation budget";
  return out;
}

Eigen::RowVector2cd separated_condition(double alpha) {
  if (!(alpha >= 0.0 && alpha < M_PI))
    throw UsageError("alpha must lie in [0, pi)");
  Eigen::RowVector2cd row;
  row << Complex(std::cos(alpha), 0.0), Complex(-std::sin(alpha), 0.0);
  return row;
}

Matrix apply_separated(const SpectralProblem& p, const KernelData& k,
                       const WeylClassification& cls_a, const WeylClassification& cls_b,
                       std::optional<double> alpha_a, std::optional<double> alpha_b) {
  const int n = p.size();
  if (n != 2) throw ValidationError("separated assembly is for 2x2 systems");
  if (alpha_a && cls_a.verdict == WeylVerdict::LimitPoint)
    throw ValidationError("boundary condition refused at the limit-point endpoint a");
  if (alpha_b && cls_b.verdict == WeylVerdict::LimitPoint)
    throw ValidationError("boundary condition refused at the limit-point endpoint b");
  int rows = (alpha_a ? 1 : 0) + (alpha_b ? 1 : 0);
  int np = n - k.kernel_dim;
  if (rows != np)
    throw ValidationError("separated conditions give " + std::to_string(rows) +
                          " rows but the deficiency index is " + std::to_string(np));
  Matrix A = Matrix::Zero(rows, 2 * n);
  int r = 0;
  if (alpha_a) A.block(r++, 0, 1, 2) = separated_condition(*alpha_a);
  if (alpha_b) A.block(r++, n, 1, 2) = separated_condition(*alpha_b);
  return A;
}

namespace {

MatrixMeasure clip_measure(const MatrixMeasure& m, double lo, double hi) {
  std::vector<Piece> pieces;
  for (const auto& pc : m.pieces()) {
    double l = std::max(lo, pc.left), r = std::min(hi, pc.right);
    if (l < r) {
      Piece np = pc;
      np.left = l;
      np.right = r;
      pieces.push_back(std::move(np));
    }
  }
  std::vector<Atom> atoms;
  for (const auto& at : m.atoms())
    if (lo < at.location && at.location < hi) atoms.push_back(at);
  return MatrixMeasure(RealInterval(lo, hi), m.rows(), m.cols(), std::move(pieces),
                       std::move(atoms));
}

Complex aitken(const std::vector<Complex>& seq) {
  if (seq.size() < 3) return seq.back();
  Complex x0 = seq[seq.size() - 3], x1 = seq[seq.size() - 2], x2 = seq.back();
  Complex den = x2 - 2.0 * x1 + x0;
  if (std::abs(den) < 1e-14 * (std::abs(x2) + 1.0)) return x2;
  return x2 - (x2 - x1) * (x2 - x1) / den;
}

}  // namespace

TitchmarshWeylResult m_function_2x2(const SpectralProblem& p, double alpha,
                                    Complex lambda, const QuadOptions& quad,
                                    const IvpOptions& ivp, double agree_tol) {
  double beta = beta_of(p);
  if (std::abs(beta - 1.0) > 1e-12)
    throw ValidationError("m-function normalization assumes beta = 1");
  if (!std::isfinite(p.interval().a) || !p.regular_at(Endpoint::Lower))
    throw ValidationError("m-function requires a finite regular lower endpoint");
  if (std::abs(lambda.imag()) <= 0.0) throw UsageError("lambda must be non-real");
  if (p.x0() != p.interval().a)
    return m_function_2x2(p.with_anchor(p.interval().a), alpha, lambda, quad, ivp,
                          agree_tol);

  const double a = p.interval().a;
  Vector theta0(2), phi0(2);
  theta0 << std::cos(alpha), -std::sin(alpha);
  phi0 << std::sin(alpha), std::cos(alpha);

  FundamentalMatrix U(p, lambda, ivp);
  auto cuts = truncation_cuts(p.interval(), a + std::max(1.0, std::abs(a)) * 0.0 + 1.0,
                              Endpoint::Upper, 28);

  TitchmarshWeylResult res;
  std::vector<Complex> centers, contractions;
  Complex prev_center = 0.0, prev_contr = 0.0;
  bool center_done = false, contr_done = false;
  for (double cut : cuts) {
    res.cuts.push_back(cut);
    if (!center_done) {
      MatrixFn th = [&U, &theta0](double x) { return Matrix(U.value(x) * theta0); };
      MatrixFn ph = [&U, &phi0](double x) { return Matrix(U.value(x) * phi0); };
      MatrixFn phs = [&U, &phi0](double x) {
        return Matrix((U.value(x) * phi0).adjoint());
      };
      auto cut_splits = p.coefficient_breakpoints(a, cut);
      Complex pt = stieltjes_integrate_split(phs, p.w(), th, a, cut,
                                             Ends::ClosedClosed, cut_splits, quad)(0, 0);
      Complex pp = stieltjes_integrate_split(phs, p.w(), ph, a, cut,
                                             Ends::ClosedClosed, cut_splits, quad)(0, 0);
      Complex c = -pt / pp;
      centers.push_back(c);
      if (centers.size() > 1 &&
          std::abs(c - prev_center) < 1e-10 * (1.0 + std::abs(c)))
        center_done = true;
      prev_center = c;
    }
    if (!contr_done) {
      // regular problem on (a, cut) with the alpha condition at a and a
      // Dirichlet-type condition at the cut
      MatrixMeasure qk = clip_measure(p.q(), a, cut);
      MatrixMeasure wk = clip_measure(p.w(), a, cut);
      try {
        SpectralProblem pk(RealInterval(a, cut), p.J(), qk, wk, a);
        KernelData kk = compute_kernel(pk, quad, ivp);
        if (kk.kernel_dim == 0) {
          Matrix A = Matrix::Zero(2, 4);
          A.block(0, 0, 1, 2) = separated_condition(alpha);
          A(1, 2) = 1.0;
          BoundaryConditions bck = validate_boundary_conditions(pk, kk, A, ivp);
          MFunction mk = m_function(pk, kk, bck, ivp);
          Matrix Mk = mk(lambda);
          Complex c = (phi0.adjoint() * Mk * phi0)(0, 0);
          contractions.push_back(c);
          if (contractions.size() > 1 &&
              std::abs(c - prev_contr) < 1e-10 * (1.0 + std::abs(c)))
            contr_done = true;
          prev_contr = c;
        }
      } catch (const Error&) {
        // truncation landed on an awkward configuration; skip this cut
      }
    }
    if (center_done && contr_done) break;
  }
  if (centers.empty() || contractions.empty())
    throw NumericError("titchmarsh-weyl routes failed to produce values");

  res.route_disk_center = aitken(centers);
  res.route_contraction = aitken(contractions);
  res.truncations_used = static_cast<int>(res.cuts.size());
  res.disagreement = std::abs(res.route_disk_center - res.route_contraction);
  if (res.disagreement > agree_tol * (1.0 + std::abs(res.route_disk_center)))
    throw NumericError("titchmarsh-weyl route disagreement " +
                       std::to_string(res.disagreement));
  res.m = res.route_disk_center;
  return res;
}

int global_l2_solution_count(const SpectralProblem& p, Complex lambda_probe,
                             const QuadOptions& quad, const IvpOptions& ivp) {
  FundamentalMatrix U(p, lambda_probe, ivp);
  const double c = p.x0();
  auto lo_cuts = truncation_cuts(p.interval(), c, Endpoint::Lower, 20);
  auto hi_cuts = truncation_cuts(p.interval(), c, Endpoint::Upper, 20);
  std::size_t steps = std::min(lo_cuts.size(), hi_cuts.size());
  Matrix first, last;
  for (std::size_t k = 0; k < steps; ++k) {
    Matrix g = solution_gram(p, U, lo_cuts[k], hi_cuts[k], quad);
    if (k == 1) first = g;
    last = g;
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    if (es.eigenvalues().maxCoeff() > 1e14) break;  // growth established
  }
  if (first.size() == 0) first = last;
  Eigen::SelfAdjointEigenSolver<Matrix> e_first(first), e_last(last);
  int count = 0;
  for (int i = 0; i < p.size(); ++i)
    if (e_last.eigenvalues()(i) < 1e6 * (e_first.eigenvalues()(i) + 1.0)) ++count;
  return count;
}

Vector lc_boundary_vector(const SpectralProblem& p, const BalancedSolution& u,
                          const VectorFn& f, Endpoint e, const BalancedSolution& v1,
                          const BalancedSolution& v2, const WeylClassification& cls,
                          const QuadOptions& quad) {
  double beta = beta_of(p);
  if (cls.verdict == WeylVerdict::LimitPoint)
    throw ValidationError("no boundary vector at a limit-point endpoint");
  const double c = p.x0();
  // normalization check: v1^* J v2 = -1/beta at the anchor
  Complex wr = (v1.right(c).adjoint() * p.J() * v2.right(c))(0, 0);
  if (std::abs(wr + 1.0 / beta) > 1e-8 * (1.0 + std::abs(wr)))
    throw UsageError("frame normalization v1^*Jv2 = -1/beta violated");

  auto pairing_limit = [&](const BalancedSolution& v) -> Complex {
    // (v^*Ju)(endpoint) = (v^*Ju)(c) -/+ int v^* w f over the gap
    MatrixFn vs = [&v](double x) { return Matrix(v.value(x).adjoint()); };
    MatrixFn ff = [&f](double x) { return Matrix(f(x)); };
    auto [lo, hi] = p.effective_range();
    if (e == Endpoint::Lower) {
      Complex at_c = (v.left(c).adjoint() * p.J() * u.left(c))(0, 0);
      Complex gap = stieltjes_integrate_split(vs, p.w(), ff, lo, c, Ends::ClosedOpen,
                                              p.coefficient_breakpoints(lo, c),
                                              quad)(0, 0);
      return at_c - gap;
    }
    Complex at_c = (v.right(c).adjoint() * p.J() * u.right(c))(0, 0);
    Complex gap = stieltjes_integrate_split(vs, p.w(), ff, c, hi, Ends::OpenClosed,
                                            p.coefficient_breakpoints(c, hi),
                                            quad)(0, 0);
    return at_c + gap;
  };
  Vector out(2);
  out << pairing_limit(v1), pairing_limit(v2);
  return out;
}

std::pair<BalancedSolution, BalancedSolution> default_lc_frame(
    const SpectralProblem& p, Endpoint e, const IvpOptions& ivp) {
  double beta = beta_of(p);
  auto r0 = coefficient_measure(p, Complex(0.0));
  auto [lo, hi] = p.effective_range();
  double start;
  if (e == Endpoint::Lower && std::isfinite(p.interval().a))
    start = p.interval().a;
  else if (e == Endpoint::Upper && std::isfinite(p.interval().b))
    start = p.interval().b;
  else
    start = p.x0();
  Matrix init(2, 2);
  init << 0.0, -1.0 / beta, 1.0 / beta, 0.0;  // columns v1, v2
  BalancedSolution both = solve_ivp_balanced(r0, nullptr, start, init,
                                             std::min(lo, start), std::max(hi, start),
                                             ivp);
  auto col = [&](int j) {
    MatrixFn v = [both, j](double x) { return Matrix(both.value(x).col(j)); };
    MatrixFn vl = [both, j](double x) { return Matrix(both.left(x).col(j)); };
    MatrixFn vr = [both, j](double x) { return Matrix(both.right(x).col(j)); };
    return BalancedSolution::from_closures(p.interval(), both.range_lo(),
                                           both.range_hi(), start, v, vl, vr,
                                           both.atom_locations());
  };
  return {col(0), col(1)};
}

}  // namespace specsys
