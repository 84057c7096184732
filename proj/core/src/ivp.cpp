#include "specsys/ivp.hpp"

#include <algorithm>
#include <cmath>

namespace specsys {

namespace {

double sigma_min_ratio(const Matrix& m, double* sigma_max = nullptr) {
  Eigen::JacobiSVD<Matrix> svd(m);
  double smax = svd.singularValues()(0);
  if (sigma_max) *sigma_max = smax;
  return svd.singularValues()(svd.singularValues().size() - 1) / std::max(1.0, smax);
}

}  // namespace

class IvpBuilder {
 public:
  static BalancedSolution run(const MatrixMeasure& r, const MatrixMeasure* g, double x0,
                              const Matrix& u0, double lo, double hi,
                              const IvpOptions& opt) {
    if (!(lo <= x0 && x0 <= hi)) throw UsageError("initial point outside the range");
    BalancedSolution s;
    s.domain_ = r.interval();
    s.lo_ = lo;
    s.hi_ = hi;
    s.x0_ = x0;
    s.initial_value_ = u0;

    const int rows = r.rows();
    const Eigen::Index cols = u0.cols();
    auto rhs = [&r, g](double x, const Matrix& y) -> Matrix {
      Matrix v = r.density_at(x) * y;
      if (g) v += g->density_at(x);
      return v;
    };

    std::vector<double> bps = r.breakpoints(lo, hi);
    if (g) {
      auto gb = g->breakpoints(lo, hi);
      bps.insert(bps.end(), gb.begin(), gb.end());
    }
    bps.push_back(lo);
    bps.push_back(hi);
    bps.push_back(x0);
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());

    struct AtomData {
      double x;
      Matrix dr, dg;
    };
    auto atom_at = [&](double x, AtomData& ad) -> bool {
      ad.x = x;
      ad.dr = r.jump_at(x);
      ad.dg = g ? Matrix(g->jump_at(x)) : Matrix(Matrix::Zero(rows, cols));
      return ent1_norm(ad.dr) > 0 || ent1_norm(ad.dg) > 0;
    };
    auto check_transfer = [&](const AtomData& ad) {
      const Matrix id = Matrix::Identity(rows, rows);
      for (int sign : {-1, +1}) {
        Matrix t = id + 0.5 * static_cast<double>(sign) * ad.dr;
        double ratio = sigma_min_ratio(t);
        if (ratio <= 1e-10)
          throw LambdaForbiddenError(
              "transfer matrix 1 " + std::string(sign > 0 ? "+" : "-") +
                  " Delta_r/2 singular at atom x = " + std::to_string(ad.x),
              ad.x);
        if (1.0 / ratio > opt.condition_warn)
          s.warnings_.push_back("ill-conditioned atom transfer at x = " +
                                std::to_string(ad.x));
      }
    };
    auto apply_dg = [&](Matrix vec, const Matrix& dg, double factor) -> Matrix {
      if (dg.cols() == vec.cols()) vec += factor * dg;
      return vec;
    };

    // starting triple at x0 (explicit from the jump relation, no solve)
    Matrix start_right = u0, start_left = u0;
    {
      AtomData ad;
      if (atom_at(x0, ad)) {
        Matrix d = apply_dg(ad.dr * u0, ad.dg, 1.0);
        start_right = u0 + 0.5 * d;
        start_left = u0 - 0.5 * d;
        s.atom_records_.push_back({x0, start_left, u0, start_right});
        s.atom_xs_.push_back(x0);
      }
    }

    // rightward sweep
    {
      Matrix y = start_right;
      double x = x0;
      auto it = std::upper_bound(bps.begin(), bps.end(), x0);
      while (x < hi && it != bps.end()) {
        double xn = *it++;
        OdeTrajectory traj = integrate_ode(rhs, x, xn, y, opt);
        s.achieved_tol_ = std::max(s.achieved_tol_, traj.max_error_estimate);
        y = traj.y_end;
        s.segments_.push_back(std::move(traj));
        x = xn;
        AtomData ad;
        if (atom_at(x, ad)) {
          check_transfer(ad);
          Matrix bal = (Matrix::Identity(rows, rows) - 0.5 * ad.dr)
                           .partialPivLu()
                           .solve(apply_dg(y, ad.dg, 0.5));
          Matrix right = 2.0 * bal - y;
          s.atom_records_.push_back({x, y, bal, right});
          s.atom_xs_.push_back(x);
          y = right;
        }
      }
    }

    // leftward sweep
    {
      Matrix y = start_left;
      double x = x0;
      auto it = std::lower_bound(bps.begin(), bps.end(), x0);
      while (x > lo && it != bps.begin()) {
        double xn = *--it;
        OdeTrajectory traj = integrate_ode(rhs, x, xn, y, opt);
        s.achieved_tol_ = std::max(s.achieved_tol_, traj.max_error_estimate);
        y = traj.y_end;
        s.segments_.push_back(std::move(traj));
        x = xn;
        AtomData ad;
        if (atom_at(x, ad)) {
          check_transfer(ad);
          Matrix bal = (Matrix::Identity(rows, rows) + 0.5 * ad.dr)
                           .partialPivLu()
                           .solve(apply_dg(y, ad.dg, -0.5));
          Matrix left = 2.0 * bal - y;
          s.atom_records_.push_back({x, left, bal, y});
          s.atom_xs_.push_back(x);
          y = left;
        }
      }
    }

    std::sort(s.segments_.begin(), s.segments_.end(),
              [](const OdeTrajectory& p, const OdeTrajectory& q) {
                return std::min(p.x_begin, p.x_end) < std::min(q.x_begin, q.x_end);
              });
    std::sort(s.atom_records_.begin(), s.atom_records_.end(),
              [](const auto& p, const auto& q) { return p.x < q.x; });
    std::sort(s.atom_xs_.begin(), s.atom_xs_.end());

    for (double x : bps) {
      s.grid_.push_back(x);
      s.values_.push_back(s.value(x));
    }
    return s;
  }
};

BalancedSolution BalancedSolution::from_closures(RealInterval domain, double lo,
                                                 double hi, double x0, MatrixFn value,
                                                 MatrixFn left, MatrixFn right,
                                                 std::vector<double> atom_xs) {
  BalancedSolution s;
  s.domain_ = domain;
  s.lo_ = lo;
  s.hi_ = hi;
  s.x0_ = x0;
  s.fn_value_ = std::move(value);
  s.fn_left_ = std::move(left);
  s.fn_right_ = std::move(right);
  s.atom_xs_ = std::move(atom_xs);
  std::sort(s.atom_xs_.begin(), s.atom_xs_.end());
  s.grid_ = s.atom_xs_;
  for (double x : s.grid_) s.values_.push_back(s.fn_value_(x));
  return s;
}

Matrix BalancedSolution::value(double x) const {
  if (fn_value_) return fn_value_(x);
  for (const auto& ar : atom_records_)
    if (ar.x == x) return ar.balanced;
  if (x < lo_ || x > hi_) throw Error("evaluation outside the solved range");
  if (x == x0_ && segments_.empty()) return initial_value_;
  for (const auto& seg : segments_)
    if (seg.covers(x)) return seg.eval(x);
  throw Error("evaluation gap in solution coverage");
}

Matrix BalancedSolution::left(double x) const {
  if (fn_left_) return fn_left_(x);
  for (const auto& ar : atom_records_)
    if (ar.x == x) return ar.left;
  return value(x);
}

Matrix BalancedSolution::right(double x) const {
  if (fn_right_) return fn_right_(x);
  for (const auto& ar : atom_records_)
    if (ar.x == x) return ar.right;
  return value(x);
}

Matrix BalancedSolution::endpoint_value(Endpoint e) const {
  return (e == Endpoint::Lower) ? left(lo_) : right(hi_);
}

BalancedSolution solve_ivp_balanced(const MatrixMeasure& r, const MatrixMeasure* g,
                                    double x0, const Matrix& u0, double lo, double hi,
                                    const IvpOptions& opt) {
  return IvpBuilder::run(r, g, x0, u0, lo, hi, opt);
}

MatrixMeasure coefficient_measure(const SpectralProblem& p, Complex lambda) {
  auto q = std::make_shared<MatrixMeasure>(p.q());
  auto w = std::make_shared<MatrixMeasure>(p.w());
  Matrix jinv = p.J_inverse();

  std::vector<double> edges;
  for (const auto& pc : q->pieces()) {
    edges.push_back(pc.left);
    edges.push_back(pc.right);
  }
  for (const auto& pc : w->pieces()) {
    edges.push_back(pc.left);
    edges.push_back(pc.right);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::vector<Piece> pieces;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    double l = edges[i], rgt = edges[i + 1];
    bool active = false;
    for (const auto& pc : q->pieces())
      if (pc.left <= l && rgt <= pc.right) active = true;
    for (const auto& pc : w->pieces())
      if (pc.left <= l && rgt <= pc.right) active = true;
    if (!active) continue;
    Piece np{l, rgt, {}, nullptr};
    np.evaluator = [q, w, jinv, lambda](double x) {
      return Matrix(jinv * (lambda * w->density_at(x) - q->density_at(x)));
    };
    pieces.push_back(std::move(np));
  }

  std::vector<double> locs;
  for (const auto& at : q->atoms()) locs.push_back(at.location);
  for (const auto& at : w->atoms()) locs.push_back(at.location);
  std::sort(locs.begin(), locs.end());
  locs.erase(std::unique(locs.begin(), locs.end()), locs.end());
  std::vector<Atom> atoms;
  for (double x : locs)
    atoms.push_back({x, jinv * (lambda * w->jump_at(x) - q->jump_at(x))});

  return MatrixMeasure(p.interval(), p.size(), p.size(), std::move(pieces),
                       std::move(atoms));
}

FundamentalMatrix::FundamentalMatrix(const SpectralProblem& p, Complex lambda,
                                     IvpOptions opt)
    : p_(&p), lambda_(lambda), opt_(opt), r_(coefficient_measure(p, lambda)),
      cov_lo_(p.x0()), cov_hi_(p.x0()) {
  // the dense-output interpolant is one order below the step error and its
  // values feed quadratures, so run the integrator tighter than requested
  opt_.rel_tol *= 1e-2;
  opt_.abs_tol *= 1e-2;
}

const BalancedSolution& FundamentalMatrix::ensure(double lo, double hi) const {
  std::lock_guard<std::mutex> lock(mu_);
  if (sol_ && cov_lo_ <= lo && hi <= cov_hi_) return *sol_;
  auto [er_lo, er_hi] = p_->effective_range();
  double want_lo = std::min({lo, std::isfinite(er_lo) ? er_lo : lo, p_->x0()});
  double want_hi = std::max({hi, std::isfinite(er_hi) ? er_hi : hi, p_->x0()});
  if (sol_) {
    want_lo = std::min(want_lo, cov_lo_);
    want_hi = std::max(want_hi, cov_hi_);
  }
  sol_ = std::make_shared<const BalancedSolution>(
      solve_ivp_balanced(r_, nullptr, p_->x0(),
                         Matrix::Identity(p_->size(), p_->size()), want_lo, want_hi,
                         opt_));
  cov_lo_ = want_lo;
  cov_hi_ = want_hi;
  return *sol_;
}

Matrix FundamentalMatrix::value(double x) const {
  const auto& iv = p_->interval();
  if (x < iv.a || x > iv.b) throw Error("evaluation outside the interval");
  auto [hl, hh] = r_.support_hull();
  if (hl > hh) return Matrix::Identity(p_->size(), p_->size());
  if (x > hh) return ensure(hh, hh).right(hh);   // constant tail
  if (x < hl) return ensure(hl, hl).left(hl);
  return ensure(x, x).value(x);
}

Matrix FundamentalMatrix::left(double x) const {
  Matrix dr = r_.jump_at(x);
  if (ent1_norm(dr) == 0) return value(x);
  return (Matrix::Identity(p_->size(), p_->size()) - 0.5 * dr) * value(x);
}

Matrix FundamentalMatrix::right(double x) const {
  Matrix dr = r_.jump_at(x);
  if (ent1_norm(dr) == 0) return value(x);
  return (Matrix::Identity(p_->size(), p_->size()) + 0.5 * dr) * value(x);
}

Matrix FundamentalMatrix::endpoint_value(Endpoint e) const {
  const auto& iv = p_->interval();
  double end = (e == Endpoint::Lower) ? iv.a : iv.b;
  if (std::isfinite(end)) return value(end);
  if (!p_->regular_at(e))
    throw Error("no boundary value at a singular infinite endpoint");
  auto [hl, hh] = r_.support_hull();
  if (hl > hh) return Matrix::Identity(p_->size(), p_->size());
  return (e == Endpoint::Upper) ? ensure(hh, hh).right(hh) : ensure(hl, hl).left(hl);
}

LambdaSet lambda_set(const SpectralProblem& p) {
  LambdaSet out;
  const int n = p.size();
  const Matrix J2 = 2.0 * p.J();

  std::vector<double> locs;
  for (const auto& at : p.q().atoms()) locs.push_back(at.location);
  for (const auto& at : p.w().atoms()) locs.push_back(at.location);
  std::sort(locs.begin(), locs.end());
  locs.erase(std::unique(locs.begin(), locs.end()), locs.end());

  for (double x : locs) {
    Matrix dq = p.q().jump_at(x), dw = p.w().jump_at(x);
    for (int sign : {+1, -1}) {
      // det(2J + s(lambda dw - dq)) = 0. A = 2J - s dq is invertible by
      // hypothesis, so the roots are -1/theta over the nonzero eigenvalues
      // of A^{-1}(s dw); zero eigenvalues are roots at infinity.
      Matrix A = J2 - static_cast<double>(sign) * dq;
      Matrix B = static_cast<double>(sign) * dw;
      if (ent1_norm(B) == 0) continue;
      Matrix C = A.partialPivLu().solve(B);
      Eigen::ComplexEigenSolver<Matrix> es(C);
      for (int i = 0; i < n; ++i) {
        Complex theta = es.eigenvalues()(i);
        if (std::abs(theta) < 1e-12)
          out.infinite_count += 1;
        else
          out.points.push_back({-1.0 / theta, x, sign});
      }
    }
  }
  return out;
}

bool lambda_forbidden(const SpectralProblem& p, Complex lambda, double lo, double hi,
                      double* where) {
  std::vector<double> locs;
  for (const auto& at : p.q().atoms()) locs.push_back(at.location);
  for (const auto& at : p.w().atoms()) locs.push_back(at.location);
  for (double x : locs) {
    if (x < lo || x > hi) continue;
    Matrix d = lambda * p.w().jump_at(x) - p.q().jump_at(x);
    for (int sign : {+1, -1}) {
      Matrix m = 2.0 * p.J() + static_cast<double>(sign) * d;
      if (sigma_min_ratio(m) <= 1e-10) {
        if (where) *where = x;
        return true;
      }
    }
  }
  return false;
}

WronskianReport wronskian(const BalancedSolution& u, const BalancedSolution& v,
                          const Matrix& J, const std::vector<double>& grid) {
  if (grid.empty()) throw UsageError("empty grid");
  for (double x : grid)
    if (x < u.range_lo() || x > u.range_hi() || x < v.range_lo() || x > v.range_hi())
      throw UsageError("grid point outside a solution range");
  WronskianReport rep;
  Matrix acc;
  for (double x : grid) {
    Matrix wp = u.right(x).adjoint() * J * v.right(x);
    Matrix wm = u.left(x).adjoint() * J * v.left(x);
    if (acc.size() == 0)
      acc = wp + wm;
    else
      acc += wp + wm;
    rep.plus_values.push_back(std::move(wp));
    rep.minus_values.push_back(std::move(wm));
  }
  rep.mean = acc / (2.0 * static_cast<double>(grid.size()));
  rep.max_deviation = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rep.max_deviation =
        std::max(rep.max_deviation, ent1_norm(rep.plus_values[i] - rep.mean));
    rep.max_deviation =
        std::max(rep.max_deviation, ent1_norm(rep.minus_values[i] - rep.mean));
  }
  return rep;
}

BalancedSolution variation_of_constants(const SpectralProblem& p, Complex lambda,
                                        const VectorFn& f, double lo, double hi,
                                        const IvpOptions& opt, const QuadOptions& quad) {
  double bad;
  if (lambda_forbidden(p, lambda, lo, hi, &bad))
    throw LambdaForbiddenError(
        "lambda in the forbidden set at atom x = " + std::to_string(bad), bad);
  auto U = std::make_shared<FundamentalMatrix>(p, lambda, opt);
  auto Ubar = std::make_shared<FundamentalMatrix>(p, std::conj(lambda), opt);
  auto w = std::make_shared<MatrixMeasure>(p.w());
  auto q = std::make_shared<MatrixMeasure>(p.q());
  const Matrix jinv = p.J_inverse();
  const double x0 = p.x0();
  const int n = p.size();

  MatrixFn ustar = [Ubar](double t) { return Matrix(Ubar->value(t).adjoint()); };
  MatrixFn ff = [f](double t) { return Matrix(f(t)); };
  auto splits = std::make_shared<std::vector<double>>(
      p.coefficient_breakpoints(lo, hi));

  auto balanced = [=](double x) -> Matrix {
    Matrix corr = 0.5 * jinv * Ubar->value(x).adjoint() * w->jump_at(x) * f(x);
    if (x >= x0) {
      Matrix acc = (x0 < x)
                       ? Matrix(stieltjes_integrate_split(ustar, *w, ff, x0, x,
                                                          Ends::OpenOpen, *splits, quad))
                       : Matrix(Matrix::Zero(n, 1));
      return U->value(x) * (jinv * acc) + U->right(x) * corr;
    }
    Matrix acc = (x < x0)
                     ? Matrix(stieltjes_integrate_split(ustar, *w, ff, x, x0,
                                                        Ends::OpenOpen, *splits, quad))
                     : Matrix(Matrix::Zero(n, 1));
    return -U->value(x) * (jinv * acc) - U->left(x) * corr;
  };
  auto one_sided = [=](double x, double side) -> Matrix {
    Matrix bal = balanced(x);
    Matrix d = lambda * w->jump_at(x) - q->jump_at(x);
    Matrix dg = w->jump_at(x) * f(x);
    return bal + 0.5 * side * jinv * (d * bal + dg);
  };
  auto left = [one_sided](double x) { return one_sided(x, -1.0); };
  auto right = [one_sided](double x) { return one_sided(x, +1.0); };

  std::vector<double> atom_xs;
  for (const auto& at : p.w().atoms())
    if (lo <= at.location && at.location <= hi) atom_xs.push_back(at.location);
  for (const auto& at : p.q().atoms())
    if (lo <= at.location && at.location <= hi) atom_xs.push_back(at.location);
  std::sort(atom_xs.begin(), atom_xs.end());
  atom_xs.erase(std::unique(atom_xs.begin(), atom_xs.end()), atom_xs.end());

  return BalancedSolution::from_closures(p.interval(), lo, hi, x0, balanced, left,
                                         right, std::move(atom_xs));
}

DlambdaReport dlambda_check(const SpectralProblem& p, Complex lambda0, double x,
                            double step, const IvpOptions& opt) {
  if (step <
      64 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lambda0)))
    throw NumericError("finite-difference step underflow");
  auto U_at = [&](Complex lam) {
    FundamentalMatrix U(p, lam, opt);
    return U.value(x);
  };
  auto central = [&](double h) {
    return Matrix((U_at(lambda0 + h) - U_at(lambda0 - h)) / (2.0 * h));
  };
  Matrix d1 = central(step);
  Matrix d2 = central(step / 2);
  Matrix d4 = central(step / 4);
  DlambdaReport rep;
  rep.derivative = (4.0 * d4 - d2) / 3.0;
  double num = ent1_norm(d1 - d2), den = ent1_norm(d2 - d4);
  rep.richardson_ratio = (den > 0) ? num / den : 4.0;
  rep.step = step / 4;
  return rep;
}

}  // namespace specsys
