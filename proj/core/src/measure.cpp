#include "specsys/measure.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace specsys {

namespace {

// QUADPACK 15-point Kronrod nodes on [-1,1] (positive half) with Kronrod
// weights and the embedded 7-point Gauss weights.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

}  // namespace

Matrix gk15_panel(const MatrixFn& f, double a, double b, double* err) {
  const double h = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  Matrix fc = f(mid);
  Matrix gauss = Matrix::Zero(fc.rows(), fc.cols());
  Matrix kron = kWgk[7] * fc;
  for (int j = 0; j < 7; ++j) {
    Matrix lo = f(mid - h * kXgk[j]);
    Matrix hi = f(mid + h * kXgk[j]);
    kron += kWgk[j] * (lo + hi);
    if (j % 2 == 1) gauss += kWg[j / 2] * (lo + hi);
  }
  gauss += kWg[3] * fc;
  kron *= h;
  gauss *= h;
  if (err) *err = ent1_norm(kron - gauss);
  return kron;
}

Matrix gk15_adaptive(const MatrixFn& f, double a, double b, int rows, int cols,
                     const QuadOptions& opt) {
  if (!(a < b)) return Matrix::Zero(rows, cols);
  struct Cell {
    double a, b, err;
    Matrix val;
    int depth;
  };
  double err0;
  Matrix total = gk15_panel(f, a, b, &err0);
  std::deque<Cell> cells{{a, b, err0, total, 0}};
  double total_err = err0;

  auto tol = [&](const Matrix& whole) {
    return std::max(opt.abs_tol, opt.rel_tol * ent1_norm(whole));
  };

  while (total_err > tol(total)) {
    auto worst = std::max_element(cells.begin(), cells.end(),
                                  [](const Cell& x, const Cell& y) { return x.err < y.err; });
    if (worst->depth >= opt.max_depth)
      throw NumericError("quadrature failed to converge (max subdivision depth)");
    Cell c = *worst;
    cells.erase(worst);
    double m = 0.5 * (c.a + c.b);
    double e1, e2;
    Matrix v1 = gk15_panel(f, c.a, m, &e1);
    Matrix v2 = gk15_panel(f, m, c.b, &e2);
    total += v1 + v2 - c.val;
    total_err += e1 + e2 - c.err;
    cells.push_back({c.a, m, e1, v1, c.depth + 1});
    cells.push_back({m, c.b, e2, v2, c.depth + 1});
    if (cells.size() > 100000) throw NumericError("quadrature cell budget exhausted");
  }
  return total;
}

Matrix Piece::density(double x) const {
  if (!poly.empty()) {
    Matrix v = poly.back();
    for (int k = static_cast<int>(poly.size()) - 2; k >= 0; --k) v = v * x + poly[k];
    return v;
  }
  return evaluator(x);
}

MatrixMeasure::MatrixMeasure(RealInterval interval, int rows, int cols,
                             std::vector<Piece> pieces, std::vector<Atom> atoms)
    : interval_(interval), rows_(rows), cols_(cols),
      pieces_(std::move(pieces)), atoms_(std::move(atoms)) {
  std::sort(pieces_.begin(), pieces_.end(),
            [](const Piece& p, const Piece& q) { return p.left < q.left; });
  std::sort(atoms_.begin(), atoms_.end(),
            [](const Atom& p, const Atom& q) { return p.location < q.location; });
  for (const auto& p : pieces_) {
    if (!(p.left < p.right)) throw ValidationError("piece needs left < right");
    if (p.left < interval_.a - 1e-15 || p.right > interval_.b + 1e-15)
      throw ValidationError("piece exceeds the interval");
    if (p.poly.empty() && !p.evaluator) throw ValidationError("piece without density");
    for (const auto& c : p.poly)
      if (c.rows() != rows_ || c.cols() != cols_)
        throw ValidationError("piece coefficient shape mismatch");
  }
  for (std::size_t i = 1; i < pieces_.size(); ++i)
    if (pieces_[i].left < pieces_[i - 1].right - 1e-15)
      throw ValidationError("overlapping pieces");
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const auto& at = atoms_[i];
    if (!interval_.contains(at.location))
      throw ValidationError("atom at or outside the interval endpoints");
    if (at.jump.rows() != rows_ || at.jump.cols() != cols_)
      throw ValidationError("atom shape mismatch");
    if (i > 0 && !(atoms_[i - 1].location < at.location))
      throw ValidationError("atoms must have strictly increasing distinct locations");
  }
  // Reference point of the antiderivative: just left of the support so
  // that Q reads as the cumulative mass, falling back to something finite.
  auto [lo, hi] = support_hull();
  if (lo <= hi) {
    if (lo > interval_.a) {
      if (std::isfinite(interval_.a))
        ref_ = (lo - 1.0 > interval_.a) ? lo - 1.0 : 0.5 * (interval_.a + lo);
      else
        ref_ = lo - 1.0;
    } else {
      ref_ = lo;  // density reaches the endpoint; anchor there
    }
  } else if (interval_.finite()) {
    ref_ = 0.5 * (interval_.a + interval_.b);
  } else if (std::isfinite(interval_.a)) {
    ref_ = interval_.a + 1.0;
  } else if (std::isfinite(interval_.b)) {
    ref_ = interval_.b - 1.0;
  } else {
    ref_ = 0.0;
  }
}

MatrixMeasure MatrixMeasure::zero(RealInterval interval, int rows, int cols) {
  return MatrixMeasure(interval, rows, cols, {}, {});
}

MatrixMeasure MatrixMeasure::constant_density(RealInterval interval, const Matrix& value) {
  if (!interval.finite())
    throw ValidationError("constant density requires a finite interval");
  Piece p{interval.a, interval.b, {value}, nullptr};
  return MatrixMeasure(interval, static_cast<int>(value.rows()),
                       static_cast<int>(value.cols()), {p}, {});
}

MatrixMeasure MatrixMeasure::point_mass(RealInterval interval, double x, const Matrix& jump) {
  return MatrixMeasure(interval, static_cast<int>(jump.rows()),
                       static_cast<int>(jump.cols()), {}, {Atom{x, jump}});
}

std::optional<std::size_t> MatrixMeasure::atom_index(double x) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x,
                             [](const Atom& a, double v) { return a.location < v; });
  if (it != atoms_.end() && it->location == x)
    return static_cast<std::size_t>(it - atoms_.begin());
  return std::nullopt;
}

Matrix MatrixMeasure::jump_at(double x) const {
  if (x < interval_.a || x > interval_.b) throw Error("point outside the interval");
  if (auto i = atom_index(x)) return atoms_[*i].jump;
  return Matrix::Zero(rows_, cols_);
}

Matrix MatrixMeasure::density_at(double x) const {
  for (const auto& p : pieces_)
    if (p.left <= x && x <= p.right) return p.density(x);
  return Matrix::Zero(rows_, cols_);
}

Matrix MatrixMeasure::mass(double c, double d, const QuadOptions& opt) const {
  Matrix out = Matrix::Zero(rows_, cols_);
  if (!(c < d)) return out;
  for (const auto& p : pieces_) {
    double lo = std::max(c, p.left), hi = std::min(d, p.right);
    if (lo < hi)
      out += gk15_adaptive([&p](double x) { return p.density(x); }, lo, hi, rows_, cols_, opt);
  }
  for (const auto& at : atoms_)
    if (c <= at.location && at.location < d) out += at.jump;
  return out;
}

Matrix MatrixMeasure::antiderivative(double x, Side side) const {
  if (x < interval_.a || x > interval_.b) throw Error("point outside the interval");
  Matrix q_left;  // left-continuous value Q^-(x), normalized Q^-(ref)=0 first
  if (x >= ref_)
    q_left = mass(ref_, x);
  else
    q_left = -mass(x, ref_);
  // shift so that the balanced value vanishes at the reference point
  q_left -= 0.5 * jump_at(ref_);
  switch (side) {
    case Side::Left: return q_left;
    case Side::Right: return q_left + jump_at(x);
    case Side::Balanced: return q_left + 0.5 * jump_at(x);
  }
  return q_left;
}

double MatrixMeasure::variation(double c, double d, const QuadOptions& opt) const {
  if (!(c <= d)) throw Error("variation needs c <= d");
  if (c < interval_.a || d > interval_.b) throw Error("range outside the interval");
  double var = 0.0;
  for (const auto& p : pieces_) {
    double lo = std::max(c, p.left), hi = std::min(d, p.right);
    if (lo < hi) {
      Matrix v = gk15_adaptive(
          [&p](double x) {
            Matrix d = p.density(x);
            return Matrix(d.cwiseAbs().cast<Complex>());
          },
          lo, hi, rows_, cols_, opt);
      if (!v.allFinite()) throw NumericError("unbounded density in variation");
      var += v.real().sum();
    }
  }
  for (const auto& at : atoms_)
    if (c <= at.location && at.location <= d) var += ent1_norm(at.jump);
  if (!std::isfinite(var)) throw NumericError("variation did not converge");
  return var;
}

std::vector<double> MatrixMeasure::breakpoints(double lo, double hi) const {
  std::vector<double> pts;
  for (const auto& p : pieces_) {
    if (p.left >= lo && p.left <= hi) pts.push_back(p.left);
    if (p.right >= lo && p.right <= hi) pts.push_back(p.right);
  }
  for (const auto& at : atoms_)
    if (at.location >= lo && at.location <= hi) pts.push_back(at.location);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

std::pair<double, double> MatrixMeasure::support_hull() const {
  double lo = kInf, hi = -kInf;
  for (const auto& p : pieces_) {
    lo = std::min(lo, p.left);
    hi = std::max(hi, p.right);
  }
  for (const auto& at : atoms_) {
    lo = std::min(lo, at.location);
    hi = std::max(hi, at.location);
  }
  return {lo, hi};
}

bool MatrixMeasure::regular_at(Endpoint e) const {
  double end = (e == Endpoint::Lower) ? interval_.a : interval_.b;
  if (std::isfinite(end)) return true;  // bounded pieces, finitely many atoms
  auto [lo, hi] = support_hull();
  if (lo > hi) return true;
  // Infinite endpoint: regular iff no piece reaches out to it.
  return (e == Endpoint::Lower) ? std::isfinite(lo) : std::isfinite(hi);
}

MatrixMeasure MatrixMeasure::conjugate_transpose() const {
  std::vector<Piece> ps;
  for (const auto& p : pieces_) {
    Piece q{p.left, p.right, {}, nullptr};
    if (p.is_polynomial()) {
      for (const auto& ck : p.poly) q.poly.push_back(ck.adjoint());
    } else {
      auto ev = p.evaluator;
      q.evaluator = [ev](double x) { return Matrix(ev(x).adjoint()); };
    }
    ps.push_back(std::move(q));
  }
  std::vector<Atom> as;
  for (const auto& at : atoms_) as.push_back({at.location, at.jump.adjoint()});
  return MatrixMeasure(interval_, cols_, rows_, std::move(ps), std::move(as));
}

Matrix stieltjes_integrate(const MatrixFn& F, const MatrixMeasure& m, const MatrixFn& G,
                           double c, double d, Ends ends, const QuadOptions& opt) {
  if (c > d) throw Error("integration range needs c <= d");
  const int out_rows = F ? static_cast<int>(F(c).rows()) : m.rows();
  const int out_cols = G ? static_cast<int>(G(c).cols()) : m.cols();
  Matrix out = Matrix::Zero(out_rows, out_cols);

  auto term = [&](double x, const Matrix& dm) -> Matrix {
    Matrix t = dm;
    if (F) t = F(x) * t;
    if (G) t = t * G(x);
    return t;
  };

  if (c < d) {
    for (const auto& p : m.pieces()) {
      double lo = std::max(c, p.left), hi = std::min(d, p.right);
      if (lo < hi)
        out += gk15_adaptive([&](double x) { return term(x, p.density(x)); },
                             lo, hi, out_rows, out_cols, opt);
    }
  }
  const bool take_lo = (ends == Ends::ClosedClosed || ends == Ends::ClosedOpen);
  const bool take_hi = (ends == Ends::ClosedClosed || ends == Ends::OpenClosed);
  for (const auto& at : m.atoms()) {
    if (at.location < c || at.location > d) continue;
    if (at.location == c && !take_lo) continue;
    if (at.location == d && !take_hi) continue;
    if (at.location == c && at.location == d && !(take_lo && take_hi)) continue;
    out += term(at.location, at.jump);
  }
  return out;
}

Matrix stieltjes_integrate(const MatrixFn& f, const MatrixMeasure& m,
                           double c, double d, Ends ends, const QuadOptions& opt) {
  return stieltjes_integrate(f, m, nullptr, c, d, ends, opt);
}

Matrix stieltjes_integrate_split(const MatrixFn& F, const MatrixMeasure& m,
                                 const MatrixFn& G, double c, double d, Ends ends,
                                 const std::vector<double>& splits,
                                 const QuadOptions& opt) {
  std::vector<double> pts{c};
  for (double s : splits)
    if (c < s && s < d) pts.push_back(s);
  pts.push_back(d);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  const bool take_lo = (ends == Ends::ClosedClosed || ends == Ends::ClosedOpen);
  const bool take_hi = (ends == Ends::ClosedClosed || ends == Ends::OpenClosed);
  Matrix out;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    bool first = (i == 0), last = (i + 2 == pts.size());
    Ends e;
    if (first && last)
      e = ends;
    else if (first)
      e = take_lo ? Ends::ClosedOpen : Ends::OpenOpen;
    else if (last)
      e = take_hi ? Ends::ClosedClosed : Ends::ClosedOpen;
    else
      e = Ends::ClosedOpen;
    Matrix part = stieltjes_integrate(F, m, G, pts[i], pts[i + 1], e, opt);
    out = (out.size() == 0) ? part : Matrix(out + part);
  }
  if (out.size() == 0) out = stieltjes_integrate(F, m, G, c, d, ends, opt);
  return out;
}

MatrixMeasure measure_times_function(const MatrixMeasure& m, const VectorFn& f,
                                     const Matrix* left) {
  Matrix L = left ? *left : Matrix(Matrix::Identity(m.rows(), m.rows()));
  std::vector<Piece> ps;
  for (const auto& p : m.pieces()) {
    Piece q{p.left, p.right, {}, nullptr};
    Piece pc = p;  // capture by value
    q.evaluator = [pc, f, L](double x) { return Matrix(L * pc.density(x) * f(x)); };
    ps.push_back(std::move(q));
  }
  std::vector<Atom> as;
  for (const auto& at : m.atoms()) as.push_back({at.location, L * at.jump * f(at.location)});
  return MatrixMeasure(m.interval(), static_cast<int>(L.rows()), 1, std::move(ps),
                       std::move(as));
}

namespace {

// Sample points of a piece for Hermitian / positivity spot checks: ends plus
// the Kronrod nodes of the whole piece.
std::vector<double> piece_samples(const Piece& p) {
  double lo = p.left, hi = p.right;
  if (!std::isfinite(lo)) lo = std::isfinite(hi) ? hi - 10.0 : -10.0;
  if (!std::isfinite(hi)) hi = lo + 10.0;
  std::vector<double> xs{lo, hi};
  double h = 0.5 * (hi - lo), mid = 0.5 * (lo + hi);
  for (int j = 0; j < 8; ++j) {
    xs.push_back(mid - h * kXgk[j]);
    xs.push_back(mid + h * kXgk[j]);
  }
  return xs;
}

}  // namespace

ValidationReport validate_coefficients(const MatrixMeasure& q, const MatrixMeasure& w,
                                       const Matrix& J) {
  ValidationReport rep;
  const int n = static_cast<int>(J.rows());
  const double eig_floor = -1e-12;
  const double herm_tol = 1e-12;

  bool square = J.cols() == n && q.rows() == n && q.cols() == n && w.rows() == n &&
                w.cols() == n;
  rep.add("shapes square and consistent", square);
  if (!square) return rep;

  Eigen::JacobiSVD<Matrix> svd(J);
  bool j_inv = svd.singularValues()(n - 1) > 1e-13 * svd.singularValues()(0);
  rep.add("J invertible", j_inv);
  double skew = ent1_norm(J.adjoint() + J);
  rep.add("J skew-Hermitian", skew <= herm_tol * std::max(1.0, ent1_norm(J)),
          "|J*+J|_1 = " + std::to_string(skew));

  double q_herm = 0.0;
  for (const auto& p : q.pieces())
    for (double x : piece_samples(p)) {
      Matrix v = p.density(x);
      q_herm = std::max(q_herm, ent1_norm(v - v.adjoint()) / std::max(1.0, ent1_norm(v)));
    }
  for (const auto& at : q.atoms())
    q_herm = std::max(q_herm, ent1_norm(at.jump - at.jump.adjoint()) /
                                  std::max(1.0, ent1_norm(at.jump)));
  rep.add("q Hermitian", q_herm <= 1e-10, "max relative deviation " + std::to_string(q_herm));

  double w_floor = 0.0, w_herm = 0.0;
  auto floor_of = [&](const Matrix& v) {
    Matrix h = 0.5 * (v + v.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    w_floor = std::min(w_floor, es.eigenvalues().minCoeff() / scale);
    w_herm = std::max(w_herm, ent1_norm(v - v.adjoint()) / std::max(1.0, ent1_norm(v)));
  };
  for (const auto& p : w.pieces())
    for (double x : piece_samples(p)) floor_of(p.density(x));
  for (const auto& at : w.atoms()) floor_of(at.jump);
  rep.add("w non-negative", w_floor >= eig_floor && w_herm <= 1e-10,
          "eigenvalue floor " + std::to_string(w_floor));

  bool all_inv = true;
  std::string bad;
  for (const auto& at : q.atoms()) {
    for (int s : {+1, -1}) {
      Matrix m2 = 2.0 * J + static_cast<double>(s) * at.jump;
      Eigen::JacobiSVD<Matrix> sv(m2);
      if (sv.singularValues()(n - 1) <= 1e-12 * std::max(1.0, sv.singularValues()(0))) {
        all_inv = false;
        bad = "2J" + std::string(s > 0 ? "+" : "-") + "Delta_q singular at x = " +
              std::to_string(at.location);
      }
    }
  }
  rep.add("2J +/- Delta_q invertible at q atoms", all_inv, bad);
  return rep;
}

}  // namespace specsys
