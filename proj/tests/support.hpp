// Shared fixtures: the worked examples, classical regressions, and a
// generator of random regular problems with self-adjoint boundary
// conditions.
#pragma once

#include "specsys/greens.hpp"
#include "specsys/weyl2.hpp"

#include <random>

namespace testsup {

using namespace specsys;

inline constexpr double kPi = 3.14159265358979323846;

// J = i, q = 0, w = delta_0 on R, x0 = -1.
inline SpectralProblem point_mass_line() {
  RealInterval iv(-kInf, kInf);
  Matrix J(1, 1);
  J(0, 0) = Complex(0, 1);
  Matrix one(1, 1);
  one(0, 0) = 1.0;
  return SpectralProblem(iv, J, MatrixMeasure::zero(iv, 1, 1),
                         MatrixMeasure::point_mass(iv, 0.0, one), -1.0);
}

// Coupled condition u(0+) = gamma u(0-) as a boundary row (-gamma, 1).
inline Matrix point_mass_line_bc(Complex gamma) {
  Matrix A(1, 2);
  A << -gamma, Complex(1.0);
  return A;
}

// (0,b), J = [[0,-1],[1,0]], q = 0, w = diag(1,0), x0 = 0.
inline SpectralProblem degenerate_weight(double b = 1.0) {
  RealInterval iv(0, b);
  Matrix J(2, 2);
  J << 0, -1, 1, 0;
  Matrix wd(2, 2);
  wd << 1, 0, 0, 0;
  return SpectralProblem(iv, J, MatrixMeasure::zero(iv, 2, 2),
                         MatrixMeasure::constant_density(iv, wd), 0.0);
}

inline Matrix degenerate_weight_bc(double gamma) {
  Matrix A(1, 4);
  A << 0.0, -1.0, gamma, 1.0;
  return A;
}

// -y'' + cy = lambda y on (lo,hi) as a system (c = 0 by default).
inline SpectralProblem schroedinger_system(double lo, double hi, double x0,
                                           double c = 0.0) {
  RealInterval iv(lo, hi);
  Matrix J(2, 2);
  J << 0, -1, 1, 0;
  Matrix qd(2, 2);
  qd << c, 0, 0, -1;
  Matrix wd(2, 2);
  wd << 1, 0, 0, 0;
  MatrixMeasure q(iv, 2, 2, {Piece{lo, hi, {qd}, nullptr}}, {});
  MatrixMeasure w(iv, 2, 2, {Piece{lo, hi, {wd}, nullptr}}, {});
  return SpectralProblem(iv, J, q, w, x0);
}

inline SpectralProblem sl_dirichlet_problem() {
  return schroedinger_system(0.0, kPi, 1.5);
}

inline Matrix dirichlet_bc_2x4() {
  Matrix A(2, 4);
  A << 1, 0, 0, 0, 0, 0, 1, 0;
  return A;
}

// String with one point mass m at c on (0,L), Dirichlet ends folded into a
// single boundary row ((L-c)/c, 0, 1, 0).
inline SpectralProblem krein_point_mass(double m = 1.0, double c = 1.0 / 3,
                                        double L = 1.0) {
  RealInterval iv(0, L);
  Matrix J(2, 2);
  J << 0, -1, 1, 0;
  Matrix qd(2, 2);
  qd << 0, 0, 0, -1;
  MatrixMeasure q(iv, 2, 2, {Piece{0, L, {qd}, nullptr}}, {});
  Matrix wj(2, 2);
  wj << m, 0, 0, 0;
  MatrixMeasure w = MatrixMeasure::point_mass(iv, c, wj);
  return SpectralProblem(iv, J, q, w, 0.5);
}

inline Matrix krein_bc(double c = 1.0 / 3, double L = 1.0) {
  Matrix A(1, 4);
  A << (L - c) / c, 0.0, 1.0, 0.0;
  return A;
}

// -y'' = lambda y on (0,inf): limit-point at infinity.
inline SpectralProblem free_halfline() { return schroedinger_system(0.0, kInf, 0.0); }
inline SpectralProblem free_line() {
  return schroedinger_system(-kInf, kInf, 0.0);
}

// ----- randomized regular problems -------------------------------------

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
  }
  double gauss() { return std::normal_distribution<double>()(gen); }
  Complex cgauss() { return Complex(gauss(), gauss()); }
  int integer(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(gen);
  }
  Matrix cmatrix(int r, int c, double scale = 1.0) {
    Matrix m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = scale * cgauss();
    return m;
  }
  Matrix hermitian(int n, double scale = 1.0) {
    Matrix m = cmatrix(n, n, scale);
    return 0.5 * (m + m.adjoint());
  }
  Matrix psd(int n, double scale = 1.0) {
    Matrix m = cmatrix(n, n, scale);
    return m * m.adjoint();
  }
  Matrix unitary(int n) {
    Matrix m = cmatrix(n, n);
    Eigen::HouseholderQR<Matrix> qr(m);
    return qr.householderQ() * Matrix::Identity(n, n);
  }
};

struct RandomProblem {
  SpectralProblem p;
  KernelData k;
  BoundaryConditions bc;
};

// A random regular problem on (0, len) with Hermitian q and non-negative w
// (degree <= 2 polynomial densities plus up to max_atoms atoms), whose
// forbidden set avoids the real axis, together with a random self-adjoint
// boundary condition from the unitary parametrization.
inline RandomProblem make_random_regular(Rng& rng, int n, int max_atoms = 3) {
  for (int attempt = 0; attempt < 60; ++attempt) {
    double len = rng.uniform(0.8, 1.6);
    RealInterval iv(0.0, len);
    Matrix A = rng.cmatrix(n, n);
    Matrix J = 0.5 * (A - A.adjoint());
    if (std::abs(J.determinant()) < 0.2)
      J += Complex(0, 0.8) * Matrix::Identity(n, n);

    // q: Hermitian density H0 + H1 x, w: C(x)^* C(x) with C = C0 + C1 x
    Matrix H0 = rng.hermitian(n, 0.6), H1 = rng.hermitian(n, 0.4);
    Matrix C0 = rng.cmatrix(n, n, 0.6), C1 = rng.cmatrix(n, n, 0.3);
    std::vector<Piece> qp{Piece{0, len, {H0, H1}, nullptr}};
    std::vector<Piece> wp{Piece{
        0, len,
        {Matrix(C0.adjoint() * C0), Matrix(C0.adjoint() * C1 + C1.adjoint() * C0),
         Matrix(C1.adjoint() * C1)},
        nullptr}};

    int atom_count = rng.integer(0, max_atoms);
    std::vector<Atom> qa, wa;
    std::vector<double> locs;
    for (int i = 0; i < atom_count; ++i) {
      double x = rng.uniform(0.1 * len, 0.9 * len);
      bool clash = std::abs(x - 0.5 * len) < 0.02 * len;
      for (double y : locs) clash = clash || std::abs(x - y) < 0.02 * len;
      if (clash) continue;
      locs.push_back(x);
      if (rng.integer(0, 1)) qa.push_back({x, rng.hermitian(n, 0.5)});
      else wa.push_back({x, rng.psd(n, 0.5)});
    }
    std::sort(qa.begin(), qa.end(),
              [](const Atom& a, const Atom& b) { return a.location < b.location; });
    std::sort(wa.begin(), wa.end(),
              [](const Atom& a, const Atom& b) { return a.location < b.location; });

    try {
      MatrixMeasure q(iv, n, n, qp, qa), w(iv, n, n, wp, wa);
      SpectralProblem p(iv, J, q, w, 0.5 * len);
      LambdaSet ls = lambda_set(p);
      if (!ls.real_axis_clear(1e-3)) continue;
      KernelData k = compute_kernel(p);
      if (k.kernel_dim == n) continue;
      Matrix V = rng.unitary(n - k.kernel_dim);
      Matrix Abc = self_adjoint_bc_from_unitary(p, k, V);
      BoundaryConditions bc = validate_boundary_conditions(p, k, Abc);
      return RandomProblem{p, k, bc};
    } catch (const Error&) {
      continue;
    }
  }
  throw std::runtime_error("random problem generation exhausted its attempts");
}

// ----- shooting oracle ---------------------------------------------------

// Independent eigenvalue oracle for -y'' = lambda y on (0,pi) with
// Dirichlet ends: fixed-step RK4 on (y, y') and bisection on y(pi).
inline double sl_shoot_endpoint(double lambda, int steps = 4000) {
  double y = 0.0, v = 1.0, x = 0.0;
  double h = kPi / steps;
  auto f = [lambda](double yy, double vv) {
    return std::pair<double, double>(vv, -lambda * yy);
  };
  for (int i = 0; i < steps; ++i) {
    auto [k1y, k1v] = f(y, v);
    auto [k2y, k2v] = f(y + 0.5 * h * k1y, v + 0.5 * h * k1v);
    auto [k3y, k3v] = f(y + 0.5 * h * k2y, v + 0.5 * h * k2v);
    auto [k4y, k4v] = f(y + h * k3y, v + h * k3v);
    y += h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y);
    v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    x += h;
  }
  return y;
}

inline std::vector<double> sl_shooting_eigenvalues(double lo, double hi) {
  std::vector<double> out;
  const int cells = 2000;
  double prev = sl_shoot_endpoint(lo);
  for (int i = 1; i <= cells; ++i) {
    double x = lo + (hi - lo) * static_cast<double>(i) / cells;
    double cur = sl_shoot_endpoint(x);
    if (prev == 0.0) out.push_back(lo + (hi - lo) * (i - 1.0) / cells);
    if (prev * cur < 0) {
      double a = lo + (hi - lo) * (i - 1.0) / cells, b = x, fa = prev;
      for (int it = 0; it < 80; ++it) {
        double m = 0.5 * (a + b), fm = sl_shoot_endpoint(m);
        if (fa * fm <= 0) b = m;
        else {
          a = m;
          fa = fm;
        }
      }
      out.push_back(0.5 * (a + b));
    }
    prev = cur;
  }
  return out;
}

}  // namespace testsup
