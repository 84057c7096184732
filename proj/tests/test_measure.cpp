#include "specsys/measure.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace specsys;

namespace {

Matrix scalar(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return m;
}

}  // namespace

TEST_CASE("antiderivative of a unit point mass") {
  auto w = MatrixMeasure::point_mass(RealInterval(-kInf, kInf), 0.0, scalar(1.0));
  // cumulative mass of the atom
  CHECK(w.antiderivative(1.0, Side::Left)(0, 0).real() == doctest::Approx(1.0));
  CHECK(w.antiderivative(1.0, Side::Right)(0, 0).real() == doctest::Approx(1.0));
  CHECK(w.antiderivative(1.0, Side::Balanced)(0, 0).real() == doctest::Approx(1.0));
  // balanced value at the atom is the average of 0 and 1
  CHECK(w.antiderivative(0.0, Side::Balanced)(0, 0).real() == doctest::Approx(0.5));
}

TEST_CASE("antiderivative with density and interior atom") {
  // density 1 on (0,3) with an atom of mass 2 at x=1
  RealInterval iv(0, 3);
  MatrixMeasure m(iv, 1, 1, {Piece{0, 3, {scalar(1.0)}, nullptr}},
                  {Atom{1.0, scalar(2.0)}});
  Matrix d = m.antiderivative(1.0, Side::Balanced) -
             m.antiderivative(0.5, Side::Balanced);
  // hand integration: 0.5 of density plus half the atom on the balanced side
  CHECK(d(0, 0).real() == doctest::Approx(0.5 + 1.0).epsilon(1e-12));
}

TEST_CASE("balanced antiderivative is the average of the one-sided ones") {
  RealInterval iv(0, 3);
  MatrixMeasure m(iv, 1, 1, {Piece{0, 3, {scalar(0.7)}, nullptr}},
                  {Atom{1.0, scalar(2.0)}, Atom{2.5, scalar(-0.3)}});
  for (double x : {0.5, 1.0, 1.7, 2.5, 2.9}) {
    Matrix avg = 0.5 * (m.antiderivative(x, Side::Left) +
                        m.antiderivative(x, Side::Right));
    CHECK(ent1_norm(Matrix(m.antiderivative(x, Side::Balanced) - avg)) == 0.0);
  }
}

TEST_CASE("jump reads stored atoms and nothing else") {
  Matrix jump(2, 2);
  jump << 0, 1, 1, 0;
  auto q = MatrixMeasure::point_mass(RealInterval(0, 1), 0.5, jump);
  CHECK(ent1_norm(Matrix(q.jump_at(0.5) - jump)) == 0.0);
  CHECK(ent1_norm(q.jump_at(0.7)) == 0.0);
  Matrix rho(1, 1);
  rho << 0.3;
  auto w = MatrixMeasure::constant_density(RealInterval(0, 1), rho);
  CHECK(ent1_norm(w.jump_at(0.25)) == 0.0);
}

TEST_CASE("variation") {
  auto d0 = MatrixMeasure::point_mass(RealInterval(-2, 2), 0.0, scalar(1.0));
  CHECK(d0.variation(-1, 1) == doctest::Approx(1.0));

  RealInterval iv(-1, 3);
  MatrixMeasure dens(iv, 1, 1, {Piece{0, 2, {scalar(1.0)}, nullptr}}, {});
  CHECK(dens.variation(0, 2) == doctest::Approx(2.0).epsilon(1e-12));

  MatrixMeasure both(iv, 1, 1, {Piece{0, 2, {scalar(1.0)}, nullptr}},
                     {Atom{1.0, scalar(3.0)}});
  CHECK(both.variation(0, 2) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("variation is additive across atom-free cuts") {
  testsup::Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    RealInterval iv(0, 2);
    Matrix c0 = rng.cmatrix(2, 2, 0.8), c1 = rng.cmatrix(2, 2, 0.5);
    std::vector<Atom> atoms{{0.6, rng.cmatrix(2, 2)}, {1.4, rng.cmatrix(2, 2)}};
    MatrixMeasure m(iv, 2, 2, {Piece{0, 2, {c0, c1}, nullptr}}, atoms);
    double c = 0.1, d = 1.0, e = 1.9;  // no atom at d
    CHECK(m.variation(c, d) + m.variation(d, e) ==
          doctest::Approx(m.variation(c, e)).epsilon(1e-9));
  }
}

TEST_CASE("variation is at least the atom mass") {
  auto m = MatrixMeasure::point_mass(RealInterval(0, 1), 0.5, scalar(-2.5));
  CHECK(m.variation(0.25, 0.75) >= 2.5);
}

TEST_CASE("stieltjes integration of point masses") {
  auto d0 = MatrixMeasure::point_mass(RealInterval(-2, 2), 0.0, scalar(1.0));
  MatrixFn f = [](double) { return scalar(7.0); };
  // degenerate closed interval picks up exactly the atom
  Matrix v = stieltjes_integrate(f, d0, 0.0, 0.0, Ends::ClosedClosed);
  CHECK(v(0, 0).real() == doctest::Approx(7.0));

  auto d1 = MatrixMeasure::point_mass(RealInterval(-2, 2), 1.0, scalar(1.0));
  Matrix z = stieltjes_integrate(f, d1, 0.0, 1.0, Ends::ClosedOpen);
  CHECK(ent1_norm(z) == 0.0);  // half-open excludes the atom at 1
  Matrix o = stieltjes_integrate(f, d1, 0.0, 1.0, Ends::ClosedClosed);
  CHECK(o(0, 0).real() == doctest::Approx(7.0));
}

TEST_CASE("degenerate closed interval equals f(x) * jump exactly") {
  Matrix jump(2, 2);
  jump << 1.5, Complex(0, 1), Complex(0, -1), 0.25;
  auto m = MatrixMeasure::point_mass(RealInterval(0, 1), 0.5, jump);
  Matrix fx(2, 2);
  fx << 2, 0, 1, 3;
  MatrixFn f = [fx](double) { return fx; };
  Matrix got = stieltjes_integrate(f, m, 0.5, 0.5, Ends::ClosedClosed);
  CHECK(ent1_norm(Matrix(got - fx * jump)) == 0.0);
}

TEST_CASE("integration by parts for balanced BV functions") {
  // F, G of locally bounded variation with disjoint jumps:
  // int_{[x1,x2)} (F+ dG + G- dF) = (FG)-(x2) - (FG)-(x1)
  testsup::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    RealInterval iv(0, 2);
    Matrix fc0 = scalar(rng.gauss()), fc1 = scalar(rng.gauss());
    Matrix gc0 = scalar(rng.gauss()), gc1 = scalar(rng.gauss());
    MatrixMeasure mF(iv, 1, 1, {Piece{0, 2, {fc0, fc1}, nullptr}},
                     {Atom{0.5, scalar(rng.gauss())}});
    MatrixMeasure mG(iv, 1, 1, {Piece{0, 2, {gc0, gc1}, nullptr}},
                     {Atom{1.3, scalar(rng.gauss())}});
    double x1 = 0.2, x2 = 1.8;
    MatrixFn Fplus = [&](double x) { return mF.antiderivative(x, Side::Right); };
    MatrixFn Gminus = [&](double x) { return mG.antiderivative(x, Side::Left); };
    // split at the jump locations so every quadrature integrand is smooth
    std::vector<double> cuts{x1, 0.5, 1.3, x2};
    Matrix lhs = Matrix::Zero(1, 1);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      lhs += stieltjes_integrate(Fplus, mG, cuts[i], cuts[i + 1], Ends::ClosedOpen) +
             stieltjes_integrate(Gminus, mF, cuts[i], cuts[i + 1], Ends::ClosedOpen);
    auto FG_left = [&](double x) {
      return Matrix(mF.antiderivative(x, Side::Left) *
                    mG.antiderivative(x, Side::Left));
    };
    Matrix rhs = FG_left(x2) - FG_left(x1);
    CHECK(ent1_norm(Matrix(lhs - rhs)) < 1e-9);
  }
}

TEST_CASE("coefficient validation") {
  SUBCASE("degenerate-weight data passes") {
    RealInterval iv(0, 1);
    Matrix J(2, 2);
    J << 0, -1, 1, 0;
    Matrix wd(2, 2);
    wd << 1, 0, 0, 0;
    auto rep = validate_coefficients(MatrixMeasure::zero(iv, 2, 2),
                                     MatrixMeasure::constant_density(iv, wd), J);
    CHECK(rep.ok());
  }
  SUBCASE("scalar point interaction: det(2i +/- beta) never vanishes") {
    RealInterval iv(-1, 1);
    Matrix J(1, 1);
    J(0, 0) = Complex(0, 1);
    for (double beta : {-3.0, -1.0, 0.5, 2.0, 10.0}) {
      Matrix b(1, 1);
      b(0, 0) = beta;
      auto q = MatrixMeasure::point_mass(iv, 0.0, b);
      auto w = MatrixMeasure::point_mass(iv, 0.5, Matrix(Matrix::Identity(1, 1)));
      auto rep = validate_coefficients(q, w, J);
      CHECK(rep.ok());
    }
  }
  SUBCASE("J = identity is rejected as not skew-Hermitian") {
    RealInterval iv(0, 1);
    Matrix J = Matrix::Identity(2, 2);
    Matrix wd(2, 2);
    wd << 1, 0, 0, 0;
    auto rep = validate_coefficients(MatrixMeasure::zero(iv, 2, 2),
                                     MatrixMeasure::constant_density(iv, wd), J);
    CHECK_FALSE(rep.ok());
    bool named = false;
    for (const auto& c : rep.checks)
      if (c.name == "J skew-Hermitian" && !c.passed) named = true;
    CHECK(named);
  }
}

TEST_CASE("construction guards") {
  CHECK_THROWS_AS(RealInterval(1.0, 1.0), ValidationError);
  // atoms at interval endpoints are rejected
  CHECK_THROWS_AS(MatrixMeasure::point_mass(RealInterval(0, 1), 0.0, scalar(1.0)),
                  ValidationError);
  // overlapping pieces
  CHECK_THROWS_AS(MatrixMeasure(RealInterval(0, 2), 1, 1,
                                {Piece{0, 1.2, {scalar(1.0)}, nullptr},
                                 Piece{1.0, 2.0, {scalar(1.0)}, nullptr}},
                                {}),
                  ValidationError);
}
