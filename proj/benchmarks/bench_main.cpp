#include "specsys/spectral.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace specsys;

constexpr double kPi = 3.14159265358979323846;

SpectralProblem classical_system() {
  RealInterval iv(0, kPi);
  Matrix J(2, 2);
  J << 0, -1, 1, 0;
  Matrix qd(2, 2);
  qd << 0, 0, 0, -1;
  Matrix wd(2, 2);
  wd << 1, 0, 0, 0;
  MatrixMeasure q(iv, 2, 2, {Piece{0, kPi, {qd}, nullptr}}, {});
  MatrixMeasure w(iv, 2, 2, {Piece{0, kPi, {wd}, nullptr}}, {});
  return SpectralProblem(iv, J, q, w, 1.5);
}

Matrix dirichlet_rows() {
  Matrix A(2, 4);
  A << 1, 0, 0, 0, 0, 0, 1, 0;
  return A;
}

void bm_fundamental_traversal(benchmark::State& state) {
  auto p = classical_system();
  double lam = 10.0;
  for (auto _ : state) {
    FundamentalMatrix U(p, Complex(lam, 0.0));
    benchmark::DoNotOptimize(U.endpoint_value(Endpoint::Upper));
    lam += 1e-6;  // defeat any caching across iterations
  }
}
BENCHMARK(bm_fundamental_traversal);

void bm_characteristic_matrix(benchmark::State& state) {
  auto p = classical_system();
  auto k = compute_kernel(p);
  auto bc = validate_boundary_conditions(p, k, dirichlet_rows());
  double lam = 3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_F(p, k, bc, Complex(lam, 0.0)));
    lam += 1e-6;
  }
}
BENCHMARK(bm_characteristic_matrix);

void bm_eigenvalue_window(benchmark::State& state) {
  auto p = classical_system();
  auto k = compute_kernel(p);
  auto bc = validate_boundary_conditions(p, k, dirichlet_rows());
  MFunction mf = m_function(p, k, bc);
  EigOptions opt;
  opt.initial_cells = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(eigenvalues(mf, 0.0, 26.0, opt));
  }
}
BENCHMARK(bm_eigenvalue_window)->Arg(200)->Arg(800);

void bm_transform(benchmark::State& state) {
  auto p = classical_system();
  auto k = compute_kernel(p);
  auto bc = validate_boundary_conditions(p, k, dirichlet_rows());
  MFunction mf = m_function(p, k, bc);
  SpectralMeasure sm = spectral_measure(mf, 0.0, 26.0);
  VectorFn f = [](double x) {
    Vector v(2);
    v << std::sin(2 * x), 2 * std::cos(2 * x);
    return v;
  };
  for (auto _ : state) {
    benchmark::DoNotOptimize(fourier(p, sm, f));
  }
}
BENCHMARK(bm_transform);

}  // namespace

BENCHMARK_MAIN();
