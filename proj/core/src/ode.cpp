#include "specsys/ode.hpp"

#include <algorithm>
#include <cmath>

namespace specsys {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// dense output
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

double error_norm(const Matrix& err, const Matrix& y0, const Matrix& y1,
                  double atol, double rtol) {
  double acc = 0.0;
  const auto* e = err.data();
  const auto* a = y0.data();
  const auto* b = y1.data();
  const Eigen::Index n = err.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    double sk = atol + rtol * std::max(std::abs(a[i]), std::abs(b[i]));
    double q = std::abs(e[i]) / sk;
    acc += q * q;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

}  // namespace

Matrix OdeTrajectory::eval(double x) const {
  if (steps.empty()) return y_begin;
  const bool fwd = x_end >= x_begin;
  // binary search over traversal-ordered steps
  std::size_t lo = 0, hi = steps.size() - 1;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    double edge = steps[mid].x0 + steps[mid].h;
    if ((fwd && x <= edge) || (!fwd && x >= edge))
      hi = mid;
    else
      lo = mid + 1;
  }
  return steps[lo].eval(x);
}

OdeTrajectory integrate_ode(const std::function<Matrix(double, const Matrix&)>& rhs,
                            double x0, double x1, const Matrix& y0,
                            const IvpOptions& opt) {
  OdeTrajectory traj;
  traj.x_begin = x0;
  traj.x_end = x1;
  traj.y_begin = y0;
  if (x0 == x1) {
    traj.y_end = y0;
    return traj;
  }
  const double dir = (x1 > x0) ? 1.0 : -1.0;
  const double span = std::abs(x1 - x0);

  Matrix y = y0;
  Matrix k1 = rhs(x0, y);
  double x = x0;
  double h = dir * std::min(span, std::max(1e-8, 0.05 * span));

  int steps_taken = 0;
  while (dir * (x1 - x) > 0) {
    if (++steps_taken > opt.max_steps)
      throw NumericError("integrator exceeded the step budget");
    if (dir * (x + h - x1) > 0) h = x1 - x;

    Matrix k2 = rhs(x + c2 * h, y + h * (a21 * k1));
    Matrix k3 = rhs(x + c3 * h, y + h * (a31 * k1 + a32 * k2));
    Matrix k4 = rhs(x + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    Matrix k5 = rhs(x + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    Matrix k6 = rhs(x + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Matrix y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    Matrix k7 = rhs(x + h, y1);  // FSAL
    Matrix err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double en = error_norm(err, y, y1, opt.abs_tol, opt.rel_tol);
    if (en <= 1.0) {
      OdeStep st;
      st.x0 = x;
      st.h = h;
      st.r1 = y;
      st.r2 = y1 - y;
      st.r3 = h * k1 - st.r2;
      st.r4 = st.r2 - h * k7 - st.r3;
      st.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      traj.steps.push_back(std::move(st));
      traj.max_error_estimate = std::max(traj.max_error_estimate, en);
      x += h;
      y.swap(y1);
      k1.swap(k7);
    }
    double fac = (en > 0) ? 0.9 * std::pow(en, -0.2) : 5.0;
    h *= std::clamp(fac, 0.2, 5.0);
    if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(x)))
      throw NumericError("integrator step underflow");
  }
  traj.y_end = y;
  return traj;
}

}  // namespace specsys
