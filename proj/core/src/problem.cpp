#include "specsys/problem.hpp"

#include <cmath>

namespace specsys {

SpectralProblem::SpectralProblem(RealInterval interval, Matrix J, MatrixMeasure q,
                                 MatrixMeasure w, double x0)
    : interval_(interval), J_(std::move(J)), q_(std::move(q)), w_(std::move(w)),
      x0_(x0), n_(static_cast<int>(J_.rows())) {
  report_ = validate_coefficients(q_, w_, J_);
  bool x0_in_range = interval_.contains(x0_) ||
                     (x0_ == interval_.a && regular_at(Endpoint::Lower)) ||
                     (x0_ == interval_.b && regular_at(Endpoint::Upper));
  report_.add("x0 inside the interval", x0_in_range);
  bool x0_cont = true;
  if (std::isfinite(x0_) && interval_.contains(x0_))
    x0_cont = !q_.has_atom_at(x0_) && !w_.has_atom_at(x0_);
  report_.add("x0 is a continuity point of Q and W", x0_cont);
  report_.add("w not identically zero", !w_.is_zero(),
              w_.is_zero() ? "L2(w) would be trivial" : "");
  if (!report_.ok())
    throw ValidationError("problem does not satisfy the coefficient hypotheses:\n" +
                          report_.summary());
  J_inv_ = J_.inverse();
}

std::pair<double, double> SpectralProblem::effective_range() const {
  auto [ql, qh] = q_.support_hull();
  auto [wl, wh] = w_.support_hull();
  double lo = std::min({ql, wl, x0_});
  double hi = std::max({qh, wh, x0_});
  lo = std::max(lo, interval_.a);
  hi = std::min(hi, interval_.b);
  if (std::isfinite(interval_.a)) lo = interval_.a;
  if (std::isfinite(interval_.b)) hi = interval_.b;
  return {lo, hi};
}

std::vector<double> SpectralProblem::coefficient_breakpoints(double lo,
                                                              double hi) const {
  std::vector<double> pts = q_.breakpoints(lo, hi);
  auto wb = w_.breakpoints(lo, hi);
  pts.insert(pts.end(), wb.begin(), wb.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

SpectralProblem SpectralProblem::with_anchor(double new_x0) const {
  return SpectralProblem(interval_, J_, q_, w_, new_x0);
}

}  // namespace specsys
