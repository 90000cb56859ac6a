#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>

namespace velab {

namespace detail {

inline double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double fa,
                                   double b, double fb, double m, double fm, double whole,
                                   double tol, std::size_t& budget) {
  if (budget == 0) throw std::runtime_error("adaptive_simpson: interval budget exhausted");
  --budget;
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(a, fa, m, fm, flm);
  double right = simpson(m, fm, b, fb, frm);
  double delta = left + right - whole;
  if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, budget) +
         adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, budget);
}

}  // namespace detail

// Adaptive Simpson with Richardson correction, absolute tolerance. The
// interval budget turns pathological integrands into an error instead of an
// unbounded recursion.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double abs_tol = 1e-12, std::size_t max_intervals = 1000000) {
  if (!(a < b)) throw std::invalid_argument("adaptive_simpson: requires a < b");
  if (!(abs_tol > 0.0)) throw std::invalid_argument("adaptive_simpson: requires abs_tol > 0");
  double fa = f(a), fb = f(b);
  double m = 0.5 * (a + b), fm = f(m);
  double whole = detail::simpson(a, fa, b, fb, fm);
  std::size_t budget = max_intervals;
  return detail::adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, abs_tol, budget);
}

}  // namespace velab
