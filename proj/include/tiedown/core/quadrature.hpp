#pragma once

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace tiedown {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

/// Bisection over Boost's 31-point Gauss-Kronrod rule until the summed error
/// estimate is below an absolute target.
template <class F>
QuadResult integrate_abs(F&& f, double a, double b, double abs_tol, unsigned max_depth = 16) {
  using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
  double err = 0.0;
  const double v = Rule::integrate(f, a, b, 0, 0.0, &err);
  err *= 0.5 * (b - a);  // the rule reports its error on [−1,1]
  if (err <= abs_tol || max_depth == 0) return {v, err};
  const double mid = 0.5 * (a + b);
  const QuadResult left = integrate_abs(f, a, mid, 0.5 * abs_tol, max_depth - 1);
  const QuadResult right = integrate_abs(f, mid, b, 0.5 * abs_tol, max_depth - 1);
  return {left.value + right.value, left.error + right.error};
}

}  // namespace tiedown
