#include "constants.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace oec {

double calibration_margin(double c) {
  double h = 0.5 - c;
  return h * (1.0 - 4.0 * c) * (h - 6.0 * c / h) - 2.0 * c;
}

double range_margin(double c) {
  double h = 0.5 - c;
  return std::min({h, 1.0 - 4.0 * c, 1.0 - 6.0 * c / (h * h)});
}

Constants solve_constants(double lo, double hi, double tol) {
  if (!(lo < hi) || !(tol > 0))
    throw bad_input_error("solve_constants: bad bracket or tolerance");
  if (calibration_margin(lo) < 0)
    throw invariant_error("solve_constants: no feasible value at the lower bracket");
  double a = lo, b = hi;
  while (b - a > tol) {
    double m = 0.5 * (a + b);
    (calibration_margin(m) >= 0 ? a : b) = m;
  }
  if (range_margin(a) < 0)
    throw invariant_error("solve_constants: acceptance probabilities leave [0, 1]");
  Constants k;
  k.c = a;
  k.half_plus_c = 0.5 + a;
  k.half_minus_c = 0.5 - a;
  k.low_degree_threshold = k.half_minus_c / k.half_plus_c;
  return k;
}

const Constants& constants() {
  static const Constants k = solve_constants();
  return k;
}

}  // namespace oec
