#pragma once

namespace oec {

// Derived once from the feasibility margins below. Every pick and acceptance
// probability used by the rounding engine is expressed through these values.
struct Constants {
  double c = 0;
  double half_plus_c = 0.5;           // per-edge match probability target, times x
  double half_minus_c = 0.5;
  double low_degree_threshold = 1.0;  // (1/2 - c) / (1/2 + c)
};

// Worst-case mass left over for the second pick, up to positive factors.
// The two-pick calibration is feasible only while this stays nonnegative;
// it is strictly decreasing over the bracket handed to solve_constants.
double calibration_margin(double c);

// Smallest slack among the derived acceptance probabilities. Nonnegative
// means everything the engine treats as a probability stays inside [0, 1].
double range_margin(double c);

// Largest c in [lo, hi) with calibration_margin(c) >= 0, by bisection.
// Throws when the bracket is infeasible or the result fails range_margin.
Constants solve_constants(double lo = 0.027, double hi = 0.03, double tol = 1e-13);

// solve_constants() with defaults, computed once.
const Constants& constants();

}  // namespace oec
