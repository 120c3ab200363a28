#include <cmath>

#include "constants.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "oracle.hpp"

using namespace oec;

TEST_CASE("solved constant sits at the feasibility boundary") {
  const Constants& k = constants();
  CHECK(k.c >= 0.027);
  CHECK(k.c < 0.03);
  CHECK(oracle::feasibility(k.c) >= 0);
  CHECK(oracle::feasibility(k.c) <= 1e-9);
  CHECK(oracle::feasibility(k.c + 1e-9) < 0);
}

TEST_CASE("solved constant matches an independent grid scan") {
  CHECK(std::abs(constants().c - oracle::scan_c()) <= 1e-6);
}

TEST_CASE("derived fields are consistent") {
  const Constants& k = constants();
  CHECK(k.half_plus_c == 0.5 + k.c);
  CHECK(k.half_minus_c == 0.5 - k.c);
  CHECK(k.low_degree_threshold ==
        doctest::Approx((0.5 - k.c) / (0.5 + k.c)).epsilon(1e-15));
  CHECK(k.half_plus_c > 0.527);
  CHECK(k.low_degree_threshold > 0.89);
  CHECK(k.low_degree_threshold < 0.9);
}

TEST_CASE("acceptance probabilities derived from c stay in range") {
  CHECK(range_margin(constants().c) >= 0);
}

TEST_CASE("solver is deterministic and rejects infeasible brackets") {
  Constants a = solve_constants();
  Constants b = solve_constants();
  CHECK(a.c == b.c);
  CHECK(a.c == constants().c);
  CHECK_THROWS_AS(solve_constants(0.2, 0.3), Error);
}

TEST_CASE("margin is strictly decreasing over the bracket") {
  double prev = oracle::feasibility(0.027);
  for (double c = 0.0272; c < 0.03; c += 2e-4) {
    double cur = oracle::feasibility(c);
    CHECK(cur < prev);
    prev = cur;
  }
}
