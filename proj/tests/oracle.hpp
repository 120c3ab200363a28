#pragma once

// Expected values for the tests, computed along paths the library does not
// share: the calibration constant by direct grid scan of the closed-form
// margin, and per-edge match probabilities by enumerating whole trajectories
// of a frozen schedule over the matched-set distribution.

#include <cstdint>
#include <map>
#include <vector>

#include "rounding.hpp"

namespace oracle {

inline double feasibility(double c) {
  double h = 0.5 - c;
  return h * (1 - 4 * c) * (h - 6 * c / h) - 2 * c;
}

// Largest feasible c in [0.027, 0.03): coarse scan, then a fine scan over
// the last coarse cell.
inline double scan_c() {
  double coarse = 1e-7;
  double last = 0.027;
  for (double c = 0.027; c < 0.03; c += coarse) {
    if (feasibility(c) >= 0) last = c;
  }
  double best = last;
  for (double c = last; c < last + coarse; c += 1e-13) {
    if (feasibility(c) >= 0) best = c;
  }
  return best;
}

// Exact per-edge match probabilities induced by a calibrated schedule.
// Walks the distribution over matched-set bitmasks one arrival at a time,
// splitting each state over the stage-one pick, its acceptance, and (on the
// high branch) the second pick. Usable up to n = 63.
struct Marginals {
  std::vector<std::vector<double>> rows;  // [arrival][edge index]
};

inline Marginals enumerate_marginals(const oec::PickSchedule& schedule) {
  Marginals out;
  out.rows.reserve(schedule.size());
  std::map<uint64_t, double> states;
  states[0] = 1.0;
  for (const oec::ArrivalPlan& plan : schedule) {
    std::vector<double> marg(plan.edges.size(), 0.0);
    std::map<uint64_t, double> next;
    for (const auto& [s, q] : states) {
      double miss1 = plan.pick_nil;
      for (size_t i = 0; i < plan.edges.size(); ++i) {
        const oec::EdgeCalib& e = plan.edges[i];
        bool u_free = !(s >> e.u & 1);
        if (u_free) {
          double hit = q * e.pick * e.accept;
          if (hit > 0) {
            next[s | 1ull << e.u | 1ull << plan.v] += hit;
            marg[i] += hit;
          }
          miss1 += e.pick * (1 - e.accept);
        } else {
          miss1 += e.pick;
        }
      }
      double rest = q * miss1;
      if (rest <= 0) continue;
      if (plan.branch == oec::Branch::high_degree && !plan.edges.empty()) {
        double miss2 = plan.x_nil;
        for (size_t i = 0; i < plan.edges.size(); ++i) {
          const oec::EdgeCalib& e = plan.edges[i];
          bool u_free = !(s >> e.u & 1);
          if (u_free) {
            double hit = rest * e.x * e.p;
            if (hit > 0) {
              next[s | 1ull << e.u | 1ull << plan.v] += hit;
              marg[i] += hit;
            }
            miss2 += e.x * (1 - e.p);
          } else {
            miss2 += e.x;
          }
        }
        rest *= miss2;
      }
      if (rest > 0) next[s] += rest;
    }
    states = std::move(next);
    out.rows.push_back(std::move(marg));
  }
  return out;
}

}  // namespace oracle
