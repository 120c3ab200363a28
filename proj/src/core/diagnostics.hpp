#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coloring.hpp"
#include "graph.hpp"
#include "rounding.hpp"

namespace oec {

struct MarginalRow {
  VertexId u = kNil, v = kNil;
  double x = 0;
  Branch branch = Branch::low_degree;
  double g = 0, q1 = 0, j = 0, p = 0, deficiency = 0;
  double target = 0;    // (1/2 + c) * x
  double estimate = 0;
  double se = 0;        // sqrt(e(1-e)/T), 0 for the exact backend
  double z = 0;
};

struct MarginalReport {
  bool exact = false;
  int64_t trials = 0;
  double worst_abs_z = 0;
  double worst_abs_err = 0;
  double deficiency_total = 0;
  std::vector<MarginalRow> rows;
};

// Exact backend: per-edge match probabilities from the state distribution,
// deterministic, no trials. Ensemble backend: calibrates a schedule once,
// then replays T fresh trajectories with per-trial streams.
MarginalReport estimate_marginals(const Instance& inst, const BackendOptions& opts,
                                  int64_t trials, uint64_t seed);

// Free-status covariance at probe arrival v between earlier same-side
// neighbors u and w, with the matched-mass complement as estimator
// self-test, plus the split of matched mass by low/high fractional degree.
struct CovariancePair {
  VertexId v = kNil, u = kNil, w = kNil;
  double cov_free = 0;
  double se = 0;
  double bound = 0;           // 6c + 4 se
  double cov_low = 0;         // covariance of low-degree matched indicators
  double se_low = 0;
  double complement_gap = 0;  // |Cov(1-F,1-F') - Cov(F,F')| on the samples
};

struct HighMassRow {
  VertexId v = kNil;  // probe arrival; v == n probes the end of the stream
  VertexId u = kNil;
  double prob = 0;    // empirical Pr[u matched at high fractional degree before v]
  double se = 0;
  double bound = 0;   // 2c + 4 se
};

struct CovarianceReport {
  bool bipartite = false;  // pairs restricted to same-side neighbors
  int64_t trials = 0;
  double worst_cov_excess = 0;   // max over pairs of cov_free - bound
  double worst_low_excess = 0;   // max over pairs of cov_low - 4 se_low
  double worst_high_excess = 0;  // max over rows of prob - bound
  std::vector<CovariancePair> pairs;
  std::vector<HighMassRow> high_rows;
};

// Probe arrivals whose revealed neighbor set holds >= 2 same-side vertices.
std::vector<VertexId> covariance_probes(const Instance& inst);
// The probe with the most qualifying pairs, kNil if none.
VertexId worst_covariance_probe(const Instance& inst);

CovarianceReport estimate_covariances(const Instance& inst, const std::vector<VertexId>& probes,
                                      const BackendOptions& opts, int64_t trials, uint64_t seed);

// Random-bipartition crossing-degree tails and per-phase colored-count
// tails, each next to its closed-form Chernoff target.
struct ConcentrationReport {
  int64_t trials = 0;
  double epsilon = 0;
  double threshold = 0;        // (delta/2)(1+eps)
  int64_t samples = 0;         // (vertex, trial) pairs with d(v) > 0
  int64_t exceed = 0;          // crossing degree strictly above threshold
  double exceed_freq = 0;
  double chernoff_target = 0;  // exp(-(delta/2) eps^2 / 3)
  double mean_ratio = 0;       // mean of D_v / (d(v)/2)

  int64_t phase_trials = 0;
  double phase_floor = 0;        // L (1-eps)^2
  int64_t phase_samples = 0;     // (vertex, phase, trial) at near-maximal degree
  int64_t phase_low = 0;         // colored count at most the floor
  double phase_low_freq = 0;
  double phase_target = 0;       // exp(-L (1-eps) eps^2 / 2)
  double mean_phase_colored = 0;
};

ConcentrationReport concentration_report(const Instance& inst, const ReductionConfig& cfg,
                                         const BackendOptions& opts, int64_t trials,
                                         int64_t phase_trials, uint64_t seed);

std::string marginal_report_csv(const MarginalReport& rep);
std::string marginal_report_json(const MarginalReport& rep);
std::string covariance_report_csv(const CovarianceReport& rep);
std::string covariance_report_json(const CovarianceReport& rep);
std::string concentration_report_csv(const ConcentrationReport& rep);
std::string concentration_report_json(const ConcentrationReport& rep);

}  // namespace oec
