#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "constants.hpp"
#include "graph.hpp"
#include "rng.hpp"

namespace oec {

enum class Branch : uint8_t { low_degree, high_degree };

const char* to_string(Branch b);

// RNG stages within one arrival; every draw is keyed (arrival, stage).
enum PickStage : uint32_t {
  kStagePick1 = 0,
  kStageAccept1 = 1,
  kStagePick2 = 2,
  kStageAccept2 = 3,
};

// Calibration record for one edge (u, v), fixed at the arrival of v and
// shared by every replica.
struct EdgeCalib {
  VertexId u = kNil;
  double x = 0;
  double g = 1;           // 1 - consumed[u] just before this arrival
  bool u_low = false;     // match typing for u: its own-arrival mass was low
  bool v_low = false;     // match typing for v: its mass on partners before u was low
  double pick = 0;        // stage-one pick probability
  double accept = 0;      // stage-one acceptance
  double q1 = 0;          // closed-form first-pick match mass (high branch)
  double J = 0;           // Pr[u free and v unmatched after the first pick]
  double p = 0;           // second-pick acceptance
  double deficiency = 0;  // marginal shortfall introduced by clamping p
  double marginal = 0;    // exact marginal or replica match frequency
};

struct ArrivalPlan {
  VertexId v = kNil;
  Branch branch = Branch::low_degree;
  double x_sum = 0;
  double x_nil = 1;     // 1 - x_sum
  double pick_nil = 1;  // stage-one residual mass
  std::vector<EdgeCalib> edges;
};

using PickSchedule = std::vector<ArrivalPlan>;

struct ArrivalTranscript {
  VertexId v = kNil;
  Branch branch = Branch::low_degree;
  double x_nil = 1;
  VertexId first_pick = kNil;
  bool first_accept = false;
  bool rejected = true;  // v unmatched after the first pick
  VertexId second_pick = kNil;
  bool second_accept = false;
  VertexId matched_to = kNil;
};

// One trajectory of the rounding process. Draws are counter-keyed, so the
// state after arrival v depends only on the plans for arrivals <= v.
class Replica {
 public:
  Replica() = default;
  Replica(int32_t n, uint64_t seed, uint64_t stream)
      : rng_(seed, stream), matched_at_(n, kNil), matched_low_(n, 0) {}

  // Both stages return the matched edge's index in plan.edges, or -1.
  int stage_one(const ArrivalPlan& plan, ArrivalTranscript* t = nullptr);
  int stage_two(const ArrivalPlan& plan, ArrivalTranscript* t = nullptr);

  bool matched(VertexId u) const { return matched_at_[u] != kNil; }
  const std::vector<VertexId>& matched_at() const { return matched_at_; }
  const std::vector<uint8_t>& matched_low() const { return matched_low_; }
  const Matching& matching() const { return matching_; }

 private:
  void record_match(const ArrivalPlan& plan, const EdgeCalib& e);

  Philox rng_;
  std::vector<VertexId> matched_at_;  // arrival at which the vertex matched
  std::vector<uint8_t> matched_low_;  // typing: prefix mass before the earlier endpoint was low
  Matching matching_;
};

// Deterministic per-arrival calibration: branch selection, g values, pick
// and stage-one acceptance probabilities. J and p are the backend's job.
class ScheduleBuilder {
 public:
  ScheduleBuilder(int32_t n, const Constants& k)
      : k_(k), consumed_(n, 0.0), fdeg_(n, 0.0), arrival_x_(n, 0.0) {}

  ArrivalPlan plan(VertexId v, const std::vector<RevealedEdge>& edges) const;
  void commit(const ArrivalPlan& plan);

  double g(VertexId u) const { return 1.0 - consumed_[u]; }
  double frac_degree(VertexId u) const { return fdeg_[u]; }
  const Constants& consts() const { return k_; }

 private:
  Constants k_;
  std::vector<double> consumed_;
  std::vector<double> fdeg_;
  std::vector<double> arrival_x_;  // mass revealed at each vertex's own arrival
};

// Joint law of the matched-status vector, exact up to per-arrival
// renormalization. Bit u of a support mask is set when u is matched.
class ExactDistribution {
 public:
  ExactDistribution() { support_[0] = 1.0; }

  // Per-edge Pr[u free and v unmatched after the first pick], evaluated
  // before the arrival is applied. High-branch plans only.
  std::vector<double> joint_free_rejected(const ArrivalPlan& plan) const;

  // Applies the arrival and fills each edge's exact marginal.
  void advance(ArrivalPlan& plan);

  double free_probability(VertexId u) const;
  double total() const;
  const std::map<uint64_t, double>& support() const { return support_; }

 private:
  std::map<uint64_t, double> support_;
};

struct BackendOptions {
  enum class Kind : uint8_t { exact, ensemble };
  Kind kind = Kind::ensemble;
  int32_t replicas = 100000;
  int32_t exact_cap = 14;
};

const char* to_string(BackendOptions::Kind k);
bool backend_kind_from_string(const std::string& s, BackendOptions::Kind* out);

// Streams arrivals through the rounding process, calibrating p online with
// the chosen backend. Replica 0 is the reported run.
class OnlineRounder {
 public:
  OnlineRounder(int32_t n, const BackendOptions& opts, uint64_t seed,
                const Constants& k = constants());

  const ArrivalTranscript& arrive(VertexId v, const std::vector<RevealedEdge>& edges);

  const PickSchedule& schedule() const { return schedule_; }
  const std::vector<ArrivalTranscript>& transcripts() const { return transcripts_; }
  const Replica& primary() const { return replicas_[0]; }
  const Matching& matching() const { return replicas_[0].matching(); }
  double deficiency_total() const { return deficiency_total_; }
  const ExactDistribution* exact() const { return dist_ ? &*dist_ : nullptr; }
  const ScheduleBuilder& builder() const { return builder_; }
  int32_t n() const { return n_; }

 private:
  void calibrate_exact(ArrivalPlan& plan);
  void calibrate_and_run_ensemble(ArrivalPlan& plan, ArrivalTranscript& t);

  int32_t n_ = 0;
  BackendOptions opts_;
  ScheduleBuilder builder_;
  std::vector<Replica> replicas_;
  std::optional<ExactDistribution> dist_;
  PickSchedule schedule_;
  std::vector<ArrivalTranscript> transcripts_;
  double deficiency_total_ = 0;
  VertexId next_v_ = 0;
};

struct RoundResult {
  int32_t n = 0;
  Matching matching;
  PickSchedule schedule;
  std::vector<ArrivalTranscript> transcripts;
  double deficiency_total = 0;
};

RoundResult round_online(const Instance& inst, const BackendOptions& opts, uint64_t seed);

struct TrialTrace {
  Matching matching;
  std::vector<VertexId> matched_at;
  std::vector<uint8_t> matched_low;
};

// Replays a frozen schedule with fresh randomness; trials are mutually
// independent and independent of the replicas that calibrated the schedule.
TrialTrace run_trial(const PickSchedule& schedule, int32_t n, uint64_t seed, uint64_t trial);

std::string schedule_to_csv(const PickSchedule& schedule);

}  // namespace oec
