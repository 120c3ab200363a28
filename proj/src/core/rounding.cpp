#include "rounding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "errors.hpp"
#include "jsonl.hpp"

namespace oec {

namespace {

constexpr double kMassTol = 1e-9;

struct PCalib {
  double p = 0;
  double deficiency = 0;
};

// p = ((1/2+c)x - q1) / (xJ), clamped to [0,1]. A J below floor_j carries no
// usable signal; the acceptance is then forced open and the reachable mass
// shortfall is charged to the deficiency ledger.
PCalib calibrate_p(double target, double q1, double x, double J, double floor_j) {
  double num = target - q1;
  if (num <= 1e-12 * target) return {0.0, 0.0};
  if (J < floor_j) return {1.0, std::max(0.0, num - x * J)};
  double raw = num / (x * J);
  if (raw > 1.0) return {1.0, raw - 1.0 > 1e-9 ? num - x * J : 0.0};
  return {raw, 0.0};
}

}  // namespace

const char* to_string(Branch b) { return b == Branch::low_degree ? "low" : "high"; }

const char* to_string(BackendOptions::Kind k) {
  return k == BackendOptions::Kind::exact ? "exact" : "ensemble";
}

bool backend_kind_from_string(const std::string& s, BackendOptions::Kind* out) {
  if (s == "exact") *out = BackendOptions::Kind::exact;
  else if (s == "ensemble") *out = BackendOptions::Kind::ensemble;
  else return false;
  return true;
}

int Replica::stage_one(const ArrivalPlan& plan, ArrivalTranscript* t) {
  if (t) {
    *t = {};
    t->v = plan.v;
    t->branch = plan.branch;
    t->x_nil = plan.x_nil;
  }
  if (plan.edges.empty()) return -1;
  double u01 = rng_.uniform(plan.v, kStagePick1);
  double cum = 0;
  int idx = -1;
  for (size_t i = 0; i < plan.edges.size(); ++i) {
    cum += plan.edges[i].pick;
    if (u01 < cum) {
      idx = static_cast<int>(i);
      break;
    }
  }
  if (idx < 0) return -1;
  const EdgeCalib& e = plan.edges[idx];
  if (t) t->first_pick = e.u;
  bool coin = rng_.uniform(plan.v, kStageAccept1) < e.accept;
  if (t) t->first_accept = coin;
  if (!coin || matched(e.u)) return -1;
  record_match(plan, e);
  if (t) {
    t->rejected = false;
    t->matched_to = e.u;
  }
  return idx;
}

int Replica::stage_two(const ArrivalPlan& plan, ArrivalTranscript* t) {
  if (plan.edges.empty() || plan.branch != Branch::high_degree || matched(plan.v)) return -1;
  double u01 = rng_.uniform(plan.v, kStagePick2);
  double cum = 0;
  int idx = -1;
  for (size_t i = 0; i < plan.edges.size(); ++i) {
    cum += plan.edges[i].x;
    if (u01 < cum) {
      idx = static_cast<int>(i);
      break;
    }
  }
  if (idx < 0) return -1;
  const EdgeCalib& e = plan.edges[idx];
  if (t) t->second_pick = e.u;
  bool coin = rng_.uniform(plan.v, kStageAccept2) < e.p;
  if (t) t->second_accept = coin;
  if (!coin || matched(e.u)) return -1;
  record_match(plan, e);
  if (t) t->matched_to = e.u;
  return idx;
}

void Replica::record_match(const ArrivalPlan& plan, const EdgeCalib& e) {
  matched_at_[e.u] = plan.v;
  matched_at_[plan.v] = plan.v;
  matched_low_[e.u] = e.u_low;
  matched_low_[plan.v] = e.v_low;
  matching_.edges.push_back({e.u, plan.v});
}

ArrivalPlan ScheduleBuilder::plan(VertexId v, const std::vector<RevealedEdge>& edges) const {
  if (v < 0 || v >= static_cast<VertexId>(consumed_.size()))
    throw invariant_error("arrival " + std::to_string(v) + " outside the declared vertex range");
  ArrivalPlan plan;
  plan.v = v;
  for (const auto& re : edges) plan.x_sum += re.x;
  plan.branch =
      plan.x_sum <= k_.low_degree_threshold ? Branch::low_degree : Branch::high_degree;
  plan.x_nil = std::max(0.0, 1.0 - plan.x_sum);

  double pick_mass = 0;
  plan.edges.reserve(edges.size());
  for (const auto& re : edges) {
    if (re.to < 0 || re.to >= v)
      throw invariant_error("edge endpoint " + std::to_string(re.to) +
                            " does not precede arrival " + std::to_string(v));
    EdgeCalib e;
    e.u = re.to;
    e.x = re.x;
    e.g = 1.0 - consumed_[re.to];
    e.u_low = arrival_x_[re.to] <= k_.low_degree_threshold;
    if (plan.branch == Branch::low_degree) {
      e.pick = re.x * k_.half_plus_c / k_.half_minus_c;
      e.accept = std::min(1.0, k_.half_minus_c / e.g);
    } else {
      e.pick = re.x;
      e.accept = std::min(1.0, k_.half_plus_c / e.g);
      e.q1 = re.x * std::min(e.g, k_.half_plus_c);
    }
    pick_mass += e.pick;
    plan.edges.push_back(e);
  }
  if (pick_mass > 1.0 + kMassTol)
    throw invariant_error("pick mass " + fmt_double(pick_mass) + " exceeds 1 at arrival " +
                          std::to_string(v));
  plan.pick_nil = std::max(0.0, 1.0 - pick_mass);

  // Typing for the arriving endpoint: a match through edge (u, v) is low
  // when v's mass on partners that arrived before u is still low.
  std::vector<size_t> order(plan.edges.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return plan.edges[a].u < plan.edges[b].u; });
  double prefix = 0;
  for (size_t i : order) {
    plan.edges[i].v_low = prefix <= k_.low_degree_threshold;
    prefix += plan.edges[i].x;
  }
  return plan;
}

void ScheduleBuilder::commit(const ArrivalPlan& plan) {
  for (const auto& e : plan.edges) {
    double bite = k_.half_plus_c * e.x;
    consumed_[e.u] += bite;
    consumed_[plan.v] += bite;
    fdeg_[e.u] += e.x;
    fdeg_[plan.v] += e.x;
  }
  arrival_x_[plan.v] = plan.x_sum;
}

std::vector<double> ExactDistribution::joint_free_rejected(const ArrivalPlan& plan) const {
  std::vector<double> j(plan.edges.size(), 0.0);
  for (const auto& [mask, prob] : support_) {
    double first_mass = 0;
    for (const auto& e : plan.edges)
      if (!(mask >> e.u & 1)) first_mass += e.pick * e.accept;
    double rejected_mass = prob * (1.0 - first_mass);
    for (size_t i = 0; i < plan.edges.size(); ++i)
      if (!(mask >> plan.edges[i].u & 1)) j[i] += rejected_mass;
  }
  return j;
}

void ExactDistribution::advance(ArrivalPlan& plan) {
  std::map<uint64_t, double> next;
  std::vector<double> marginal(plan.edges.size(), 0.0);
  const uint64_t vbit = 1ull << plan.v;
  const bool high = plan.branch == Branch::high_degree;

  for (const auto& [mask, prob] : support_) {
    double r = 1.0;
    if (high) {
      double first_mass = 0;
      for (const auto& e : plan.edges)
        if (!(mask >> e.u & 1)) first_mass += e.pick * e.accept;
      r = 1.0 - first_mass;
    }
    double stay = 1.0;
    for (size_t i = 0; i < plan.edges.size(); ++i) {
      const EdgeCalib& e = plan.edges[i];
      if (mask >> e.u & 1) continue;
      double m = e.pick * e.accept + (high ? r * e.x * e.p : 0.0);
      marginal[i] += prob * m;
      next[mask | (1ull << e.u) | vbit] += prob * m;
      stay -= m;
    }
    if (stay > 0) next[mask] += prob * stay;
  }

  double sum = 0;
  for (const auto& [mask, prob] : next) sum += prob;
  if (std::abs(sum - 1.0) > 1e-9)
    throw invariant_error("joint distribution drifted at arrival " + std::to_string(plan.v));
  for (auto& [mask, prob] : next) prob /= sum;
  support_ = std::move(next);

  for (size_t i = 0; i < plan.edges.size(); ++i) plan.edges[i].marginal = marginal[i];
}

double ExactDistribution::free_probability(VertexId u) const {
  double f = 0;
  for (const auto& [mask, prob] : support_)
    if (!(mask >> u & 1)) f += prob;
  return f;
}

double ExactDistribution::total() const {
  double sum = 0;
  for (const auto& [mask, prob] : support_) sum += prob;
  return sum;
}

OnlineRounder::OnlineRounder(int32_t n, const BackendOptions& opts, uint64_t seed,
                             const Constants& k)
    : n_(n), opts_(opts), builder_(n, k) {
  if (n < 0) throw bad_input_error("negative vertex count");
  uint64_t stream_seed = substream(seed, {kStreamRound});
  if (opts.kind == BackendOptions::Kind::exact) {
    int32_t cap = std::min<int32_t>(opts.exact_cap, 62);
    if (n > cap)
      throw unsupported_error("exact backend supports at most " + std::to_string(cap) +
                              " vertices, got " + std::to_string(n));
    dist_.emplace();
    replicas_.emplace_back(n, stream_seed, 0);
  } else {
    if (opts.replicas < 1) throw bad_input_error("ensemble needs at least one replica");
    replicas_.reserve(opts.replicas);
    for (int32_t r = 0; r < opts.replicas; ++r) replicas_.emplace_back(n, stream_seed, r);
  }
}

void OnlineRounder::calibrate_exact(ArrivalPlan& plan) {
  if (plan.branch == Branch::high_degree) {
    std::vector<double> J = dist_->joint_free_rejected(plan);
    for (size_t i = 0; i < plan.edges.size(); ++i) {
      EdgeCalib& e = plan.edges[i];
      e.J = J[i];
      PCalib cal = calibrate_p(builder_.consts().half_plus_c * e.x, e.q1, e.x, e.J, 1e-15);
      e.p = cal.p;
      e.deficiency = cal.deficiency;
    }
  }
  dist_->advance(plan);
}

void OnlineRounder::calibrate_and_run_ensemble(ArrivalPlan& plan, ArrivalTranscript& t) {
  const int32_t K = opts_.replicas;
  std::vector<int64_t> match_count(plan.edges.size(), 0);

  for (int32_t r = 0; r < K; ++r) {
    int idx = replicas_[r].stage_one(plan, r == 0 ? &t : nullptr);
    if (idx >= 0) ++match_count[idx];
  }

  if (plan.branch == Branch::high_degree) {
    std::vector<int64_t> free_pair(plan.edges.size(), 0);
    for (int32_t r = 0; r < K; ++r) {
      const Replica& rep = replicas_[r];
      if (rep.matched(plan.v)) continue;
      for (size_t i = 0; i < plan.edges.size(); ++i)
        if (!rep.matched(plan.edges[i].u)) ++free_pair[i];
    }
    double tau = std::max(1e-6, 10.0 / K);
    for (size_t i = 0; i < plan.edges.size(); ++i) {
      EdgeCalib& e = plan.edges[i];
      e.J = static_cast<double>(free_pair[i]) / K;
      PCalib cal = calibrate_p(builder_.consts().half_plus_c * e.x, e.q1, e.x, e.J, tau);
      e.p = cal.p;
      e.deficiency = cal.deficiency;
    }
    for (int32_t r = 0; r < K; ++r) {
      int idx = replicas_[r].stage_two(plan, r == 0 ? &t : nullptr);
      if (idx >= 0) ++match_count[idx];
    }
  }

  for (size_t i = 0; i < plan.edges.size(); ++i)
    plan.edges[i].marginal = static_cast<double>(match_count[i]) / K;
}

const ArrivalTranscript& OnlineRounder::arrive(VertexId v,
                                               const std::vector<RevealedEdge>& edges) {
  if (v != next_v_)
    throw invariant_error("arrivals must be fed in order; expected " + std::to_string(next_v_) +
                          ", got " + std::to_string(v));
  ++next_v_;

  ArrivalPlan plan = builder_.plan(v, edges);
  ArrivalTranscript t;
  if (plan.edges.empty()) {
    t.v = v;
    t.branch = plan.branch;
    t.x_nil = plan.x_nil;
    builder_.commit(plan);
    schedule_.push_back(std::move(plan));
    transcripts_.push_back(t);
    return transcripts_.back();
  }
  if (opts_.kind == BackendOptions::Kind::exact) {
    calibrate_exact(plan);
    replicas_[0].stage_one(plan, &t);
    replicas_[0].stage_two(plan, &t);
  } else {
    calibrate_and_run_ensemble(plan, t);
  }

  for (const auto& e : plan.edges) deficiency_total_ += e.deficiency;
  builder_.commit(plan);
  schedule_.push_back(std::move(plan));
  transcripts_.push_back(t);
  return transcripts_.back();
}

RoundResult round_online(const Instance& inst, const BackendOptions& opts, uint64_t seed) {
  require_valid(inst);
  OnlineRounder rounder(inst.n, opts, seed);
  for (const auto& a : inst.arrivals) rounder.arrive(a.v, a.edges);
  RoundResult res;
  res.n = inst.n;
  res.matching = rounder.matching();
  res.schedule = rounder.schedule();
  res.transcripts = rounder.transcripts();
  res.deficiency_total = rounder.deficiency_total();
  return res;
}

TrialTrace run_trial(const PickSchedule& schedule, int32_t n, uint64_t seed, uint64_t trial) {
  Replica rep(n, substream(seed, {kStreamTrial}), trial);
  for (const auto& plan : schedule) {
    rep.stage_one(plan);
    rep.stage_two(plan);
  }
  return {rep.matching(), rep.matched_at(), rep.matched_low()};
}

std::string schedule_to_csv(const PickSchedule& schedule) {
  std::ostringstream out;
  out << "u,v,x,branch,g,q1,J,p,deficiency,marginal\n";
  for (const auto& plan : schedule)
    for (const auto& e : plan.edges)
      out << e.u << ',' << plan.v << ',' << fmt_double(e.x) << ',' << to_string(plan.branch)
          << ',' << fmt_double(e.g) << ',' << fmt_double(e.q1) << ',' << fmt_double(e.J) << ','
          << fmt_double(e.p) << ',' << fmt_double(e.deficiency) << ',' << fmt_double(e.marginal)
          << '\n';
  return out.str();
}

}  // namespace oec
