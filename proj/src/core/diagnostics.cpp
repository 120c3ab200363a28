#include "diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "constants.hpp"
#include "errors.hpp"
#include "json.hpp"
#include "jsonl.hpp"
#include "rng.hpp"

namespace oec {

namespace {

constexpr double kSeFloor = 1e-12;

const char* branch_name(Branch b) {
  return b == Branch::low_degree ? "low" : "high";
}

// Side labels for same-side pair selection: given labels win, else a BFS
// 2-coloring, else empty (every pair of earlier neighbors qualifies).
std::vector<int8_t> resolve_sides(const Instance& inst) {
  if (inst.has_sides()) return inst.sides;
  return bipartite_labels(inst);
}

bool same_side(const std::vector<int8_t>& sides, VertexId u, VertexId w) {
  if (sides.empty()) return true;
  return sides[u] != 0 && sides[u] == sides[w];
}

int64_t pair_count_at(const Instance& inst, const std::vector<int8_t>& sides, VertexId v) {
  const auto& edges = inst.arrivals[v].edges;
  int64_t pairs = 0;
  for (size_t i = 0; i < edges.size(); ++i)
    for (size_t j = i + 1; j < edges.size(); ++j)
      if (same_side(sides, edges[i].to, edges[j].to)) ++pairs;
  return pairs;
}

}  // namespace

MarginalReport estimate_marginals(const Instance& inst, const BackendOptions& opts,
                                  int64_t trials, uint64_t seed) {
  const bool exact = opts.kind == BackendOptions::Kind::exact;
  if (trials < 0) throw bad_input_error("trials must be nonnegative");
  RoundResult rr = round_online(inst, opts, seed);
  const Constants& k = constants();

  MarginalReport rep;
  rep.exact = exact;
  rep.trials = trials;
  rep.deficiency_total = rr.deficiency_total;

  for (const ArrivalPlan& plan : rr.schedule) {
    for (const EdgeCalib& e : plan.edges) {
      MarginalRow row;
      row.u = e.u;
      row.v = plan.v;
      row.x = e.x;
      row.branch = plan.branch;
      row.g = e.g;
      row.q1 = e.q1;
      row.j = e.J;
      row.p = e.p;
      row.deficiency = e.deficiency;
      row.target = k.half_plus_c * e.x;
      rep.rows.push_back(row);
    }
  }

  if (trials == 0) {
    // No replays: report the backend's own marginals. Exact marginals carry
    // no sampling error; ensemble ones get the replica-count binomial SE.
    size_t i = 0;
    for (const ArrivalPlan& plan : rr.schedule)
      for (const EdgeCalib& e : plan.edges) {
        MarginalRow& row = rep.rows[i++];
        row.estimate = e.marginal;
        if (!exact)
          row.se = std::sqrt(e.marginal * (1.0 - e.marginal) / opts.replicas);
      }
  } else {
    std::unordered_map<uint64_t, size_t> index;
    index.reserve(rep.rows.size());
    for (size_t i = 0; i < rep.rows.size(); ++i)
      index.emplace(static_cast<uint64_t>(rep.rows[i].u) << 32 |
                        static_cast<uint32_t>(rep.rows[i].v),
                    i);
    std::vector<int64_t> hits(rep.rows.size(), 0);
    for (int64_t t = 0; t < trials; ++t) {
      TrialTrace trace = run_trial(rr.schedule, inst.n, seed, static_cast<uint64_t>(t));
      for (const Edge& e : trace.matching.edges)
        ++hits[index.at(static_cast<uint64_t>(e.u) << 32 | static_cast<uint32_t>(e.v))];
    }
    for (size_t i = 0; i < rep.rows.size(); ++i) {
      MarginalRow& row = rep.rows[i];
      row.estimate = static_cast<double>(hits[i]) / trials;
      row.se = std::sqrt(row.estimate * (1.0 - row.estimate) / trials);
    }
  }

  for (MarginalRow& row : rep.rows) {
    row.z = (row.estimate - row.target) / std::max(row.se, kSeFloor);
    rep.worst_abs_z = std::max(rep.worst_abs_z, std::abs(row.z));
    rep.worst_abs_err = std::max(rep.worst_abs_err, std::abs(row.estimate - row.target));
  }
  return rep;
}

std::vector<VertexId> covariance_probes(const Instance& inst) {
  require_valid(inst);
  std::vector<int8_t> sides = resolve_sides(inst);
  std::vector<VertexId> probes;
  for (VertexId v = 0; v < inst.n; ++v)
    if (pair_count_at(inst, sides, v) > 0) probes.push_back(v);
  return probes;
}

VertexId worst_covariance_probe(const Instance& inst) {
  require_valid(inst);
  std::vector<int8_t> sides = resolve_sides(inst);
  VertexId best = kNil;
  int64_t best_pairs = 0;
  for (VertexId v = 0; v < inst.n; ++v) {
    int64_t pairs = pair_count_at(inst, sides, v);
    if (pairs > best_pairs) {
      best_pairs = pairs;
      best = v;
    }
  }
  return best;
}

CovarianceReport estimate_covariances(const Instance& inst, const std::vector<VertexId>& probes,
                                      const BackendOptions& opts, int64_t trials, uint64_t seed) {
  if (trials <= 0) throw bad_input_error("trials must be positive");
  RoundResult rr = round_online(inst, opts, seed);
  std::vector<int8_t> sides = resolve_sides(inst);
  const double c = constants().c;

  struct PairAcc {
    VertexId v, u, w;
    int64_t f11 = 0, fu = 0, fw = 0;
    int64_t l11 = 0, lu = 0, lw = 0;
  };
  struct RowAcc {
    VertexId v, u;
    int64_t hits = 0;
  };

  std::vector<PairAcc> pairs;
  std::vector<RowAcc> rows;
  for (VertexId v : probes) {
    if (v < 0 || v >= inst.n) throw bad_input_error("probe vertex out of range");
    const auto& edges = inst.arrivals[v].edges;
    for (size_t i = 0; i < edges.size(); ++i) {
      rows.push_back({v, edges[i].to});
      for (size_t j = i + 1; j < edges.size(); ++j)
        if (same_side(sides, edges[i].to, edges[j].to))
          pairs.push_back({v, edges[i].to, edges[j].to});
    }
  }
  for (VertexId u = 0; u < inst.n; ++u) rows.push_back({inst.n, u});

  for (int64_t t = 0; t < trials; ++t) {
    TrialTrace trace = run_trial(rr.schedule, inst.n, seed, static_cast<uint64_t>(t));
    for (PairAcc& p : pairs) {
      bool mu = trace.matched_at[p.u] != kNil && trace.matched_at[p.u] < p.v;
      bool mw = trace.matched_at[p.w] != kNil && trace.matched_at[p.w] < p.v;
      p.fu += !mu;
      p.fw += !mw;
      p.f11 += !mu && !mw;
      bool lu = mu && trace.matched_low[p.u];
      bool lw = mw && trace.matched_low[p.w];
      p.lu += lu;
      p.lw += lw;
      p.l11 += lu && lw;
    }
    for (RowAcc& r : rows)
      r.hits += trace.matched_at[r.u] != kNil && trace.matched_at[r.u] < r.v &&
                !trace.matched_low[r.u];
  }

  CovarianceReport rep;
  rep.bipartite = !sides.empty();
  rep.trials = trials;
  const double T = static_cast<double>(trials);

  auto cell_cov = [T](int64_t n11, int64_t nu, int64_t nw, double* se) {
    double pu = nu / T, pw = nw / T, p11 = n11 / T;
    double cov = p11 - pu * pw;
    double p10 = pu - p11, p01 = pw - p11, p00 = 1.0 - pu - pw + p11;
    auto wt = [&](double a, double b) { return (a - pu) * (a - pu) * (b - pw) * (b - pw); };
    double second = wt(1, 1) * p11 + wt(1, 0) * p10 + wt(0, 1) * p01 + wt(0, 0) * p00;
    *se = std::sqrt(std::max(second - cov * cov, 0.0) / T);
    return cov;
  };

  rep.pairs.reserve(pairs.size());
  for (const PairAcc& p : pairs) {
    CovariancePair out;
    out.v = p.v;
    out.u = p.u;
    out.w = p.w;
    out.cov_free = cell_cov(p.f11, p.fu, p.fw, &out.se);
    out.bound = 6 * c + 4 * out.se;
    out.cov_low = cell_cov(p.l11, p.lu, p.lw, &out.se_low);
    // matched indicators complement the free ones; both-matched mass is the
    // free table's (0,0) cell
    double mu = 1.0 - p.fu / T, mw = 1.0 - p.fw / T;
    double m11 = 1.0 - p.fu / T - p.fw / T + p.f11 / T;
    out.complement_gap = std::abs((m11 - mu * mw) - out.cov_free);
    rep.worst_cov_excess = std::max(rep.worst_cov_excess, out.cov_free - out.bound);
    rep.worst_low_excess = std::max(rep.worst_low_excess, out.cov_low - 4 * out.se_low);
    rep.pairs.push_back(out);
  }

  rep.high_rows.reserve(rows.size());
  for (const RowAcc& r : rows) {
    HighMassRow out;
    out.v = r.v;
    out.u = r.u;
    out.prob = r.hits / T;
    out.se = std::sqrt(out.prob * (1.0 - out.prob) / T);
    out.bound = 2 * c + 4 * out.se;
    rep.worst_high_excess = std::max(rep.worst_high_excess, out.prob - out.bound);
    rep.high_rows.push_back(out);
  }
  return rep;
}

ConcentrationReport concentration_report(const Instance& inst, const ReductionConfig& cfg,
                                         const BackendOptions& opts, int64_t trials,
                                         int64_t phase_trials, uint64_t seed) {
  require_valid(inst);
  ConcentrationReport rep;
  rep.epsilon = cfg.epsilon;
  rep.threshold = inst.delta / 2.0 * (1.0 + cfg.epsilon);
  rep.chernoff_target = std::exp(-(inst.delta / 2.0) * cfg.epsilon * cfg.epsilon / 3.0);
  rep.phase_floor = cfg.L * (1.0 - cfg.epsilon) * (1.0 - cfg.epsilon);
  rep.phase_target = std::exp(-cfg.L * (1.0 - cfg.epsilon) * cfg.epsilon * cfg.epsilon / 2.0);
  if (inst.edge_count() == 0) return rep;

  rep.trials = trials;
  std::vector<int32_t> deg = inst.degrees();
  std::vector<int8_t> lab(inst.n);
  std::vector<int32_t> cross(inst.n);
  double ratio_sum = 0;
  for (int64_t t = 0; t < trials; ++t) {
    uint64_t trial_seed = substream(seed, {kStreamConcentration, 0, static_cast<uint64_t>(t)});
    Philox rng(substream(trial_seed, {kStreamSplit}), 0);
    for (VertexId v = 0; v < inst.n; ++v) lab[v] = static_cast<int8_t>(rng.bits(v, 0) & 1);
    std::fill(cross.begin(), cross.end(), 0);
    for (const Arrival& a : inst.arrivals) {
      for (const RevealedEdge& e : a.edges) {
        if (lab[e.to] != lab[a.v]) {
          ++cross[e.to];
          ++cross[a.v];
        }
      }
    }
    for (VertexId v = 0; v < inst.n; ++v) {
      if (deg[v] == 0) continue;
      ++rep.samples;
      if (cross[v] > rep.threshold) ++rep.exceed;
      ratio_sum += cross[v] / (deg[v] / 2.0);
    }
  }
  if (rep.samples > 0) {
    rep.exceed_freq = static_cast<double>(rep.exceed) / rep.samples;
    rep.mean_ratio = ratio_sum / rep.samples;
  }

  rep.phase_trials = phase_trials;
  double colored_sum = 0;
  for (int64_t t = 0; t < phase_trials; ++t) {
    ColorResult cr = color_via_matchings(
        inst, cfg, opts, substream(seed, {kStreamConcentration, 1, static_cast<uint64_t>(t)}));
    for (const LevelStats& lv : cr.levels) {
      for (const PhaseStats& ph : lv.phases) {
        int32_t near_max =
            std::max<int32_t>(1, static_cast<int32_t>(std::ceil(ph.delta_i)) - ph.passes);
        for (VertexId v = 0; v < inst.n; ++v) {
          if (ph.admitted_at_vertex[v] < near_max) continue;
          ++rep.phase_samples;
          colored_sum += ph.colored_at_vertex[v];
          if (ph.colored_at_vertex[v] <= rep.phase_floor) ++rep.phase_low;
        }
      }
    }
  }
  if (rep.phase_samples > 0) {
    rep.phase_low_freq = static_cast<double>(rep.phase_low) / rep.phase_samples;
    rep.mean_phase_colored = colored_sum / rep.phase_samples;
  }
  return rep;
}

std::string marginal_report_csv(const MarginalReport& rep) {
  std::string out = "u,v,x,branch,g,q1,J,p,deficiency,target,estimate,se,z\n";
  for (const MarginalRow& r : rep.rows) {
    out += std::to_string(r.u) + ',' + std::to_string(r.v) + ',' + fmt_double(r.x) + ',';
    out += branch_name(r.branch);
    out += ',' + fmt_double(r.g) + ',' + fmt_double(r.q1) + ',' + fmt_double(r.j) + ',' +
           fmt_double(r.p) + ',' + fmt_double(r.deficiency) + ',' + fmt_double(r.target) + ',' +
           fmt_double(r.estimate) + ',' + fmt_double(r.se) + ',' + fmt_double(r.z) + '\n';
  }
  return out;
}

std::string marginal_report_json(const MarginalReport& rep) {
  nlohmann::ordered_json j;
  j["exact"] = rep.exact;
  j["trials"] = rep.trials;
  j["worst_abs_z"] = rep.worst_abs_z;
  j["worst_abs_err"] = rep.worst_abs_err;
  j["deficiency_total"] = rep.deficiency_total;
  j["rows"] = nlohmann::ordered_json::array();
  for (const MarginalRow& r : rep.rows) {
    nlohmann::ordered_json row;
    row["u"] = r.u;
    row["v"] = r.v;
    row["x"] = r.x;
    row["branch"] = branch_name(r.branch);
    row["g"] = r.g;
    row["q1"] = r.q1;
    row["J"] = r.j;
    row["p"] = r.p;
    row["deficiency"] = r.deficiency;
    row["target"] = r.target;
    row["estimate"] = r.estimate;
    row["se"] = r.se;
    row["z"] = r.z;
    j["rows"].push_back(std::move(row));
  }
  return j.dump(2) + "\n";
}

std::string covariance_report_csv(const CovarianceReport& rep) {
  std::string out = "kind,v,u,w,estimate,se,bound,gap\n";
  for (const CovariancePair& p : rep.pairs) {
    out += "free_pair," + std::to_string(p.v) + ',' + std::to_string(p.u) + ',' +
           std::to_string(p.w) + ',' + fmt_double(p.cov_free) + ',' + fmt_double(p.se) + ',' +
           fmt_double(p.bound) + ',' + fmt_double(p.complement_gap) + '\n';
    out += "low_pair," + std::to_string(p.v) + ',' + std::to_string(p.u) + ',' +
           std::to_string(p.w) + ',' + fmt_double(p.cov_low) + ',' + fmt_double(p.se_low) + ',' +
           fmt_double(4 * p.se_low) + ",0\n";
  }
  for (const HighMassRow& r : rep.high_rows)
    out += "high_mass," + std::to_string(r.v) + ',' + std::to_string(r.u) + ",-1," +
           fmt_double(r.prob) + ',' + fmt_double(r.se) + ',' + fmt_double(r.bound) + ",0\n";
  return out;
}

std::string covariance_report_json(const CovarianceReport& rep) {
  nlohmann::ordered_json j;
  j["bipartite"] = rep.bipartite;
  j["trials"] = rep.trials;
  j["worst_cov_excess"] = rep.worst_cov_excess;
  j["worst_low_excess"] = rep.worst_low_excess;
  j["worst_high_excess"] = rep.worst_high_excess;
  j["pairs"] = nlohmann::ordered_json::array();
  for (const CovariancePair& p : rep.pairs) {
    nlohmann::ordered_json row;
    row["v"] = p.v;
    row["u"] = p.u;
    row["w"] = p.w;
    row["cov_free"] = p.cov_free;
    row["se"] = p.se;
    row["bound"] = p.bound;
    row["cov_low"] = p.cov_low;
    row["se_low"] = p.se_low;
    row["complement_gap"] = p.complement_gap;
    j["pairs"].push_back(std::move(row));
  }
  j["high_mass"] = nlohmann::ordered_json::array();
  for (const HighMassRow& r : rep.high_rows) {
    nlohmann::ordered_json row;
    row["v"] = r.v;
    row["u"] = r.u;
    row["prob"] = r.prob;
    row["se"] = r.se;
    row["bound"] = r.bound;
    j["high_mass"].push_back(std::move(row));
  }
  return j.dump(2) + "\n";
}

std::string concentration_report_csv(const ConcentrationReport& rep) {
  std::string out =
      "trials,epsilon,threshold,samples,exceed,exceed_freq,chernoff_target,mean_ratio,"
      "phase_trials,phase_floor,phase_samples,phase_low,phase_low_freq,phase_target,"
      "mean_phase_colored\n";
  out += std::to_string(rep.trials) + ',' + fmt_double(rep.epsilon) + ',' +
         fmt_double(rep.threshold) + ',' + std::to_string(rep.samples) + ',' +
         std::to_string(rep.exceed) + ',' + fmt_double(rep.exceed_freq) + ',' +
         fmt_double(rep.chernoff_target) + ',' + fmt_double(rep.mean_ratio) + ',' +
         std::to_string(rep.phase_trials) + ',' + fmt_double(rep.phase_floor) + ',' +
         std::to_string(rep.phase_samples) + ',' + std::to_string(rep.phase_low) + ',' +
         fmt_double(rep.phase_low_freq) + ',' + fmt_double(rep.phase_target) + ',' +
         fmt_double(rep.mean_phase_colored) + '\n';
  return out;
}

std::string concentration_report_json(const ConcentrationReport& rep) {
  nlohmann::ordered_json j;
  j["trials"] = rep.trials;
  j["epsilon"] = rep.epsilon;
  j["threshold"] = rep.threshold;
  j["samples"] = rep.samples;
  j["exceed"] = rep.exceed;
  j["exceed_freq"] = rep.exceed_freq;
  j["chernoff_target"] = rep.chernoff_target;
  j["mean_ratio"] = rep.mean_ratio;
  j["phase_trials"] = rep.phase_trials;
  j["phase_floor"] = rep.phase_floor;
  j["phase_samples"] = rep.phase_samples;
  j["phase_low"] = rep.phase_low;
  j["phase_low_freq"] = rep.phase_low_freq;
  j["phase_target"] = rep.phase_target;
  j["mean_phase_colored"] = rep.mean_phase_colored;
  return j.dump(2) + "\n";
}

}  // namespace oec
