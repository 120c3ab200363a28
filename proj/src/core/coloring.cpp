#include "coloring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "constants.hpp"
#include "errors.hpp"
#include "json.hpp"
#include "rng.hpp"

namespace oec {

void ColorCounter::mark(VertexId v, int32_t color) {
  auto& wv = used_[v];
  size_t w = static_cast<size_t>(color) / 64;
  if (wv.size() <= w) wv.resize(w + 1, 0);
  wv[w] |= 1ull << (color % 64);
  high_water_ = std::max(high_water_, color + 1);
}

bool ColorCounter::marked(VertexId v, int32_t color) const {
  return word(v, color / 64) >> (color % 64) & 1;
}

Coloring greedy_color(const Instance& inst) {
  require_valid(inst);
  ColorCounter counter(inst.n);
  Coloring col;
  col.edges.reserve(inst.edge_count());
  for (const Arrival& a : inst.arrivals)
    for (const RevealedEdge& e : a.edges)
      col.edges.push_back({e.to, a.v, counter.assign_smallest_free(e.to, a.v)});
  return col;
}

ReductionConfig ReductionConfig::make(Preset preset, int32_t n, int32_t delta) {
  ReductionConfig cfg;
  cfg.preset = preset;
  cfg.alpha = 1.0 / constants().half_plus_c;
  double logn = std::log(std::max<int32_t>(n, 2));
  double d = std::max<int32_t>(delta, 1);
  if (preset == Preset::paper) {
    cfg.factor_L = 12.0;
    cfg.factor_split = 18.0;
    cfg.factor_cutoff = 48.0;
    cfg.epsilon = std::pow(logn / d, 0.25);
    cfg.ladder_slack = (1.0 - cfg.epsilon) * (1.0 - cfg.epsilon);
    cfg.L = static_cast<int32_t>(std::ceil(cfg.factor_L * std::sqrt(d * logn)));
  } else {
    cfg.epsilon = std::min(0.3, std::pow(logn / d, 0.25));
    cfg.ladder_slack = 1.0;
    cfg.L = std::max<int32_t>(
        2, static_cast<int32_t>(std::ceil(cfg.factor_L * std::sqrt(d * logn))));
  }
  cfg.greedy_cutoff = cfg.factor_cutoff * std::pow(d * d * d * logn, 0.25);
  cfg.split_stop = cfg.factor_split * std::sqrt(d * logn);
  if (preset == Preset::desk) cfg.greedy_cutoff = std::max(2.0, cfg.greedy_cutoff);
  return cfg;
}

ReductionConfig ReductionConfig::rescaled(int32_t n, double delta) const {
  ReductionConfig cfg = *this;
  double logn = std::log(std::max<int32_t>(n, 2));
  double d = std::max(delta, 1.0);
  cfg.L = static_cast<int32_t>(std::ceil(factor_L * std::sqrt(d * logn)));
  cfg.greedy_cutoff = factor_cutoff * std::pow(d * d * d * logn, 0.25);
  if (preset == Preset::desk) {
    cfg.L = std::max<int32_t>(2, cfg.L);
    cfg.greedy_cutoff = std::max(2.0, cfg.greedy_cutoff);
  }
  return cfg;
}

const char* to_string(ReductionConfig::Preset p) {
  return p == ReductionConfig::Preset::paper ? "paper" : "desk";
}

bool preset_from_string(const std::string& s, ReductionConfig::Preset* out) {
  if (s == "paper")
    *out = ReductionConfig::Preset::paper;
  else if (s == "desk")
    *out = ReductionConfig::Preset::desk;
  else
    return false;
  return true;
}

PhasePlan PhasePlan::make(double delta, const ReductionConfig& cfg, int32_t color_base) {
  PhasePlan plan;
  plan.color_base = color_base;
  int32_t passes = std::max<int32_t>(1, static_cast<int32_t>(std::ceil(cfg.alpha * cfg.L)));
  double step = std::max(0.25, cfg.L * cfg.ladder_slack);
  double stop = std::max(cfg.greedy_cutoff, 1.0);
  int32_t base = color_base;
  for (double d = delta; d >= stop; d -= step) {
    plan.phases.push_back({d, passes, base, static_cast<int32_t>(std::floor(d + 1e-9))});
    base += passes;
  }
  plan.colors_reserved = base - color_base;
  return plan;
}

LevelDriver::LevelDriver(int32_t n, double delta, const ReductionConfig& cfg,
                         const BackendOptions& opts, uint64_t seed, int32_t color_base)
    : n_(n), plan_(PhasePlan::make(delta, cfg, color_base)) {
  phases_.reserve(plan_.phases.size());
  for (size_t pi = 0; pi < plan_.phases.size(); ++pi) {
    const PhasePlan::Phase& pp = plan_.phases[pi];
    Phase ph;
    ph.x = 1.0 / pp.delta_i;
    ph.cap = pp.cap;
    ph.stats.delta_i = pp.delta_i;
    ph.stats.passes = pp.passes;
    ph.stats.cap = pp.cap;
    ph.stats.color_base = pp.color_base;
    ph.stats.pass_colored.assign(pp.passes, 0);
    ph.stats.admitted_at_vertex.assign(n, 0);
    ph.stats.colored_at_vertex.assign(n, 0);
    ph.passes.reserve(pp.passes);
    for (int32_t pj = 0; pj < pp.passes; ++pj)
      ph.passes.push_back(Pass{
          pp.color_base + pj,
          OnlineRounder(n, opts, substream(seed, {pi, static_cast<uint64_t>(pj)}))});
    phases_.push_back(std::move(ph));
  }
}

void LevelDriver::arrive(VertexId v, const std::vector<VertexId>& neighbors,
                         std::vector<int32_t>& colors) {
  colors.assign(neighbors.size(), kNoColor);
  std::vector<size_t> pending(neighbors.size());
  std::iota(pending.begin(), pending.end(), size_t{0});
  std::vector<size_t> alive;
  std::vector<RevealedEdge> offer;
  for (Phase& ph : phases_) {
    alive.clear();
    for (size_t i : pending) {
      VertexId u = neighbors[i];
      if (ph.stats.admitted_at_vertex[u] < ph.cap && ph.stats.admitted_at_vertex[v] < ph.cap) {
        ++ph.stats.admitted_at_vertex[u];
        ++ph.stats.admitted_at_vertex[v];
        ++ph.stats.offered;
        alive.push_back(i);
      } else {
        ++ph.stats.deferrals;
      }
    }
    for (size_t pj = 0; pj < ph.passes.size(); ++pj) {
      Pass& pass = ph.passes[pj];
      offer.clear();
      for (size_t i : alive) offer.push_back({neighbors[i], ph.x});
      const ArrivalTranscript& t = pass.rounder.arrive(v, offer);
      if (t.matched_to == kNil) continue;
      for (auto it = alive.begin(); it != alive.end(); ++it) {
        if (neighbors[*it] != t.matched_to) continue;
        size_t idx = *it;
        colors[idx] = pass.color;
        ++ph.stats.colored;
        ++ph.stats.pass_colored[pj];
        ++ph.stats.colored_at_vertex[neighbors[idx]];
        ++ph.stats.colored_at_vertex[v];
        alive.erase(it);
        pending.erase(std::find(pending.begin(), pending.end(), idx));
        break;
      }
    }
  }
}

std::vector<PhaseStats> LevelDriver::stats() const {
  std::vector<PhaseStats> out;
  out.reserve(phases_.size());
  for (const Phase& ph : phases_) {
    PhaseStats s = ph.stats;
    s.deficiency = 0;
    for (const Pass& p : ph.passes) s.deficiency += p.rounder.deficiency_total();
    out.push_back(std::move(s));
  }
  return out;
}

double LevelDriver::deficiency_total() const {
  double total = 0;
  for (const Phase& ph : phases_)
    for (const Pass& p : ph.passes) total += p.rounder.deficiency_total();
  return total;
}

int64_t LevelDriver::colored_total() const {
  int64_t total = 0;
  for (const Phase& ph : phases_) total += ph.stats.colored;
  return total;
}

BipartitionLevels bipartition_split(const Instance& inst, const ReductionConfig& cfg,
                                    uint64_t seed) {
  require_valid(inst);
  BipartitionLevels out;
  double f = (1.0 + cfg.epsilon) / 2.0;
  if (f > 0 && f < 1.0) {
    double d = inst.delta;
    while (out.levels < cfg.max_levels && d > cfg.split_stop) {
      d *= f;
      ++out.levels;
      out.declared_delta.push_back(std::ceil(d));
    }
  }
  out.labels.assign(out.levels, std::vector<int8_t>(inst.n, 1));
  for (int32_t l = 0; l < out.levels; ++l) {
    Philox rng(substream(seed, {kStreamSplit}), static_cast<uint64_t>(l));
    for (VertexId v = 0; v < inst.n; ++v)
      out.labels[l][v] = static_cast<int8_t>(1 + (rng.bits(v, 0) & 1));
  }
  out.edge_level.reserve(inst.edge_count());
  for (const Arrival& a : inst.arrivals) {
    for (const RevealedEdge& e : a.edges) {
      int32_t lev = -1;
      for (int32_t l = 0; l < out.levels; ++l) {
        if (out.labels[l][e.to] != out.labels[l][a.v]) {
          lev = l;
          break;
        }
      }
      out.edge_level.push_back(lev);
    }
  }
  return out;
}

namespace {

ColorResult run_levels(const Instance& inst, const ReductionConfig& cfg,
                       const BackendOptions& opts, uint64_t seed,
                       const BipartitionLevels* split) {
  require_valid(inst);
  ColorResult res;
  res.n = inst.n;
  res.delta = inst.delta;

  int32_t nlevels = split ? split->levels : 1;
  std::vector<LevelDriver> drivers;
  drivers.reserve(nlevels);
  std::vector<LevelStats> levels(nlevels);
  int32_t base = 0;
  for (int32_t l = 0; l < nlevels; ++l) {
    double declared = split ? split->declared_delta[l] : static_cast<double>(inst.delta);
    ReductionConfig level_cfg = split ? cfg.rescaled(inst.n, declared) : cfg;
    drivers.emplace_back(inst.n, declared, level_cfg, opts,
                         substream(seed, {kStreamColorPass, static_cast<uint64_t>(l)}), base);
    levels[l].level = l;
    levels[l].declared_delta = declared;
    levels[l].colors_reserved = drivers[l].colors_reserved();
    base += drivers[l].colors_reserved();
  }
  res.colors_reserved = base;

  ColorCounter counter(inst.n);
  std::vector<std::vector<VertexId>> bucket(nlevels);
  std::vector<std::vector<size_t>> bucket_idx(nlevels);
  std::vector<int32_t> level_colors;
  std::vector<int32_t> arrival_colors;
  std::vector<size_t> leftovers;
  res.coloring.edges.reserve(inst.edge_count());
  size_t flat = 0;
  for (const Arrival& a : inst.arrivals) {
    arrival_colors.assign(a.edges.size(), kNoColor);
    leftovers.clear();
    for (int32_t l = 0; l < nlevels; ++l) {
      bucket[l].clear();
      bucket_idx[l].clear();
    }
    for (size_t i = 0; i < a.edges.size(); ++i) {
      int32_t lev = split ? split->edge_level[flat + i] : 0;
      if (lev >= 0) {
        bucket[lev].push_back(a.edges[i].to);
        bucket_idx[lev].push_back(i);
        ++levels[lev].edges;
      } else {
        leftovers.push_back(i);
      }
    }
    for (int32_t l = 0; l < nlevels; ++l) {
      drivers[l].arrive(a.v, bucket[l], level_colors);
      for (size_t j = 0; j < bucket[l].size(); ++j) {
        if (level_colors[j] >= 0)
          arrival_colors[bucket_idx[l][j]] = level_colors[j];
        else
          leftovers.push_back(bucket_idx[l][j]);
      }
    }
    // Reserved colors picked this arrival must be visible to the greedy
    // finisher before it assigns anything at these endpoints.
    for (size_t i = 0; i < a.edges.size(); ++i) {
      if (arrival_colors[i] < 0) continue;
      counter.mark(a.edges[i].to, arrival_colors[i]);
      counter.mark(a.v, arrival_colors[i]);
      ++res.matched_colored;
    }
    std::sort(leftovers.begin(), leftovers.end());
    for (size_t i : leftovers) {
      arrival_colors[i] =
          counter.assign_smallest_free(a.edges[i].to, a.v, res.colors_reserved);
      ++res.greedy_colored;
    }
    for (size_t i = 0; i < a.edges.size(); ++i)
      res.coloring.edges.push_back({a.edges[i].to, a.v, arrival_colors[i]});
    flat += a.edges.size();
  }

  for (int32_t l = 0; l < nlevels; ++l) {
    levels[l].colored = drivers[l].colored_total();
    levels[l].deficiency = drivers[l].deficiency_total();
    levels[l].phases = drivers[l].stats();
    res.deficiency_total += levels[l].deficiency;
  }
  res.levels = std::move(levels);
  res.palette = res.coloring.palette();
  res.ratio = res.delta > 0 ? static_cast<double>(res.palette) / res.delta : 0.0;
  return res;
}

}  // namespace

ColorResult color_via_matchings(const Instance& inst, const ReductionConfig& cfg,
                                const BackendOptions& opts, uint64_t seed) {
  return run_levels(inst, cfg, opts, seed, nullptr);
}

ColorResult color_general(const Instance& inst, const ReductionConfig& cfg,
                          const BackendOptions& opts, uint64_t seed) {
  BipartitionLevels split = bipartition_split(inst, cfg, seed);
  return run_levels(inst, cfg, opts, seed, &split);
}

VerifyReport verify_coloring(const Instance& inst, const Coloring& col) {
  VerifyReport rep;
  rep.palette = col.palette();
  rep.ratio = inst.delta > 0 ? static_cast<double>(rep.palette) / inst.delta : 0.0;

  std::vector<std::pair<VertexId, VertexId>> want, got;
  want.reserve(inst.edge_count());
  for (const Arrival& a : inst.arrivals)
    for (const RevealedEdge& e : a.edges) want.emplace_back(e.to, a.v);
  got.reserve(col.edges.size());
  for (const ColoredEdge& e : col.edges)
    got.emplace_back(std::min(e.u, e.v), std::max(e.u, e.v));
  std::sort(want.begin(), want.end());
  std::sort(got.begin(), got.end());
  rep.covers = want == got;

  rep.proper = true;
  for (const ColoredEdge& e : col.edges) {
    if (e.color < 0) {
      rep.proper = false;
      rep.detail = "edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") has no color";
      break;
    }
  }
  if (rep.proper) {
    std::vector<std::pair<VertexId, int32_t>> slots;
    slots.reserve(col.edges.size() * 2);
    for (const ColoredEdge& e : col.edges) {
      slots.emplace_back(e.u, e.color);
      slots.emplace_back(e.v, e.color);
    }
    std::sort(slots.begin(), slots.end());
    for (size_t i = 1; i < slots.size(); ++i) {
      if (slots[i] == slots[i - 1]) {
        rep.proper = false;
        rep.detail = "color " + std::to_string(slots[i].second) + " repeated at vertex " +
                     std::to_string(slots[i].first);
        break;
      }
    }
  }
  if (!rep.covers && rep.detail.empty()) rep.detail = "colored edge set differs from the instance";
  return rep;
}

std::string color_report_json(const ColorResult& res, const VerifyReport& verify) {
  nlohmann::ordered_json j;
  j["n"] = res.n;
  j["delta"] = res.delta;
  j["palette"] = res.palette;
  j["ratio"] = res.ratio;
  j["proper"] = verify.proper;
  j["covers"] = verify.covers;
  j["colors_reserved"] = res.colors_reserved;
  j["matched_colored"] = res.matched_colored;
  j["greedy_colored"] = res.greedy_colored;
  j["deficiency_total"] = res.deficiency_total;
  j["levels"] = nlohmann::ordered_json::array();
  for (const LevelStats& lv : res.levels) {
    nlohmann::ordered_json jl;
    jl["level"] = lv.level;
    jl["declared_delta"] = lv.declared_delta;
    jl["colors_reserved"] = lv.colors_reserved;
    jl["edges"] = lv.edges;
    jl["colored"] = lv.colored;
    jl["deficiency"] = lv.deficiency;
    jl["phases"] = nlohmann::ordered_json::array();
    for (const PhaseStats& ph : lv.phases) {
      nlohmann::ordered_json jp;
      jp["delta_i"] = ph.delta_i;
      jp["passes"] = ph.passes;
      jp["cap"] = ph.cap;
      jp["color_base"] = ph.color_base;
      jp["offered"] = ph.offered;
      jp["colored"] = ph.colored;
      jp["deferrals"] = ph.deferrals;
      jp["deficiency"] = ph.deficiency;
      jp["pass_colored"] = ph.pass_colored;
      jl["phases"].push_back(std::move(jp));
    }
    j["levels"].push_back(std::move(jl));
  }
  if (!verify.detail.empty()) j["detail"] = verify.detail;
  return j.dump(2) + "\n";
}

}  // namespace oec
