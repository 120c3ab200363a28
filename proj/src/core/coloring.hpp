#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "graph.hpp"
#include "rounding.hpp"

namespace oec {

inline constexpr int32_t kNoColor = -1;

// Tracks which colors are in use at each vertex. Colors are dense
// non-negative integers; per-vertex sets are bit words grown on demand.
class ColorCounter {
 public:
  explicit ColorCounter(int32_t n) : used_(n) {}

  // Smallest color >= base free at both endpoints; marks it at both.
  // vetoed(color) may exclude extra colors from consideration.
  template <typename Veto>
  int32_t assign_smallest_free(VertexId a, VertexId b, int32_t base, Veto&& vetoed) {
    for (int32_t w = base / 64;; ++w) {
      uint64_t mask = ~(word(a, w) | word(b, w));
      if (w == base / 64 && base % 64) mask &= ~0ull << (base % 64);
      while (mask) {
        int32_t color = w * 64 + std::countr_zero(mask);
        if (!vetoed(color)) {
          mark(a, color);
          mark(b, color);
          return color;
        }
        mask &= mask - 1;
      }
    }
  }
  int32_t assign_smallest_free(VertexId a, VertexId b, int32_t base = 0) {
    return assign_smallest_free(a, b, base, [](int32_t) { return false; });
  }

  void mark(VertexId v, int32_t color);
  bool marked(VertexId v, int32_t color) const;
  int32_t high_water() const { return high_water_; }

 private:
  uint64_t word(VertexId v, int32_t w) const {
    const auto& wv = used_[v];
    return static_cast<size_t>(w) < wv.size() ? wv[w] : 0;
  }

  std::vector<std::vector<uint64_t>> used_;
  int32_t high_water_ = 0;
};

// Colors each edge at its arrival with the smallest color free at both
// endpoints. Uses at most 2*delta - 1 colors.
Coloring greedy_color(const Instance& inst);

// Parameters of the matching-based reduction. The paper preset's constants
// (12, 18, 48) make the machinery engage only at astronomical delta; the
// desk preset substitutes smaller factors with the same functional forms
// so the phase structure is exercised at test scale.
struct ReductionConfig {
  enum class Preset : uint8_t { paper, desk };

  Preset preset = Preset::desk;
  double alpha = 0;         // colors spent per unit of degree reduced
  int32_t L = 2;            // per-phase degree reduction target
  double epsilon = 0.3;
  double greedy_cutoff = 0;  // residual degree handed to the greedy finisher
  double split_stop = 0;     // stop bipartition recursion at this degree
  double ladder_slack = 1;   // per-phase declared-degree decrement = L * slack
  int32_t max_levels = 24;
  double factor_L = 0.375;     // replaces 12 in L = ceil(f * sqrt(delta ln n))
  double factor_split = 1.5;   // replaces 18 in split_stop
  double factor_cutoff = 1.2;  // replaces 48 in greedy_cutoff

  static ReductionConfig make(Preset preset, int32_t n, int32_t delta);

  // Same preset and factors, ladder parameters re-derived for a subgraph
  // with a smaller degree bound (split recursion keeps epsilon fixed).
  ReductionConfig rescaled(int32_t n, double delta) const;
};

const char* to_string(ReductionConfig::Preset p);
bool preset_from_string(const std::string& s, ReductionConfig::Preset* out);

// Declared-degree ladder: phase i targets residual degree delta - (i-1)*L*slack
// and runs ceil(alpha*L) matching passes, one reserved color per pass.
struct PhasePlan {
  struct Phase {
    double delta_i = 0;
    int32_t passes = 0;
    int32_t color_base = 0;
    int32_t cap = 0;  // per-vertex admission cap, floor(delta_i)
  };
  std::vector<Phase> phases;
  int32_t color_base = 0;
  int32_t colors_reserved = 0;

  static PhasePlan make(double delta, const ReductionConfig& cfg, int32_t color_base);
};

struct PhaseStats {
  double delta_i = 0;
  int32_t passes = 0;
  int32_t cap = 0;
  int32_t color_base = 0;
  int64_t offered = 0;    // edge admissions into this phase
  int64_t colored = 0;
  int64_t deferrals = 0;  // edges denied admission by a full cap
  double deficiency = 0;
  std::vector<int64_t> pass_colored;
  std::vector<int32_t> admitted_at_vertex;
  std::vector<int32_t> colored_at_vertex;
};

// Runs the phase ladder over one arrival stream. Each pass holds a
// persistent rounder fed every arrival in lockstep; an edge cascades
// through passes and phases until matched or exhausted. Per-vertex
// admission caps keep every pass's fractional degree at most 1.
class LevelDriver {
 public:
  LevelDriver(int32_t n, double delta, const ReductionConfig& cfg, const BackendOptions& opts,
              uint64_t seed, int32_t color_base);

  // colors[i] is the reserved color assigned to neighbors[i], or kNoColor.
  void arrive(VertexId v, const std::vector<VertexId>& neighbors, std::vector<int32_t>& colors);

  const PhasePlan& plan() const { return plan_; }
  int32_t colors_reserved() const { return plan_.colors_reserved; }
  std::vector<PhaseStats> stats() const;
  double deficiency_total() const;
  int64_t colored_total() const;

 private:
  struct Pass {
    int32_t color;
    OnlineRounder rounder;
  };
  struct Phase {
    double x = 0;
    int32_t cap = 0;
    PhaseStats stats;
    std::vector<Pass> passes;
  };

  int32_t n_;
  PhasePlan plan_;
  std::vector<Phase> phases_;
};

// Random per-level bipartitions and each edge's first crossing level.
// Level count satisfies delta * ((1+eps)/2)^levels <= split_stop.
struct BipartitionLevels {
  int32_t levels = 0;
  std::vector<std::vector<int8_t>> labels;  // [level][vertex], values 1/2
  std::vector<int32_t> edge_level;          // flat arrival-order edge index -> level or -1
  std::vector<double> declared_delta;       // degree bound declared for level's crossing graph
};

BipartitionLevels bipartition_split(const Instance& inst, const ReductionConfig& cfg,
                                    uint64_t seed);

struct LevelStats {
  int32_t level = 0;
  double declared_delta = 0;
  int32_t colors_reserved = 0;
  int64_t edges = 0;
  int64_t colored = 0;
  double deficiency = 0;
  std::vector<PhaseStats> phases;
};

struct ColorResult {
  Coloring coloring;
  int32_t n = 0;
  int32_t delta = 0;
  int32_t palette = 0;
  double ratio = 0;
  int32_t colors_reserved = 0;  // phase reservations; greedy colors sit above
  int64_t matched_colored = 0;
  int64_t greedy_colored = 0;
  double deficiency_total = 0;
  std::vector<LevelStats> levels;
};

// Online coloring via repeated matching passes on the declared-degree
// ladder, greedy finisher on whatever the passes leave uncolored. The
// marginal guarantee behind the color budget needs a bipartite instance;
// the coloring itself is proper on any input.
ColorResult color_via_matchings(const Instance& inst, const ReductionConfig& cfg,
                                const BackendOptions& opts, uint64_t seed);

// General-graph wrapper: random bipartitions peel crossing subgraphs,
// each colored by its own phase ladder with a disjoint reserved palette;
// uncrossed and unmatched edges go to one shared greedy finisher.
ColorResult color_general(const Instance& inst, const ReductionConfig& cfg,
                          const BackendOptions& opts, uint64_t seed);

struct VerifyReport {
  bool proper = false;
  bool covers = false;  // colored edges are exactly the instance's edges
  int32_t palette = 0;
  double ratio = 0;
  std::string detail;   // first offense, empty when clean
};

VerifyReport verify_coloring(const Instance& inst, const Coloring& col);

std::string color_report_json(const ColorResult& res, const VerifyReport& verify);

}  // namespace oec
