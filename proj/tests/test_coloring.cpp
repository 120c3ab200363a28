#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "coloring.hpp"
#include "doctest.h"
#include "graph.hpp"
#include "jsonl.hpp"

using namespace oec;

namespace {

BackendOptions small_ensemble(int32_t replicas = 1500) {
  BackendOptions opts;
  opts.replicas = replicas;
  return opts;
}

// Edges with color below the reservation line must come from matching
// passes; everything above belongs to the greedy finisher.
void check_color_accounting(const Instance& inst, const ColorResult& res) {
  VerifyReport rep = verify_coloring(inst, res.coloring);
  CAPTURE(rep.detail);
  CHECK(rep.proper);
  CHECK(rep.covers);
  CHECK(rep.palette == res.palette);
  CHECK(res.ratio == doctest::Approx(static_cast<double>(res.palette) / res.delta).epsilon(1e-12));
  int64_t reserved_used = 0, greedy_used = 0;
  for (const ColoredEdge& e : res.coloring.edges)
    (e.color < res.colors_reserved ? reserved_used : greedy_used)++;
  CHECK(reserved_used == res.matched_colored);
  CHECK(greedy_used == res.greedy_colored);
  CHECK(res.matched_colored + res.greedy_colored == inst.edge_count());
}

}  // namespace

TEST_CASE("color counter hands out the smallest free color") {
  ColorCounter cc(12);
  CHECK(cc.assign_smallest_free(0, 1) == 0);
  CHECK(cc.assign_smallest_free(0, 1) == 1);
  CHECK(cc.assign_smallest_free(2, 3) == 0);
  CHECK(cc.assign_smallest_free(0, 3) == 2);
  CHECK(cc.marked(0, 2));
  CHECK(cc.marked(3, 2));
  CHECK(!cc.marked(2, 2));
  CHECK(cc.high_water() == 3);

  CHECK(cc.assign_smallest_free(4, 5, 7) == 7);
  CHECK(cc.assign_smallest_free(4, 5, 5) == 5);
  CHECK(cc.assign_smallest_free(6, 7, 0, [](int32_t c) { return c < 3; }) == 3);

  for (int32_t c = 0; c < 64; ++c) cc.mark(8, c);
  CHECK(cc.assign_smallest_free(8, 9) == 64);
  CHECK(cc.high_water() == 65);
}

TEST_CASE("greedy coloring is proper, covering, and within 2 delta - 1") {
  for (uint64_t seed = 0; seed < 6; ++seed) {
    Instance insts[] = {
        gen_regular_bipartite(6, 4, seed, ArrivalOrder::random_order),
        gen_general(14, 5, GeneralModel::erdos_renyi, seed),
        gen_general(12, 6, GeneralModel::union_of_matchings, seed),
    };
    for (const Instance& inst : insts) {
      Coloring col = greedy_color(inst);
      VerifyReport rep = verify_coloring(inst, col);
      CAPTURE(rep.detail);
      CHECK(rep.proper);
      CHECK(rep.covers);
      int32_t dmax = 0;
      for (int32_t d : inst.degrees()) dmax = std::max(dmax, d);
      if (inst.edge_count() > 0) CHECK(col.palette() <= 2 * dmax - 1);
    }
  }
}

TEST_CASE("desk preset keeps the paper preset's functional forms at small scale") {
  ReductionConfig cfg = ReductionConfig::make(ReductionConfig::Preset::desk, 64, 12);
  double logn = std::log(64.0);
  CHECK(cfg.alpha == doctest::Approx(1.0 / constants().half_plus_c).epsilon(1e-15));
  CHECK(cfg.epsilon == doctest::Approx(std::min(0.3, std::pow(logn / 12, 0.25))).epsilon(1e-12));
  CHECK(cfg.L == 3);
  CHECK(cfg.greedy_cutoff ==
        doctest::Approx(1.2 * std::pow(12.0 * 12 * 12 * logn, 0.25)).epsilon(1e-12));
  CHECK(cfg.split_stop == doctest::Approx(1.5 * std::sqrt(12 * logn)).epsilon(1e-12));
  CHECK(cfg.ladder_slack == 1.0);

  ReductionConfig paper = ReductionConfig::make(ReductionConfig::Preset::paper, 64, 12);
  CHECK(paper.factor_L == 12.0);
  CHECK(paper.factor_split == 18.0);
  CHECK(paper.factor_cutoff == 48.0);
  CHECK(paper.ladder_slack ==
        doctest::Approx((1 - paper.epsilon) * (1 - paper.epsilon)).epsilon(1e-12));
  CHECK(PhasePlan::make(12, paper, 0).phases.empty());

  ReductionConfig down = cfg.rescaled(64, 8.0);
  CHECK(down.L == std::max<int32_t>(2, static_cast<int32_t>(std::ceil(0.375 * std::sqrt(8 * logn)))));
  CHECK(down.greedy_cutoff ==
        doctest::Approx(std::max(2.0, 1.2 * std::pow(8.0 * 8 * 8 * logn, 0.25))).epsilon(1e-12));
  CHECK(down.epsilon == cfg.epsilon);
}

TEST_CASE("phase plan walks the declared-degree ladder") {
  ReductionConfig cfg;
  cfg.alpha = 1.9;
  cfg.L = 2;
  cfg.ladder_slack = 1.0;
  cfg.greedy_cutoff = 3.2;
  PhasePlan plan = PhasePlan::make(10, cfg, 5);
  REQUIRE(plan.phases.size() == 4);  // 10, 8, 6, 4
  int32_t passes = static_cast<int32_t>(std::ceil(1.9 * 2));
  int32_t base = 5;
  double d = 10;
  for (const PhasePlan::Phase& ph : plan.phases) {
    CHECK(ph.delta_i == doctest::Approx(d).epsilon(1e-12));
    CHECK(ph.passes == passes);
    CHECK(ph.color_base == base);
    CHECK(ph.cap == static_cast<int32_t>(d));
    base += passes;
    d -= 2;
  }
  CHECK(plan.color_base == 5);
  CHECK(plan.colors_reserved == 4 * passes);

  cfg.greedy_cutoff = 99;
  CHECK(PhasePlan::make(10, cfg, 0).colors_reserved == 0);
}

TEST_CASE("level driver respects admission caps and reports consistent stats") {
  ReductionConfig cfg;
  cfg.alpha = 1.0 / constants().half_plus_c;
  cfg.L = 2;
  cfg.ladder_slack = 1.0;
  cfg.greedy_cutoff = 4.5;
  Instance inst = gen_regular_bipartite(10, 6, 31, ArrivalOrder::interleaved);
  LevelDriver driver(inst.n, inst.delta, cfg, small_ensemble(), 9, 0);
  REQUIRE(driver.plan().phases.size() == 1);
  CHECK(driver.colors_reserved() == driver.plan().phases[0].passes);

  std::vector<int32_t> colors;
  std::vector<VertexId> neighbors;
  int64_t colored_seen = 0;
  for (const Arrival& a : inst.arrivals) {
    neighbors.clear();
    for (const RevealedEdge& e : a.edges) neighbors.push_back(e.to);
    driver.arrive(a.v, neighbors, colors);
    REQUIRE(colors.size() == neighbors.size());
    for (int32_t c : colors)
      if (c != kNoColor) {
        CHECK(c >= 0);
        CHECK(c < driver.colors_reserved());
        ++colored_seen;
      }
  }
  CHECK(colored_seen == driver.colored_total());

  auto stats = driver.stats();
  REQUIRE(stats.size() == 1);
  const PhaseStats& ph = stats[0];
  CHECK(ph.offered + ph.deferrals == inst.edge_count());
  int64_t pass_sum = 0;
  for (int64_t pc : ph.pass_colored) pass_sum += pc;
  CHECK(pass_sum == ph.colored);
  CHECK(ph.colored == colored_seen);
  for (VertexId v = 0; v < inst.n; ++v) {
    CHECK(ph.admitted_at_vertex[v] <= ph.cap);
    CHECK(ph.colored_at_vertex[v] <= ph.admitted_at_vertex[v]);
  }
}

TEST_CASE("reservation is spent even when passes match nothing") {
  ReductionConfig cfg;
  cfg.alpha = 1.9;
  cfg.L = 2;
  cfg.greedy_cutoff = 3;
  LevelDriver driver(4, 6.0, cfg, small_ensemble(100), 1, 0);
  CHECK(driver.colors_reserved() > 0);
  std::vector<int32_t> colors;
  for (VertexId v = 0; v < 4; ++v) driver.arrive(v, {}, colors);
  CHECK(driver.colored_total() == 0);
  CHECK(driver.deficiency_total() == 0);
}

TEST_CASE("matching reduction colors regular bipartite instances properly") {
  Instance inst = gen_regular_bipartite(32, 12, 5, ArrivalOrder::interleaved);
  ReductionConfig cfg = ReductionConfig::make(ReductionConfig::Preset::desk, inst.n, inst.delta);
  ColorResult res = color_via_matchings(inst, cfg, small_ensemble(), 77);
  CHECK(res.n == inst.n);
  CHECK(res.delta == 12);
  CHECK(res.colors_reserved > 0);
  CHECK(res.matched_colored > 0);
  check_color_accounting(inst, res);
  REQUIRE(res.levels.size() == 1);
  CHECK(res.levels[0].colors_reserved == res.colors_reserved);
  CHECK(res.levels[0].edges == inst.edge_count());

  ColorResult again = color_via_matchings(inst, cfg, small_ensemble(), 77);
  CHECK(coloring_to_csv(again.coloring) == coloring_to_csv(res.coloring));
  ColorResult other = color_via_matchings(inst, cfg, small_ensemble(), 78);
  CHECK(coloring_to_csv(other.coloring) != coloring_to_csv(res.coloring));
}

TEST_CASE("bipartition split recurses until the declared degree is small") {
  Instance inst = gen_regular_bipartite(12, 5, 3, ArrivalOrder::interleaved);
  ReductionConfig cfg;
  cfg.epsilon = 0.2;
  cfg.split_stop = 2.0;
  BipartitionLevels lev = bipartition_split(inst, cfg, 42);
  REQUIRE(lev.levels == 2);  // 5 -> 3 -> 1.8
  CHECK(lev.declared_delta[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(lev.declared_delta[1] == doctest::Approx(2.0).epsilon(1e-12));
  REQUIRE(lev.labels.size() == 2);
  REQUIRE(lev.edge_level.size() == static_cast<size_t>(inst.edge_count()));

  size_t idx = 0;
  for (const Arrival& a : inst.arrivals)
    for (const RevealedEdge& e : a.edges) {
      int32_t l = lev.edge_level[idx++];
      CHECK(l >= -1);
      CHECK(l < lev.levels);
      for (int32_t k = 0; k < (l < 0 ? lev.levels : l); ++k)
        CHECK(lev.labels[k][a.v] == lev.labels[k][e.to]);
      if (l >= 0) CHECK(lev.labels[l][a.v] != lev.labels[l][e.to]);
    }

  BipartitionLevels again = bipartition_split(inst, cfg, 42);
  CHECK(again.labels == lev.labels);
  CHECK(again.edge_level == lev.edge_level);
}

TEST_CASE("general reduction colors non-bipartite instances properly") {
  Instance inst = gen_general(60, 26, GeneralModel::union_of_matchings, 8);
  ReductionConfig cfg = ReductionConfig::make(ReductionConfig::Preset::desk, inst.n, inst.delta);
  ColorResult res = color_general(inst, cfg, small_ensemble(800), 3);
  check_color_accounting(inst, res);
  CHECK(res.colors_reserved > 0);
  CHECK(!res.levels.empty());

  // Level palettes are disjoint: reservations stack below the greedy colors.
  int32_t base = 0;
  for (const LevelStats& ls : res.levels) {
    CHECK(ls.colors_reserved >= 0);
    base += ls.colors_reserved;
  }
  CHECK(base == res.colors_reserved);
}

TEST_CASE("verify_coloring flags collisions, gaps, and foreign edges") {
  Instance inst = gen_regular_bipartite(6, 3, 2, ArrivalOrder::interleaved);
  Coloring col = greedy_color(inst);
  CHECK(verify_coloring(inst, col).proper);

  Coloring collided = col;
  REQUIRE(collided.edges.size() >= 2);
  collided.edges[1].color = collided.edges[0].color;
  bool shares = collided.edges[0].u == collided.edges[1].u ||
                collided.edges[0].v == collided.edges[1].v ||
                collided.edges[0].u == collided.edges[1].v ||
                collided.edges[0].v == collided.edges[1].u;
  VerifyReport rep = verify_coloring(inst, collided);
  if (shares) {
    CHECK(!rep.proper);
    CHECK(!rep.detail.empty());
  }

  Coloring missing = col;
  missing.edges.pop_back();
  rep = verify_coloring(inst, missing);
  CHECK(!rep.covers);

  Coloring foreign = col;
  foreign.edges.push_back({0, 2, 99});
  rep = verify_coloring(inst, foreign);
  CHECK(!rep.covers);
}
