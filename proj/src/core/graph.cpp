#include "graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <utility>

#include "errors.hpp"
#include "rng.hpp"

namespace oec {

int64_t Instance::edge_count() const {
  int64_t total = 0;
  for (const auto& a : arrivals) total += static_cast<int64_t>(a.edges.size());
  return total;
}

std::vector<int32_t> Instance::degrees() const {
  std::vector<int32_t> deg(n, 0);
  for (const auto& a : arrivals)
    for (const auto& e : a.edges) {
      ++deg[a.v];
      ++deg[e.to];
    }
  return deg;
}

std::vector<double> Instance::fractional_degrees() const {
  std::vector<double> f(n, 0.0);
  for (const auto& a : arrivals)
    for (const auto& e : a.edges) {
      f[a.v] += e.x;
      f[e.to] += e.x;
    }
  return f;
}

std::vector<Violation> validate(const Instance& inst) {
  std::vector<Violation> out;
  auto add = [&](std::string what, VertexId v, VertexId u = kNil) {
    out.push_back({std::move(what), v, u});
  };

  if (inst.n < 0) add("n is negative", kNil);
  if (inst.delta < 0) add("delta is negative", kNil);
  if (static_cast<int32_t>(inst.arrivals.size()) != inst.n)
    add("arrival count differs from n", kNil);
  if (inst.has_sides() && static_cast<int32_t>(inst.sides.size()) != inst.n)
    add("side label count differs from n", kNil);
  if (!out.empty()) return out;

  if (inst.has_sides())
    for (VertexId v = 0; v < inst.n; ++v)
      if (inst.sides[v] < 0 || inst.sides[v] > 2) add("side label is not 0, 1 or 2", v);

  std::vector<int32_t> deg(inst.n, 0);
  std::vector<double> fdeg(inst.n, 0.0);
  for (VertexId i = 0; i < inst.n; ++i) {
    const Arrival& a = inst.arrivals[i];
    if (a.v != i) {
      add("arrival out of sequence", i);
      continue;
    }
    VertexId prev = kNil;
    for (const auto& e : a.edges) {
      if (e.to < 0 || e.to >= a.v) {
        add("edge endpoint does not precede its arrival", a.v, e.to);
        continue;
      }
      if (e.to <= prev) add("edge endpoints not strictly increasing", a.v, e.to);
      prev = e.to;
      if (!(e.x >= 0) || !std::isfinite(e.x)) add("edge value is negative or not finite", a.v, e.to);
      if (inst.has_sides() && inst.sides[a.v] != 0 && inst.sides[a.v] == inst.sides[e.to])
        add("edge joins two vertices on the same side", a.v, e.to);
      ++deg[a.v];
      ++deg[e.to];
      fdeg[a.v] += e.x;
      fdeg[e.to] += e.x;
    }
  }
  for (VertexId v = 0; v < inst.n; ++v) {
    if (deg[v] > inst.delta) add("degree exceeds delta", v);
    if (fdeg[v] > 1.0 + 1e-9) add("fractional degree exceeds 1", v);
  }
  return out;
}

void require_valid(const Instance& inst) {
  auto violations = validate(inst);
  if (violations.empty()) return;
  std::ostringstream msg;
  msg << "invalid instance:";
  size_t shown = std::min<size_t>(violations.size(), 4);
  for (size_t i = 0; i < shown; ++i) {
    const auto& w = violations[i];
    msg << " [" << w.what;
    if (w.v != kNil) msg << " v=" << w.v;
    if (w.u != kNil) msg << " u=" << w.u;
    msg << "]";
  }
  if (violations.size() > shown) msg << " +" << violations.size() - shown << " more";
  throw invariant_error(msg.str());
}

namespace {

// Fisher-Yates with keyed draws; slot folds the pass index so one Philox can
// shuffle several sequences.
void shuffle_ids(std::vector<VertexId>& v, const Philox& rng, uint32_t stage) {
  for (size_t i = v.size(); i > 1; --i) {
    auto j = static_cast<size_t>(rng.uniform(static_cast<uint32_t>(i - 1), stage) * static_cast<double>(i));
    if (j >= i) j = i - 1;
    std::swap(v[i - 1], v[j]);
  }
}

// Assembles the canonical form: vertex ids equal arrival ranks, every edge
// sits on its later endpoint's line, lines sorted.
Instance assemble(int n, int delta, const std::vector<std::pair<int, int>>& edges,
                  const std::vector<VertexId>& arrival_of, const std::vector<int8_t>& sides_by_label,
                  double x) {
  Instance inst;
  inst.n = n;
  inst.delta = delta;
  inst.arrivals.resize(n);
  for (VertexId i = 0; i < n; ++i) inst.arrivals[i].v = i;
  if (!sides_by_label.empty()) {
    inst.sides.assign(n, 0);
    for (int label = 0; label < n; ++label) inst.sides[arrival_of[label]] = sides_by_label[label];
  }
  for (const auto& [a, b] : edges) {
    VertexId ra = arrival_of[a], rb = arrival_of[b];
    VertexId late = std::max(ra, rb), early = std::min(ra, rb);
    inst.arrivals[late].edges.push_back({early, x});
  }
  for (auto& a : inst.arrivals)
    std::sort(a.edges.begin(), a.edges.end(),
              [](const RevealedEdge& l, const RevealedEdge& r) { return l.to < r.to; });
  return inst;
}

}  // namespace

Instance gen_regular_bipartite(int n_per_side, int delta, uint64_t seed, ArrivalOrder order) {
  if (n_per_side < 1 || delta < 1 || delta > n_per_side)
    throw bad_input_error("gen_regular_bipartite: need 1 <= delta <= n_per_side");
  int m = n_per_side;
  Philox rng(substream(seed, {kStreamGen, 1}), 0);

  // Left labels 0..m-1, right labels m..2m-1. Shift matchings over a shuffled
  // right side keep the union simple and exactly delta-regular.
  std::vector<VertexId> right(m);
  std::iota(right.begin(), right.end(), 0);
  shuffle_ids(right, rng, 0);

  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<size_t>(m) * delta);
  for (int k = 0; k < delta; ++k)
    for (int i = 0; i < m; ++i) edges.emplace_back(i, m + right[(i + k) % m]);

  std::vector<VertexId> sequence;  // arrival sequence as original labels
  sequence.reserve(2 * m);
  switch (order) {
    case ArrivalOrder::interleaved:
      for (int i = 0; i < m; ++i) {
        sequence.push_back(i);
        sequence.push_back(m + i);
      }
      break;
    case ArrivalOrder::one_sided:
      for (int i = 0; i < 2 * m; ++i) sequence.push_back(i);
      break;
    case ArrivalOrder::random_order:
      for (int i = 0; i < 2 * m; ++i) sequence.push_back(i);
      shuffle_ids(sequence, rng, 1);
      break;
  }
  std::vector<VertexId> arrival_of(2 * m);
  for (int pos = 0; pos < 2 * m; ++pos) arrival_of[sequence[pos]] = pos;

  std::vector<int8_t> sides(2 * m);
  for (int label = 0; label < 2 * m; ++label) sides[label] = label < m ? 1 : 2;

  return assemble(2 * m, delta, edges, arrival_of, sides, 1.0 / delta);
}

Instance gen_general(int n, int delta, GeneralModel model, uint64_t seed) {
  if (n < 2 || delta < 1) throw bad_input_error("gen_general: need n >= 2 and delta >= 1");
  Philox rng(substream(seed, {kStreamGen, 2}), 0);

  std::vector<VertexId> relabel(n);
  std::iota(relabel.begin(), relabel.end(), 0);
  shuffle_ids(relabel, rng, 0);

  std::vector<std::pair<int, int>> edges;
  if (model == GeneralModel::union_of_matchings) {
    // Round-robin one-factorization; odd n plays with a phantom vertex whose
    // pairs are dropped, so degrees are delta or delta-1.
    int N = n + (n % 2);
    if (delta > N - 1) throw bad_input_error("gen_general: delta too large for union_of_matchings");
    for (int r = 0; r < delta; ++r) {
      auto keep = [&](int a, int b) {
        if (a < n && b < n) edges.emplace_back(a, b);
      };
      keep(N - 1, r);
      for (int k = 1; k < N / 2; ++k) keep((r + k) % (N - 1), (r - k + (N - 1)) % (N - 1));
    }
  } else {
    if (delta >= n) throw bad_input_error("gen_general: need delta < n for erdos_renyi");
    double p = std::min(1.0, static_cast<double>(delta) / (n - 1));
    std::vector<std::pair<int, int>> candidates;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.uniform(static_cast<uint32_t>(i), 1, static_cast<uint32_t>(j)) < p)
          candidates.emplace_back(i, j);
    // Trim to the declared max degree, dropping late candidates of a shuffled
    // pass so no vertex region is favored.
    std::vector<VertexId> idx(candidates.size());
    std::iota(idx.begin(), idx.end(), 0);
    shuffle_ids(idx, rng, 2);
    std::vector<int> deg(n, 0);
    for (VertexId t : idx) {
      auto [i, j] = candidates[t];
      if (deg[i] < delta && deg[j] < delta) {
        ++deg[i];
        ++deg[j];
        edges.emplace_back(i, j);
      }
    }
  }

  std::vector<VertexId> arrival_of(n);
  for (int label = 0; label < n; ++label) arrival_of[label] = relabel[label];
  return assemble(n, delta, edges, arrival_of, {}, 1.0 / delta);
}

void set_uniform_x(Instance& inst) {
  if (inst.delta < 1) throw bad_input_error("set_uniform_x: delta must be positive");
  for (auto& a : inst.arrivals)
    for (auto& e : a.edges) e.x = 1.0 / inst.delta;
}

std::vector<int8_t> bipartite_labels(const Instance& inst) {
  std::vector<std::vector<VertexId>> adj(inst.n);
  for (const auto& a : inst.arrivals)
    for (const auto& e : a.edges) {
      adj[a.v].push_back(e.to);
      adj[e.to].push_back(a.v);
    }
  std::vector<int8_t> label(inst.n, 0);
  for (VertexId s = 0; s < inst.n; ++s) {
    if (label[s] != 0) continue;
    label[s] = 1;
    std::queue<VertexId> q;
    q.push(s);
    while (!q.empty()) {
      VertexId v = q.front();
      q.pop();
      for (VertexId w : adj[v]) {
        if (label[w] == 0) {
          label[w] = static_cast<int8_t>(3 - label[v]);
          q.push(w);
        } else if (label[w] == label[v]) {
          return {};
        }
      }
    }
  }
  return label;
}

bool is_matching(const Matching& m) {
  std::set<VertexId> seen;
  for (const auto& e : m.edges) {
    if (e.u == e.v) return false;
    if (!seen.insert(e.u).second) return false;
    if (!seen.insert(e.v).second) return false;
  }
  return true;
}

bool matching_in_instance(const Instance& inst, const Matching& m) {
  std::set<std::pair<VertexId, VertexId>> have;
  for (const auto& a : inst.arrivals)
    for (const auto& e : a.edges) have.emplace(e.to, a.v);
  for (const auto& e : m.edges) {
    VertexId lo = std::min(e.u, e.v), hi = std::max(e.u, e.v);
    if (!have.count({lo, hi})) return false;
  }
  return true;
}

int32_t Coloring::palette() const {
  std::set<int32_t> used;
  for (const auto& e : edges) used.insert(e.color);
  return static_cast<int32_t>(used.size());
}

const char* to_string(ArrivalOrder order) {
  switch (order) {
    case ArrivalOrder::interleaved: return "interleaved";
    case ArrivalOrder::one_sided: return "one_sided";
    case ArrivalOrder::random_order: return "random";
  }
  return "?";
}

const char* to_string(GeneralModel model) {
  return model == GeneralModel::erdos_renyi ? "erdos_renyi" : "union_of_matchings";
}

bool arrival_order_from_string(const std::string& s, ArrivalOrder* out) {
  if (s == "interleaved") *out = ArrivalOrder::interleaved;
  else if (s == "one_sided") *out = ArrivalOrder::one_sided;
  else if (s == "random") *out = ArrivalOrder::random_order;
  else return false;
  return true;
}

bool general_model_from_string(const std::string& s, GeneralModel* out) {
  if (s == "erdos_renyi") *out = GeneralModel::erdos_renyi;
  else if (s == "union_of_matchings") *out = GeneralModel::union_of_matchings;
  else return false;
  return true;
}

}  // namespace oec
