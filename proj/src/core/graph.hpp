#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace oec {

using VertexId = int32_t;
inline constexpr VertexId kNil = -1;

struct RevealedEdge {
  VertexId to = kNil;  // earlier endpoint, always < the arriving vertex
  double x = 0;        // fractional value carried by the edge
};

struct Arrival {
  VertexId v = kNil;
  std::vector<RevealedEdge> edges;  // sorted by `to`, no duplicates
};

// Vertex ids double as arrival ranks: arrivals[i].v == i. Both n and delta
// are declared up front; edges only ever appear on the later endpoint's
// arrival line.
struct Instance {
  int32_t n = 0;
  int32_t delta = 0;
  std::vector<Arrival> arrivals;
  std::vector<int8_t> sides;  // per-vertex 1 or 2; empty when unlabeled

  bool has_sides() const { return !sides.empty(); }
  int64_t edge_count() const;
  std::vector<int32_t> degrees() const;
  std::vector<double> fractional_degrees() const;
};

struct Violation {
  std::string what;
  VertexId v = kNil;
  VertexId u = kNil;
};

std::vector<Violation> validate(const Instance& inst);

// Throws Error{invariant} listing the first violations when the instance is
// not clean.
void require_valid(const Instance& inst);

enum class ArrivalOrder { interleaved, one_sided, random_order };
enum class GeneralModel { erdos_renyi, union_of_matchings };

// Delta-regular bipartite instance with x = 1/delta on every edge. The graph
// is a union of delta disjoint shift matchings under a seeded relabeling, so
// it is simple and exactly regular for any delta <= n_per_side.
Instance gen_regular_bipartite(int n_per_side, int delta, uint64_t seed, ArrivalOrder order);

// General instance with max degree <= delta and x = 1/delta.
// union_of_matchings is exactly delta-regular when n is even.
Instance gen_general(int n, int delta, GeneralModel model, uint64_t seed);

void set_uniform_x(Instance& inst);

// Two-coloring by BFS; empty when some component contains an odd cycle.
// Labels use the same 1/2 convention as Instance::sides.
std::vector<int8_t> bipartite_labels(const Instance& inst);

struct Edge {
  VertexId u = kNil, v = kNil;  // u < v
  bool operator==(const Edge&) const = default;
  auto operator<=>(const Edge&) const = default;
};

struct Matching {
  std::vector<Edge> edges;
};

bool is_matching(const Matching& m);
bool matching_in_instance(const Instance& inst, const Matching& m);

struct ColoredEdge {
  VertexId u = kNil, v = kNil;  // u < v
  int32_t color = -1;
};

struct Coloring {
  std::vector<ColoredEdge> edges;
  int32_t palette() const;  // distinct colors actually used
};

const char* to_string(ArrivalOrder order);
const char* to_string(GeneralModel model);
bool arrival_order_from_string(const std::string& s, ArrivalOrder* out);
bool general_model_from_string(const std::string& s, GeneralModel* out);

}  // namespace oec
