#include "jsonl.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "errors.hpp"
#include "json.hpp"

namespace oec {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void parse_fail(int line, const std::string& what) {
  throw bad_input_error("instance line " + std::to_string(line) + ": " + what);
}

json parse_json_line(const std::string& text, int line) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) parse_fail(line, "not valid JSON");
  return j;
}

}  // namespace

Instance parse_instance(std::istream& in) {
  Instance inst;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  VertexId next_v = 0;

  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = parse_json_line(line, lineno);
    if (!j.is_object()) parse_fail(lineno, "expected a JSON object");

    if (!have_header) {
      if (!j.contains("n") || !j.contains("delta")) parse_fail(lineno, "header needs n and delta");
      if (!j["n"].is_number_integer() || !j["delta"].is_number_integer())
        parse_fail(lineno, "n and delta must be integers");
      inst.n = j["n"].get<int32_t>();
      inst.delta = j["delta"].get<int32_t>();
      if (inst.n < 0 || inst.delta < 0) parse_fail(lineno, "n and delta must be non-negative");
      if (j.contains("bipartite_sides") && !j["bipartite_sides"].is_null()) {
        const auto& sides = j["bipartite_sides"];
        if (!sides.is_array() || static_cast<int32_t>(sides.size()) != inst.n)
          parse_fail(lineno, "bipartite_sides must be null or an array of length n");
        inst.sides.reserve(inst.n);
        for (const auto& s : sides) {
          if (!s.is_number_integer()) parse_fail(lineno, "side labels must be integers");
          int v = s.get<int>();
          if (v < 0 || v > 2) parse_fail(lineno, "side labels must be 0, 1 or 2");
          inst.sides.push_back(static_cast<int8_t>(v));
        }
      }
      inst.arrivals.reserve(inst.n);
      have_header = true;
      continue;
    }

    if (!j.contains("v") || !j["v"].is_number_integer()) parse_fail(lineno, "arrival needs integer v");
    Arrival a;
    a.v = j["v"].get<VertexId>();
    if (a.v != next_v) parse_fail(lineno, "arrivals must appear in order 0..n-1");
    ++next_v;
    if (j.contains("edges")) {
      if (!j["edges"].is_array()) parse_fail(lineno, "edges must be an array");
      for (const auto& e : j["edges"]) {
        if (!e.is_array() || e.empty() || e.size() > 2 || !e[0].is_number_integer())
          parse_fail(lineno, "edge must be [u] or [u, x]");
        RevealedEdge re;
        re.to = e[0].get<VertexId>();
        if (e.size() == 2) {
          if (!e[1].is_number()) parse_fail(lineno, "edge value must be a number");
          re.x = e[1].get<double>();
        } else {
          if (inst.delta < 1) parse_fail(lineno, "implicit x needs delta >= 1");
          re.x = 1.0 / inst.delta;
        }
        a.edges.push_back(re);
      }
    }
    std::sort(a.edges.begin(), a.edges.end(),
              [](const RevealedEdge& l, const RevealedEdge& r) { return l.to < r.to; });
    for (size_t i = 1; i < a.edges.size(); ++i)
      if (a.edges[i].to == a.edges[i - 1].to) parse_fail(lineno, "duplicate neighbor");
    inst.arrivals.push_back(std::move(a));
  }

  if (!have_header) throw bad_input_error("instance file is empty");
  if (next_v != inst.n) throw bad_input_error("instance file ends before all arrivals are listed");
  return inst;
}

Instance parse_instance_text(const std::string& text) {
  std::istringstream in(text);
  return parse_instance(in);
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw bad_input_error("cannot open " + path);
  return parse_instance(in);
}

std::string instance_to_jsonl(const Instance& inst, bool implicit_x) {
  std::ostringstream out;
  ordered_json header;
  header["n"] = inst.n;
  header["delta"] = inst.delta;
  if (inst.has_sides()) {
    auto sides = json::array();
    for (int8_t s : inst.sides) sides.push_back(static_cast<int>(s));
    header["bipartite_sides"] = std::move(sides);
  } else {
    header["bipartite_sides"] = nullptr;
  }
  out << header.dump() << '\n';

  double uniform = inst.delta >= 1 ? 1.0 / inst.delta : 0.0;
  for (const auto& a : inst.arrivals) {
    ordered_json row;
    row["v"] = a.v;
    auto edges = json::array();
    for (const auto& e : a.edges) {
      if (implicit_x && inst.delta >= 1 && e.x == uniform)
        edges.push_back(json::array({e.to}));
      else
        edges.push_back(json::array({e.to, e.x}));
    }
    row["edges"] = std::move(edges);
    out << row.dump() << '\n';
  }
  return out.str();
}

void save_instance(const Instance& inst, const std::string& path, bool implicit_x) {
  write_file(path, instance_to_jsonl(inst, implicit_x));
}

std::string matching_to_json(const Matching& m) {
  ordered_json j;
  j["size"] = m.edges.size();
  auto edges = json::array();
  for (const auto& e : m.edges) edges.push_back(json::array({e.u, e.v}));
  j["edges"] = std::move(edges);
  return j.dump() + "\n";
}

Matching matching_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("edges") || !j["edges"].is_array())
    throw bad_input_error("matching: expected {\"edges\": [[u, v], ...]}");
  Matching m;
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2) throw bad_input_error("matching: edge must be [u, v]");
    Edge edge{e[0].get<VertexId>(), e[1].get<VertexId>()};
    if (edge.u > edge.v) std::swap(edge.u, edge.v);
    m.edges.push_back(edge);
  }
  return m;
}

std::string coloring_to_csv(const Coloring& col) {
  std::ostringstream out;
  out << "u,v,color\n";
  for (const auto& e : col.edges) out << e.u << ',' << e.v << ',' << e.color << '\n';
  return out.str();
}

std::string coloring_to_json(const Coloring& col) {
  ordered_json j;
  auto edges = json::array();
  for (const auto& e : col.edges) edges.push_back(json::array({e.u, e.v, e.color}));
  j["edges"] = std::move(edges);
  j["palette"] = col.palette();
  return j.dump() + "\n";
}

Coloring coloring_from_csv(std::istream& in) {
  Coloring col;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line == "u,v,color") continue;
    ColoredEdge e;
    const char* begin = line.data();
    const char* end = begin + line.size();
    auto field = [&](int32_t* out_val) {
      auto [ptr, ec] = std::from_chars(begin, end, *out_val);
      if (ec != std::errc{}) throw bad_input_error("coloring csv line " + std::to_string(lineno));
      begin = ptr;
      if (begin != end) {
        if (*begin != ',') throw bad_input_error("coloring csv line " + std::to_string(lineno));
        ++begin;
      }
    };
    field(&e.u);
    field(&e.v);
    field(&e.color);
    if (e.u > e.v) std::swap(e.u, e.v);
    col.edges.push_back(e);
  }
  return col;
}

Coloring coloring_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("edges") || !j["edges"].is_array())
    throw bad_input_error("coloring: expected {\"edges\": [[u, v, color], ...]}");
  Coloring col;
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 3) throw bad_input_error("coloring: edge must be [u, v, color]");
    ColoredEdge ce{e[0].get<VertexId>(), e[1].get<VertexId>(), e[2].get<int32_t>()};
    if (ce.u > ce.v) std::swap(ce.u, ce.v);
    col.edges.push_back(ce);
  }
  return col;
}

Coloring load_coloring(const std::string& path) {
  std::string text = read_file(path);
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0)
    return coloring_from_json(text);
  std::istringstream in(text);
  return coloring_from_csv(in);
}

std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw bad_input_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bad_input_error("cannot write " + path);
  out << content;
  if (!out) throw bad_input_error("write failed for " + path);
}

}  // namespace oec
