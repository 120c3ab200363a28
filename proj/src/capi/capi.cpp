#include "oec/oec.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <sstream>
#include <string>

#include "coloring.hpp"
#include "constants.hpp"
#include "diagnostics.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "json.hpp"
#include "jsonl.hpp"
#include "rounding.hpp"
#include "version.hpp"

using nlohmann::ordered_json;

struct oec_instance {
  oec::Instance inst;
};

struct oec_round {
  oec::RoundResult result;
  oec::BackendOptions opts;
  uint64_t seed = 0;
};

struct oec_coloring {
  oec::Coloring col;
  std::string report;  // empty for parsed colorings
};

namespace {

thread_local std::string g_error;

oec_status fail(oec_status s, const std::string& what) {
  g_error = what;
  return s;
}

oec_status map_code(oec::Error::Code c) {
  switch (c) {
    case oec::Error::Code::invariant: return OEC_E_INVARIANT;
    case oec::Error::Code::bad_input: return OEC_E_BAD_INPUT;
    case oec::Error::Code::unsupported: return OEC_E_UNSUPPORTED;
    case oec::Error::Code::internal: break;
  }
  return OEC_E_INTERNAL;
}

template <typename F>
oec_status guarded(F&& f) {
  try {
    return f();
  } catch (const oec::Error& e) {
    return fail(map_code(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail(OEC_E_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

oec_status emit(const std::string& s, char** out) {
  char* dup = dup_string(s);
  if (!dup) return fail(OEC_E_INTERNAL, "out of memory");
  *out = dup;
  return OEC_OK;
}

oec_status require(bool ok, const char* what) {
  return ok ? OEC_OK : fail(OEC_E_BAD_INPUT, what);
}

oec::BackendOptions make_backend(const char* backend, int64_t replicas, int32_t exact_cap) {
  oec::BackendOptions opts;
  if (!oec::backend_kind_from_string(backend, &opts.kind))
    throw oec::bad_input_error(std::string("unknown backend '") + backend + "'");
  if (replicas < 0) throw oec::bad_input_error("replicas must be nonnegative");
  if (replicas > 0) {
    if (replicas > INT32_MAX) throw oec::bad_input_error("replicas too large");
    opts.replicas = static_cast<int32_t>(replicas);
  }
  if (exact_cap < 0) throw oec::bad_input_error("exact cap must be nonnegative");
  if (exact_cap > 0) opts.exact_cap = exact_cap;
  return opts;
}

oec::ReductionConfig::Preset parse_preset(const char* preset) {
  oec::ReductionConfig::Preset p;
  if (!oec::preset_from_string(preset, &p))
    throw oec::bad_input_error(std::string("unknown preset '") + preset + "'");
  return p;
}

enum class Format { csv, json };

Format parse_format(const char* format) {
  std::string f = format;
  if (f == "csv") return Format::csv;
  if (f == "json") return Format::json;
  throw oec::bad_input_error("unknown format '" + f + "'");
}

}  // namespace

extern "C" {

const char* oec_version(void) { return oec::kVersion; }

const char* oec_last_error(void) { return g_error.c_str(); }

void oec_string_free(char* s) { std::free(s); }

oec_status oec_constants_json(char** out) {
  if (oec_status s = require(out, "null out"); s != OEC_OK) return s;
  return guarded([&] {
    const oec::Constants& k = oec::constants();
    ordered_json j;
    j["c"] = k.c;
    j["half_plus_c"] = k.half_plus_c;
    j["half_minus_c"] = k.half_minus_c;
    j["low_degree_threshold"] = k.low_degree_threshold;
    j["residual"] = oec::calibration_margin(k.c);
    return emit(j.dump(2) + "\n", out);
  });
}

oec_status oec_instance_parse(const char* jsonl_text, oec_instance** out) {
  if (oec_status s = require(jsonl_text && out, "null argument"); s != OEC_OK) return s;
  return guarded([&] {
    auto h = std::make_unique<oec_instance>();
    h->inst = oec::parse_instance_text(jsonl_text);
    *out = h.release();
    return OEC_OK;
  });
}

oec_status oec_instance_gen_regular(int32_t per_side, int32_t delta, uint64_t seed,
                                    const char* order, oec_instance** out) {
  if (oec_status s = require(order && out, "null argument"); s != OEC_OK) return s;
  return guarded([&] {
    oec::ArrivalOrder ord;
    if (!oec::arrival_order_from_string(order, &ord))
      throw oec::bad_input_error(std::string("unknown arrival order '") + order + "'");
    auto h = std::make_unique<oec_instance>();
    h->inst = oec::gen_regular_bipartite(per_side, delta, seed, ord);
    *out = h.release();
    return OEC_OK;
  });
}

oec_status oec_instance_gen_general(int32_t n, int32_t delta, const char* model,
                                    uint64_t seed, oec_instance** out) {
  if (oec_status s = require(model && out, "null argument"); s != OEC_OK) return s;
  return guarded([&] {
    oec::GeneralModel m;
    if (!oec::general_model_from_string(model, &m))
      throw oec::bad_input_error(std::string("unknown model '") + model + "'");
    auto h = std::make_unique<oec_instance>();
    h->inst = oec::gen_general(n, delta, m, seed);
    *out = h.release();
    return OEC_OK;
  });
}

oec_status oec_instance_set_uniform_x(oec_instance* inst) {
  if (oec_status s = require(inst, "null instance"); s != OEC_OK) return s;
  return guarded([&] {
    oec::set_uniform_x(inst->inst);
    return OEC_OK;
  });
}

oec_status oec_instance_info_json(const oec_instance* inst, char** out) {
  if (oec_status s = require(inst && out, "null argument"); s != OEC_OK) return s;
  return guarded([&] {
    const oec::Instance& g = inst->inst;
    double max_fdeg = 0;
    for (double d : g.fractional_degrees()) max_fdeg = std::max(max_fdeg, d);
    ordered_json j;
    j["n"] = g.n;
    j["delta"] = g.delta;
    j["edges"] = g.edge_count();
    j["bipartite"] = g.has_sides() || !oec::bipartite_labels(g).empty();
    j["max_fractional_degree"] = max_fdeg;
    ordered_json viol = ordered_json::array();
    for (const oec::Violation& v : oec::validate(g)) {
      ordered_json row;
      row["what"] = v.what;
      row["v"] = v.v;
      row["u"] = v.u;
      viol.push_back(row);
    }
    j["violations"] = viol;
    return emit(j.dump(2) + "\n", out);
  });
}

oec_status oec_instance_jsonl(const oec_instance* inst, char** out) {
  if (oec_status s = require(inst && out, "null argument"); s != OEC_OK) return s;
  return guarded([&] { return emit(oec::instance_to_jsonl(inst->inst), out); });
}

oec_status oec_instance_bipartite(const oec_instance* inst, int32_t* out) {
  if (oec_status s = require(inst && out, "null argument"); s != OEC_OK) return s;
  return guarded([&] {
    *out = inst->inst.has_sides() || !oec::bipartite_labels(inst->inst).empty() ? 1 : 0;
    return OEC_OK;
  });
}

void oec_instance_free(oec_instance* inst) { delete inst; }

oec_status oec_round_run(const oec_instance* inst, const char* backend, int64_t replicas,
                         int32_t exact_cap, uint64_t seed, oec_round** out) {
  if (oec_status s = require(inst && backend && out, "null argument"); s != OEC_OK) return s;
  return guarded([&] {
    auto h = std::make_unique<oec_round>();
    h->opts = make_backend(backend, replicas, exact_cap);
    h->seed = seed;
    h->result = oec::round_online(inst->inst, h->opts, seed);
    *out = h.release();
    return OEC_OK;
  });
}

oec_status oec_round_matching_json(const oec_round* r, char** out) {
  if (oec_status s = require(r && out, "null argument"); s != OEC_OK) return s;
  return guarded([&] { return emit(oec::matching_to_json(r->result.matching), out); });
}

oec_status oec_round_schedule_csv(const oec_round* r, char** out) {
  if (oec_status s = require(r && out, "null argument"); s != OEC_OK) return s;
  return guarded([&] { return emit(oec::schedule_to_csv(r->result.schedule), out); });
}

oec_status oec_round_summary_json(const oec_round* r, char** out) {
  if (oec_status s = require(r && out, "null argument"); s != OEC_OK) return s;
  return guarded([&] {
    const oec::RoundResult& rr = r->result;
    int64_t edges = 0, low = 0, high = 0;
    for (const oec::ArrivalPlan& plan : rr.schedule) {
      edges += static_cast<int64_t>(plan.edges.size());
      if (plan.edges.empty()) continue;
      (plan.branch == oec::Branch::low_degree ? low : high) += 1;
    }
    ordered_json j;
    j["n"] = rr.n;
    j["edges"] = edges;
    j["backend"] = oec::to_string(r->opts.kind);
    if (r->opts.kind == oec::BackendOptions::Kind::ensemble)
      j["replicas"] = r->opts.replicas;
    j["seed"] = r->seed;
    j["matched_edges"] = rr.matching.edges.size();
    j["low_branch_arrivals"] = low;
    j["high_branch_arrivals"] = high;
    j["deficiency_total"] = rr.deficiency_total;
    return emit(j.dump(2) + "\n", out);
  });
}

void oec_round_free(oec_round* r) { delete r; }

oec_status oec_color_run(const oec_instance* inst, const char* algo, const char* preset,
                         const char* backend, int64_t replicas, uint64_t seed,
                         oec_coloring** out) {
  if (oec_status s = require(inst && algo && preset && backend && out, "null argument");
      s != OEC_OK)
    return s;
  return guarded([&] {
    const oec::Instance& g = inst->inst;
    auto h = std::make_unique<oec_coloring>();
    oec::ReductionConfig::Preset p = parse_preset(preset);
    std::string a = algo;
    if (a == "greedy") {
      oec::ColorResult res;
      res.coloring = oec::greedy_color(g);
      res.n = g.n;
      res.delta = g.delta;
      res.palette = res.coloring.palette();
      res.ratio = g.delta > 0 ? static_cast<double>(res.palette) / g.delta : 0.0;
      res.greedy_colored = static_cast<int64_t>(res.coloring.edges.size());
      h->report = oec::color_report_json(res, oec::verify_coloring(g, res.coloring));
      h->col = std::move(res.coloring);
    } else if (a == "matchings" || a == "general") {
      oec::ReductionConfig cfg = oec::ReductionConfig::make(p, g.n, g.delta);
      oec::BackendOptions opts = make_backend(backend, replicas, 0);
      oec::ColorResult res = a == "matchings" ? oec::color_via_matchings(g, cfg, opts, seed)
                                              : oec::color_general(g, cfg, opts, seed);
      h->col = res.coloring;
      h->report = oec::color_report_json(res, oec::verify_coloring(g, h->col));
    } else {
      throw oec::bad_input_error("unknown algorithm '" + a + "'");
    }
    *out = h.release();
    return OEC_OK;
  });
}

oec_status oec_coloring_csv(const oec_coloring* c, char** out) {
  if (oec_status s = require(c && out, "null argument"); s != OEC_OK) return s;
  return guarded([&] { return emit(oec::coloring_to_csv(c->col), out); });
}

oec_status oec_coloring_report_json(const oec_coloring* c, char** out) {
  if (oec_status s = require(c && out, "null argument"); s != OEC_OK) return s;
  return guarded([&] { return emit(c->report.empty() ? "{}\n" : c->report, out); });
}

oec_status oec_coloring_parse(const char* text, const char* format, oec_coloring** out) {
  if (oec_status s = require(text && format && out, "null argument"); s != OEC_OK) return s;
  return guarded([&] {
    auto h = std::make_unique<oec_coloring>();
    if (parse_format(format) == Format::csv) {
      std::istringstream in{std::string(text)};
      h->col = oec::coloring_from_csv(in);
    } else {
      h->col = oec::coloring_from_json(text);
    }
    *out = h.release();
    return OEC_OK;
  });
}

oec_status oec_verify_coloring_json(const oec_instance* inst, const oec_coloring* c,
                                    char** out) {
  if (oec_status s = require(inst && c && out, "null argument"); s != OEC_OK) return s;
  return guarded([&] {
    oec::VerifyReport rep = oec::verify_coloring(inst->inst, c->col);
    ordered_json j;
    j["proper"] = rep.proper;
    j["covers"] = rep.covers;
    j["palette"] = rep.palette;
    j["ratio"] = rep.ratio;
    j["detail"] = rep.detail;
    return emit(j.dump(2) + "\n", out);
  });
}

void oec_coloring_free(oec_coloring* c) { delete c; }

oec_status oec_diag_marginals(const oec_instance* inst, const char* backend,
                              int64_t replicas, int32_t exact_cap, int64_t trials,
                              uint64_t seed, const char* format, char** out) {
  if (oec_status s = require(inst && backend && format && out, "null argument");
      s != OEC_OK)
    return s;
  return guarded([&] {
    Format f = parse_format(format);
    oec::BackendOptions opts = make_backend(backend, replicas, exact_cap);
    oec::MarginalReport rep = oec::estimate_marginals(inst->inst, opts, trials, seed);
    return emit(f == Format::csv ? oec::marginal_report_csv(rep)
                                 : oec::marginal_report_json(rep),
                out);
  });
}

oec_status oec_diag_covariances(const oec_instance* inst, const char* probe,
                                const char* backend, int64_t replicas, int32_t exact_cap,
                                int64_t trials, uint64_t seed, const char* format,
                                char** out) {
  if (oec_status s = require(inst && probe && backend && format && out, "null argument");
      s != OEC_OK)
    return s;
  return guarded([&] {
    Format f = parse_format(format);
    std::string p = probe;
    std::vector<oec::VertexId> probes;
    if (p == "all") {
      probes = oec::covariance_probes(inst->inst);
    } else if (p == "worst") {
      oec::VertexId w = oec::worst_covariance_probe(inst->inst);
      if (w != oec::kNil) probes.push_back(w);
    } else {
      throw oec::bad_input_error("unknown probe mode '" + p + "'");
    }
    oec::BackendOptions opts = make_backend(backend, replicas, exact_cap);
    oec::CovarianceReport rep =
        oec::estimate_covariances(inst->inst, probes, opts, trials, seed);
    return emit(f == Format::csv ? oec::covariance_report_csv(rep)
                                 : oec::covariance_report_json(rep),
                out);
  });
}

oec_status oec_diag_concentration(const oec_instance* inst, const char* preset,
                                  const char* backend, int64_t replicas,
                                  int32_t exact_cap, int64_t trials, int64_t phase_trials,
                                  uint64_t seed, const char* format, char** out) {
  if (oec_status s = require(inst && preset && backend && format && out, "null argument");
      s != OEC_OK)
    return s;
  return guarded([&] {
    Format f = parse_format(format);
    const oec::Instance& g = inst->inst;
    oec::ReductionConfig cfg =
        oec::ReductionConfig::make(parse_preset(preset), g.n, g.delta);
    oec::BackendOptions opts = make_backend(backend, replicas, exact_cap);
    oec::ConcentrationReport rep =
        oec::concentration_report(g, cfg, opts, trials, phase_trials, seed);
    return emit(f == Format::csv ? oec::concentration_report_csv(rep)
                                 : oec::concentration_report_json(rep),
                out);
  });
}

}  // extern "C"
