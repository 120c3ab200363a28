// Command-line harness: generators, rounding, coloring, verification, and
// diagnostics behind stable file interfaces. Every run can record a manifest;
// `rerun` re-executes a manifest's config and checks the outputs match
// byte for byte.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "oec/oec.h"

using nlohmann::ordered_json;

namespace {

struct CliError {
  int code;
  std::string what;
};

int exit_code(oec_status s) {
  switch (s) {
    case OEC_OK: return 0;
    case OEC_E_BAD_INPUT:
    case OEC_E_UNSUPPORTED: return 2;
    case OEC_E_INVARIANT:
    case OEC_E_INTERNAL: return 1;
  }
  return 1;
}

void check(oec_status s) {
  if (s != OEC_OK) throw CliError{exit_code(s), oec_last_error()};
}

// Adopts a string returned by the library.
std::string take(char* s) {
  std::string out = s ? s : "";
  oec_string_free(s);
  return out;
}

struct InstanceHandle {
  oec_instance* h = nullptr;
  ~InstanceHandle() { oec_instance_free(h); }
};

struct RoundHandle {
  oec_round* h = nullptr;
  ~RoundHandle() { oec_round_free(h); }
};

struct ColoringHandle {
  oec_coloring* h = nullptr;
  ~ColoringHandle() { oec_coloring_free(h); }
};

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{2, "cannot open " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError{2, "cannot write " + path};
  out << content;
  if (!out) throw CliError{1, "short write to " + path};
}

// One produced artifact: a named payload plus where it was (or would be)
// written. rerun recomputes payloads and compares digests without writing.
struct Output {
  std::string name;
  std::string path;
  std::string content;
};

struct Produced {
  std::vector<Output> outputs;
  ordered_json results;
};

struct Input {
  std::string name;
  std::string path;
  std::string content;
};

uint64_t u64_field(const ordered_json& j, const char* key) {
  return j.at(key).get<uint64_t>();
}

std::string str_field(const ordered_json& j, const char* key, const std::string& dflt = "") {
  auto it = j.find(key);
  return it == j.end() ? dflt : it->get<std::string>();
}

InstanceHandle load_instance(const std::string& content) {
  InstanceHandle inst;
  check(oec_instance_parse(content.c_str(), &inst.h));
  return inst;
}

void require_bipartite_if(const ordered_json& cfg, const InstanceHandle& inst) {
  auto it = cfg.find("require_bipartite");
  if (it == cfg.end() || !it->get<bool>()) return;
  int32_t bip = 0;
  check(oec_instance_bipartite(inst.h, &bip));
  if (!bip)
    throw CliError{2, "instance is not bipartite and --require-bipartite was given"};
}

Produced run_gen(const ordered_json& cfg, const std::vector<Input>&) {
  InstanceHandle inst;
  std::string kind = cfg.at("kind").get<std::string>();
  if (kind == "regular") {
    int32_t n = cfg.at("n").get<int32_t>();
    if (n <= 0 || n % 2 != 0) throw CliError{2, "regular generator needs even n > 0"};
    check(oec_instance_gen_regular(n / 2, cfg.at("delta").get<int32_t>(),
                                   u64_field(cfg, "seed"),
                                   cfg.at("order").get<std::string>().c_str(), &inst.h));
  } else {
    check(oec_instance_gen_general(cfg.at("n").get<int32_t>(),
                                   cfg.at("delta").get<int32_t>(),
                                   cfg.at("model").get<std::string>().c_str(),
                                   u64_field(cfg, "seed"), &inst.h));
  }
  char* s = nullptr;
  check(oec_instance_jsonl(inst.h, &s));
  Produced p;
  p.outputs.push_back({"instance", str_field(cfg, "out"), take(s)});
  check(oec_instance_info_json(inst.h, &s));
  p.results = ordered_json::parse(take(s));
  return p;
}

Produced run_round(const ordered_json& cfg, const std::vector<Input>& inputs) {
  InstanceHandle inst = load_instance(inputs.at(0).content);
  require_bipartite_if(cfg, inst);
  std::string backend = cfg.at("backend").get<std::string>();
  int64_t replicas = cfg.at("replicas").get<int64_t>();
  int32_t exact_cap = cfg.at("exact_cap").get<int32_t>();
  int64_t trials = cfg.at("trials").get<int64_t>();
  uint64_t seed = u64_field(cfg, "seed");
  std::string format = cfg.at("format").get<std::string>();

  RoundHandle r;
  check(oec_round_run(inst.h, backend.c_str(), replicas, exact_cap, seed, &r.h));
  char* s = nullptr;
  Produced p;

  // Per-edge table: raw calibration when no trials were asked for, else the
  // marginal estimates from fresh replays of the same frozen schedule.
  std::string table;
  if (trials > 0) {
    check(oec_diag_marginals(inst.h, backend.c_str(), replicas, exact_cap, trials, seed,
                             format.c_str(), &s));
    table = take(s);
  } else if (format == "csv") {
    check(oec_round_schedule_csv(r.h, &s));
    table = take(s);
  } else {
    check(oec_diag_marginals(inst.h, backend.c_str(), replicas, exact_cap, 0, seed,
                             format.c_str(), &s));
    table = take(s);
  }
  p.outputs.push_back({"table", str_field(cfg, "out"), std::move(table)});

  check(oec_round_matching_json(r.h, &s));
  p.outputs.push_back({"matching", str_field(cfg, "matching_out"), take(s)});

  check(oec_round_summary_json(r.h, &s));
  std::string summary = take(s);
  p.outputs.push_back({"summary", str_field(cfg, "summary_out"), summary});
  p.results = ordered_json::parse(summary);
  return p;
}

Produced run_color(const ordered_json& cfg, const std::vector<Input>& inputs) {
  InstanceHandle inst = load_instance(inputs.at(0).content);
  require_bipartite_if(cfg, inst);
  std::string algo = cfg.at("algo").get<std::string>();
  std::string preset = cfg.at("preset").get<std::string>();
  std::string backend = cfg.at("backend").get<std::string>();
  int64_t replicas = cfg.at("replicas").get<int64_t>();
  std::vector<uint64_t> seeds = cfg.at("seeds").get<std::vector<uint64_t>>();
  if (seeds.empty()) throw CliError{2, "need at least one seed"};

  Produced p;
  ordered_json per_seed = ordered_json::array();
  double ratio_sum = 0;
  for (size_t i = 0; i < seeds.size(); ++i) {
    ColoringHandle col;
    check(oec_color_run(inst.h, algo.c_str(), preset.c_str(), backend.c_str(), replicas,
                        seeds[i], &col.h));
    char* s = nullptr;
    check(oec_verify_coloring_json(inst.h, col.h, &s));
    ordered_json verify = ordered_json::parse(take(s));
    ordered_json row;
    row["seed"] = seeds[i];
    row["palette"] = verify.at("palette");
    row["ratio"] = verify.at("ratio");
    row["proper"] = verify.at("proper");
    row["covers"] = verify.at("covers");
    per_seed.push_back(row);
    ratio_sum += verify.at("ratio").get<double>();
    if (i == 0) {
      check(oec_coloring_csv(col.h, &s));
      p.outputs.push_back({"coloring", str_field(cfg, "out"), take(s)});
      check(oec_coloring_report_json(col.h, &s));
      p.outputs.push_back({"report", str_field(cfg, "report_out"), take(s)});
    }
  }
  p.results["per_seed"] = per_seed;
  p.results["mean_ratio"] = ratio_sum / static_cast<double>(seeds.size());
  return p;
}

Produced run_verify(const ordered_json& cfg, const std::vector<Input>& inputs) {
  InstanceHandle inst = load_instance(inputs.at(0).content);
  const Input& col_in = inputs.at(1);
  std::string format = col_in.path.size() > 5 &&
                               col_in.path.compare(col_in.path.size() - 5, 5, ".json") == 0
                           ? "json"
                           : "csv";
  ColoringHandle col;
  check(oec_coloring_parse(col_in.content.c_str(), format.c_str(), &col.h));
  char* s = nullptr;
  check(oec_verify_coloring_json(inst.h, col.h, &s));
  std::string verify = take(s);
  Produced p;
  p.outputs.push_back({"verify", str_field(cfg, "out"), verify});
  p.results = ordered_json::parse(verify);
  if (!p.results.at("proper").get<bool>() || !p.results.at("covers").get<bool>())
    throw CliError{1, "coloring fails verification: " +
                          p.results.at("detail").get<std::string>()};
  return p;
}

Produced run_diag(const ordered_json& cfg, const std::vector<Input>& inputs) {
  InstanceHandle inst = load_instance(inputs.at(0).content);
  std::string what = cfg.at("what").get<std::string>();
  std::string backend = cfg.at("backend").get<std::string>();
  int64_t replicas = cfg.at("replicas").get<int64_t>();
  int32_t exact_cap = cfg.at("exact_cap").get<int32_t>();
  int64_t trials = cfg.at("trials").get<int64_t>();
  uint64_t seed = u64_field(cfg, "seed");
  std::string format = cfg.at("format").get<std::string>();

  char* s = nullptr;
  if (what == "marginals") {
    check(oec_diag_marginals(inst.h, backend.c_str(), replicas, exact_cap, trials, seed,
                             format.c_str(), &s));
  } else if (what == "covariances") {
    check(oec_diag_covariances(inst.h, cfg.at("probe").get<std::string>().c_str(),
                               backend.c_str(), replicas, exact_cap, trials, seed,
                               format.c_str(), &s));
  } else {
    check(oec_diag_concentration(inst.h, cfg.at("preset").get<std::string>().c_str(),
                                 backend.c_str(), replicas, exact_cap, trials,
                                 cfg.at("phase_trials").get<int64_t>(), seed,
                                 format.c_str(), &s));
  }
  std::string report = take(s);
  Produced p;
  p.results["report_fnv64"] = hex64(fnv1a64(report));
  p.outputs.push_back({"report", str_field(cfg, "out"), std::move(report)});
  return p;
}

Produced run_command(const std::string& command, const ordered_json& cfg,
                     const std::vector<Input>& inputs) {
  if (command == "gen") return run_gen(cfg, inputs);
  if (command == "round") return run_round(cfg, inputs);
  if (command == "color") return run_color(cfg, inputs);
  if (command == "verify") return run_verify(cfg, inputs);
  if (command == "diag") return run_diag(cfg, inputs);
  throw CliError{2, "unknown command '" + command + "' in manifest"};
}

std::vector<Input> gather_inputs(const std::string& command, const ordered_json& cfg) {
  std::vector<Input> inputs;
  if (command == "gen") return inputs;
  std::string inst = cfg.at("instance").get<std::string>();
  inputs.push_back({"instance", inst, slurp(inst)});
  if (command == "verify") {
    std::string col = cfg.at("coloring").get<std::string>();
    inputs.push_back({"coloring", col, slurp(col)});
  }
  return inputs;
}

// Runs a subcommand end to end: reads inputs, produces outputs, writes them,
// and optionally records the manifest.
int execute(const std::string& command, const ordered_json& cfg,
            const std::string& manifest_path) {
  auto t0 = std::chrono::steady_clock::now();
  std::vector<Input> inputs = gather_inputs(command, cfg);
  Produced p = run_command(command, cfg, inputs);
  for (const Output& o : p.outputs) spill(o.path, o.content);
  double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();

  if (!manifest_path.empty()) {
    ordered_json m;
    m["tool"] = "oec";
    m["version"] = oec_version();
    m["command"] = command;
    m["config"] = cfg;
    ordered_json ins = ordered_json::array();
    for (const Input& in : inputs) {
      ordered_json row;
      row["name"] = in.name;
      row["path"] = in.path;
      row["fnv64"] = hex64(fnv1a64(in.content));
      ins.push_back(row);
    }
    m["inputs"] = ins;
    ordered_json outs = ordered_json::array();
    for (const Output& o : p.outputs) {
      ordered_json row;
      row["name"] = o.name;
      row["path"] = o.path.empty() ? "-" : o.path;
      row["bytes"] = o.content.size();
      row["fnv64"] = hex64(fnv1a64(o.content));
      outs.push_back(row);
    }
    m["outputs"] = outs;
    m["results"] = p.results;
    m["rng"] = {{"kind", "philox4x32-10"}, {"stream_layout", "fixed-tag substreams"}};
    m["wall_clock_ms"] = ms;
    spill(manifest_path, m.dump(2) + "\n");
  }
  return 0;
}

// Re-executes a manifest's config in memory and compares digests and results.
// Nothing is rewritten; wall clock is informational and never compared.
int rerun(const std::string& manifest_path) {
  ordered_json m = ordered_json::parse(slurp(manifest_path));
  std::string command = m.at("command").get<std::string>();
  const ordered_json& cfg = m.at("config");

  ordered_json report;
  report["manifest"] = manifest_path;
  report["command"] = command;
  bool ok = true;
  if (std::string v = m.at("version").get<std::string>(); v != oec_version()) {
    report["version_mismatch"] = {{"recorded", v}, {"current", oec_version()}};
    ok = false;
  }

  std::vector<Input> inputs = gather_inputs(command, cfg);
  ordered_json input_rows = ordered_json::array();
  for (const Input& in : inputs) {
    std::string digest = hex64(fnv1a64(in.content));
    std::string recorded;
    for (const ordered_json& row : m.at("inputs"))
      if (row.at("name") == in.name) recorded = row.at("fnv64").get<std::string>();
    ordered_json row;
    row["name"] = in.name;
    row["recorded"] = recorded;
    row["current"] = digest;
    row["match"] = digest == recorded;
    input_rows.push_back(row);
    if (digest != recorded)
      throw CliError{2, "input " + in.name + " no longer matches the manifest digest"};
  }
  report["inputs"] = input_rows;

  Produced p = run_command(command, cfg, inputs);
  ordered_json output_rows = ordered_json::array();
  for (const Output& o : p.outputs) {
    std::string digest = hex64(fnv1a64(o.content));
    std::string recorded;
    for (const ordered_json& row : m.at("outputs"))
      if (row.at("name") == o.name) recorded = row.at("fnv64").get<std::string>();
    bool match = digest == recorded;
    ok = ok && match;
    ordered_json row;
    row["name"] = o.name;
    row["recorded"] = recorded;
    row["current"] = digest;
    row["match"] = match;
    output_rows.push_back(row);
  }
  report["outputs"] = output_rows;
  bool results_match = p.results == m.at("results");
  ok = ok && results_match;
  report["results_match"] = results_match;
  report["reproduced"] = ok;
  std::cout << report.dump(2) << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online edge coloring toolkit"};
  app.require_subcommand(1);

  uint64_t seed = 1;
  std::string out, format = "csv", manifest;
  app.add_option("--seed", seed, "root seed")->capture_default_str();
  app.add_option("--out", out, "primary output path ('-' = stdout)");
  app.add_option("--format", format, "table format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--manifest", manifest, "write a run manifest here");

  // gen
  CLI::App* gen = app.add_subcommand("gen", "generate an instance");
  gen->require_subcommand(1);
  int32_t gen_n = 0, gen_delta = 0;
  std::string gen_order = "interleaved", gen_model = "union_of_matchings";
  CLI::App* gen_reg = gen->add_subcommand("regular", "delta-regular bipartite");
  gen_reg->add_option("--n", gen_n, "total vertices (even)")->required();
  gen_reg->add_option("--delta", gen_delta, "degree")->required();
  gen_reg->add_option("--order", gen_order, "arrival order")
      ->check(CLI::IsMember({"interleaved", "one_sided", "random_order"}))
      ->capture_default_str();
  CLI::App* gen_gen = gen->add_subcommand("general", "general graph");
  gen_gen->add_option("--n", gen_n, "vertices")->required();
  gen_gen->add_option("--delta", gen_delta, "max degree")->required();
  gen_gen->add_option("--model", gen_model, "generator model")
      ->check(CLI::IsMember({"erdos_renyi", "union_of_matchings"}))
      ->capture_default_str();

  // round
  std::string instance_path, backend = "ensemble";
  int64_t replicas = 0, trials = 0, phase_trials = 0;
  int32_t exact_cap = 0;
  bool require_bip = false;
  std::string matching_out, summary_out, report_out;
  CLI::App* round = app.add_subcommand("round", "round a fractional matching online");
  round->add_option("--instance", instance_path, "instance file")->required();
  round->add_option("--backend", backend, "calibration backend")
      ->check(CLI::IsMember({"exact", "ensemble"}))
      ->capture_default_str();
  round->add_option("--replicas", replicas, "ensemble replicas (0 = default)");
  round->add_option("--exact-cap", exact_cap, "exact backend vertex cap (0 = default)");
  round->add_option("--trials", trials, "fresh replays for the per-edge table");
  round->add_flag("--require-bipartite", require_bip, "refuse non-bipartite inputs");
  round->add_option("--matching-out", matching_out, "matching output path");
  round->add_option("--summary-out", summary_out, "summary output path");

  // color
  std::string algo = "general", preset = "desk";
  std::vector<uint64_t> seeds;
  CLI::App* color = app.add_subcommand("color", "edge-color an instance online");
  color->add_option("--instance", instance_path, "instance file")->required();
  color->add_option("--algo", algo, "coloring algorithm")
      ->check(CLI::IsMember({"greedy", "matchings", "general"}))
      ->capture_default_str();
  color->add_option("--preset", preset, "parameter preset")
      ->check(CLI::IsMember({"paper", "desk"}))
      ->capture_default_str();
  color->add_option("--backend", backend, "rounding backend for the passes")
      ->check(CLI::IsMember({"exact", "ensemble"}));
  color->add_option("--replicas", replicas, "ensemble replicas (0 = default)");
  color->add_option("--seeds", seeds, "seed list; first seed's coloring is written");
  color->add_flag("--require-bipartite", require_bip, "refuse non-bipartite inputs");
  color->add_option("--report-out", report_out, "run report output path");

  // verify
  std::string coloring_path;
  CLI::App* verify = app.add_subcommand("verify", "check a coloring against an instance");
  verify->add_option("--instance", instance_path, "instance file")->required();
  verify->add_option("--coloring", coloring_path, "coloring file (csv or json)")
      ->required();

  // diag
  std::string probe = "all";
  CLI::App* diag = app.add_subcommand("diag", "statistical reports");
  diag->require_subcommand(1);
  CLI::App* diag_marg = diag->add_subcommand("marginals", "per-edge match marginals");
  CLI::App* diag_cov = diag->add_subcommand("covariances", "free-status covariances");
  CLI::App* diag_conc = diag->add_subcommand("concentration", "bipartition tails");
  for (CLI::App* d : {diag_marg, diag_cov, diag_conc}) {
    d->add_option("--instance", instance_path, "instance file")->required();
    d->add_option("--backend", backend, "calibration backend")
        ->check(CLI::IsMember({"exact", "ensemble"}));
    d->add_option("--replicas", replicas, "ensemble replicas (0 = default)");
    d->add_option("--exact-cap", exact_cap, "exact backend vertex cap (0 = default)");
    d->add_option("--trials", trials, "replay trials");
  }
  diag_cov->add_option("--probe", probe, "probe selection")
      ->check(CLI::IsMember({"all", "worst"}))
      ->capture_default_str();
  diag_conc->add_option("--preset", preset, "parameter preset")
      ->check(CLI::IsMember({"paper", "desk"}));
  diag_conc->add_option("--phase-trials", phase_trials, "coloring-phase trials");

  // rerun
  std::string rerun_manifest;
  CLI::App* rr = app.add_subcommand("rerun", "re-execute a manifest and compare");
  rr->add_option("--manifest", rerun_manifest, "manifest file")->required();

  // Global flags may appear after the subcommand.
  for (CLI::App* s :
       {gen, gen_reg, gen_gen, round, color, verify, diag, diag_marg, diag_cov, diag_conc, rr})
    s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (rr->parsed()) return rerun(rerun_manifest);

    ordered_json cfg;
    std::string command;
    if (gen->parsed()) {
      command = "gen";
      cfg["kind"] = gen_reg->parsed() ? "regular" : "general";
      cfg["n"] = gen_n;
      cfg["delta"] = gen_delta;
      if (gen_reg->parsed())
        cfg["order"] = gen_order;
      else
        cfg["model"] = gen_model;
      cfg["seed"] = seed;
      cfg["out"] = out;
    } else if (round->parsed()) {
      command = "round";
      cfg["instance"] = instance_path;
      cfg["backend"] = backend;
      cfg["replicas"] = replicas;
      cfg["exact_cap"] = exact_cap;
      cfg["trials"] = trials;
      cfg["require_bipartite"] = require_bip;
      cfg["seed"] = seed;
      cfg["format"] = format;
      cfg["out"] = out;
      cfg["matching_out"] = matching_out;
      cfg["summary_out"] = summary_out;
    } else if (color->parsed()) {
      command = "color";
      cfg["instance"] = instance_path;
      cfg["algo"] = algo;
      cfg["preset"] = preset;
      cfg["backend"] = backend;
      cfg["replicas"] = replicas;
      if (seeds.empty()) seeds.push_back(seed);
      cfg["seeds"] = seeds;
      cfg["require_bipartite"] = require_bip;
      cfg["out"] = out;
      cfg["report_out"] = report_out;
    } else if (verify->parsed()) {
      command = "verify";
      cfg["instance"] = instance_path;
      cfg["coloring"] = coloring_path;
      cfg["out"] = out;
    } else if (diag->parsed()) {
      command = "diag";
      cfg["what"] = diag_marg->parsed()   ? "marginals"
                    : diag_cov->parsed() ? "covariances"
                                         : "concentration";
      cfg["instance"] = instance_path;
      cfg["backend"] = backend;
      cfg["replicas"] = replicas;
      cfg["exact_cap"] = exact_cap;
      cfg["trials"] = trials;
      if (diag_cov->parsed()) cfg["probe"] = probe;
      if (diag_conc->parsed()) {
        cfg["preset"] = preset;
        cfg["phase_trials"] = phase_trials;
      }
      cfg["seed"] = seed;
      cfg["format"] = format;
      cfg["out"] = out;
    }
    return execute(command, cfg, manifest);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
