#include <cstring>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "oec/oec.h"

using nlohmann::json;

namespace {

// Adopts a library-allocated string.
std::string take(char* s) {
  REQUIRE(s != nullptr);
  std::string out(s);
  oec_string_free(s);
  return out;
}

struct Inst {
  oec_instance* h = nullptr;
  ~Inst() { oec_instance_free(h); }
};

}  // namespace

TEST_CASE("constants come back as json with the derived fields") {
  char* s = nullptr;
  REQUIRE(oec_constants_json(&s) == OEC_OK);
  json j = json::parse(take(s));
  double c = j.at("c").get<double>();
  CHECK(c > 0.027);
  CHECK(c < 0.03);
  CHECK(j.at("half_plus_c").get<double>() == 0.5 + c);
  CHECK(j.at("half_minus_c").get<double>() == 0.5 - c);
  CHECK(j.at("low_degree_threshold").get<double>() ==
        doctest::Approx((0.5 - c) / (0.5 + c)).epsilon(1e-15));
  CHECK(j.at("residual").get<double>() >= 0);
  CHECK(std::strlen(oec_version()) > 0);
}

TEST_CASE("null arguments are rejected with a message") {
  CHECK(oec_constants_json(nullptr) == OEC_E_BAD_INPUT);
  CHECK(std::strlen(oec_last_error()) > 0);
  CHECK(oec_instance_parse(nullptr, nullptr) == OEC_E_BAD_INPUT);
  oec_instance* h = nullptr;
  CHECK(oec_instance_gen_regular(4, 2, 1, nullptr, &h) == OEC_E_BAD_INPUT);
  CHECK(h == nullptr);
  CHECK(oec_round_run(nullptr, "exact", 0, 14, 1, nullptr) == OEC_E_BAD_INPUT);
  CHECK(oec_instance_info_json(nullptr, nullptr) == OEC_E_BAD_INPUT);
}

TEST_CASE("unknown names are rejected") {
  Inst inst;
  REQUIRE(oec_instance_gen_regular(4, 2, 1, "interleaved", &inst.h) == OEC_OK);
  oec_round* r = nullptr;
  CHECK(oec_round_run(inst.h, "quantum", 0, 14, 1, &r) == OEC_E_BAD_INPUT);
  CHECK(r == nullptr);
  oec_instance* g = nullptr;
  CHECK(oec_instance_gen_general(6, 2, "smallworld", 1, &g) == OEC_E_BAD_INPUT);
  oec_coloring* col = nullptr;
  CHECK(oec_color_run(inst.h, "rainbow", "desk", "ensemble", 100, 1, &col) == OEC_E_BAD_INPUT);
  CHECK(oec_color_run(inst.h, "greedy", "office", "ensemble", 100, 1, &col) == OEC_E_BAD_INPUT);
  char* s = nullptr;
  CHECK(oec_diag_marginals(inst.h, "exact", 0, 14, 0, 1, "yaml", &s) == OEC_E_BAD_INPUT);
  CHECK(s == nullptr);
}

TEST_CASE("exact backend over its cap reports unsupported") {
  Inst inst;
  REQUIRE(oec_instance_gen_regular(10, 2, 1, "interleaved", &inst.h) == OEC_OK);
  oec_round* r = nullptr;
  CHECK(oec_round_run(inst.h, "exact", 0, 14, 1, &r) == OEC_E_UNSUPPORTED);
  CHECK(std::string(oec_last_error()).find("exact") != std::string::npos);
  // A raised cap admits the same instance.
  REQUIRE(oec_round_run(inst.h, "exact", 0, 20, 1, &r) == OEC_OK);
  oec_round_free(r);
}

TEST_CASE("malformed input text maps to bad input, bad structure to invariant") {
  oec_instance* h = nullptr;
  CHECK(oec_instance_parse("{\"n\": \"many\"}", &h) == OEC_E_BAD_INPUT);
  CHECK(h == nullptr);

  // Structurally broken: fractional degree above one.
  const char* text =
      "{\"n\":2,\"delta\":1}\n"
      "{\"v\":0,\"edges\":[]}\n"
      "{\"v\":1,\"edges\":[[0,1.5]]}\n";
  Inst inst;
  REQUIRE(oec_instance_parse(text, &inst.h) == OEC_OK);
  oec_round* r = nullptr;
  CHECK(oec_round_run(inst.h, "exact", 0, 14, 1, &r) == OEC_E_INVARIANT);
  CHECK(std::strlen(oec_last_error()) > 0);
}

TEST_CASE("generated instances survive a jsonl round trip") {
  Inst inst;
  REQUIRE(oec_instance_gen_regular(5, 3, 8, "random", &inst.h) == OEC_OK);
  char* s = nullptr;
  REQUIRE(oec_instance_jsonl(inst.h, &s) == OEC_OK);
  std::string text = take(s);
  Inst back;
  REQUIRE(oec_instance_parse(text.c_str(), &back.h) == OEC_OK);
  REQUIRE(oec_instance_jsonl(back.h, &s) == OEC_OK);
  CHECK(take(s) == text);

  int32_t bip = -1;
  REQUIRE(oec_instance_bipartite(inst.h, &bip) == OEC_OK);
  CHECK(bip == 1);

  REQUIRE(oec_instance_info_json(inst.h, &s) == OEC_OK);
  json info = json::parse(take(s));
  CHECK(info.at("n") == 10);
  CHECK(info.at("delta") == 3);
  CHECK(info.at("edges") == 15);
  CHECK(info.at("bipartite") == true);
  CHECK(info.at("violations").empty());
  CHECK(info.at("max_fractional_degree").get<double>() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("round run exposes matching, schedule, and summary") {
  Inst inst;
  REQUIRE(oec_instance_gen_regular(6, 3, 4, "interleaved", &inst.h) == OEC_OK);
  oec_round* r = nullptr;
  REQUIRE(oec_round_run(inst.h, "exact", 0, 14, 7, &r) == OEC_OK);

  char* s = nullptr;
  REQUIRE(oec_round_matching_json(r, &s) == OEC_OK);
  json m = json::parse(take(s));
  for (const auto& e : m.at("edges")) {
    REQUIRE(e.size() == 2);
    CHECK(e[0].get<int>() < e[1].get<int>());
  }

  REQUIRE(oec_round_schedule_csv(r, &s) == OEC_OK);
  std::string csv = take(s);
  CHECK(csv.rfind("u,v,x,branch,", 0) == 0);

  REQUIRE(oec_round_summary_json(r, &s) == OEC_OK);
  json sum = json::parse(take(s));
  CHECK(sum.at("backend") == "exact");
  CHECK(sum.at("n") == 12);
  CHECK(sum.at("edges") == 18);
  CHECK(sum.at("seed") == 7);
  CHECK(sum.at("matched_edges") == m.at("edges").size());
  CHECK(sum.at("deficiency_total").get<double>() == 0);
  CHECK(sum.at("low_branch_arrivals").get<int>() + sum.at("high_branch_arrivals").get<int>() <= 12);
  oec_round_free(r);
}

TEST_CASE("greedy coloring runs, verifies, and round-trips through csv") {
  Inst inst;
  REQUIRE(oec_instance_gen_regular(8, 4, 3, "interleaved", &inst.h) == OEC_OK);
  oec_coloring* col = nullptr;
  REQUIRE(oec_color_run(inst.h, "greedy", "desk", "ensemble", 500, 2, &col) == OEC_OK);

  char* s = nullptr;
  REQUIRE(oec_verify_coloring_json(inst.h, col, &s) == OEC_OK);
  json v = json::parse(take(s));
  CHECK(v.at("proper") == true);
  CHECK(v.at("covers") == true);
  int32_t palette = v.at("palette").get<int32_t>();
  CHECK(palette <= 2 * 4 - 1);

  REQUIRE(oec_coloring_report_json(col, &s) == OEC_OK);
  json rep = json::parse(take(s));
  CHECK(rep.at("palette") == palette);
  CHECK(rep.at("proper") == true);
  CHECK(rep.at("colors_reserved") == 0);

  REQUIRE(oec_coloring_csv(col, &s) == OEC_OK);
  std::string csv = take(s);
  oec_coloring_free(col);

  oec_coloring* parsed = nullptr;
  REQUIRE(oec_coloring_parse(csv.c_str(), "csv", &parsed) == OEC_OK);
  REQUIRE(oec_verify_coloring_json(inst.h, parsed, &s) == OEC_OK);
  json v2 = json::parse(take(s));
  CHECK(v2.at("palette") == palette);
  CHECK(v2.at("proper") == true);
  REQUIRE(oec_coloring_report_json(parsed, &s) == OEC_OK);
  CHECK(json::parse(take(s)).empty());
  oec_coloring_free(parsed);

  CHECK(oec_coloring_parse("u,v\n0,1\n", "csv", &parsed) == OEC_E_BAD_INPUT);
}

TEST_CASE("matching reduction through the c api stays proper") {
  Inst inst;
  REQUIRE(oec_instance_gen_regular(32, 12, 11, "interleaved", &inst.h) == OEC_OK);
  oec_coloring* col = nullptr;
  REQUIRE(oec_color_run(inst.h, "matchings", "desk", "ensemble", 600, 5, &col) == OEC_OK);
  char* s = nullptr;
  REQUIRE(oec_verify_coloring_json(inst.h, col, &s) == OEC_OK);
  json v = json::parse(take(s));
  CHECK(v.at("proper") == true);
  CHECK(v.at("covers") == true);
  REQUIRE(oec_coloring_report_json(col, &s) == OEC_OK);
  json rep = json::parse(take(s));
  CHECK(rep.at("proper") == true);
  CHECK(rep.at("colors_reserved").get<int32_t>() > 0);
  CHECK(rep.at("palette").get<int32_t>() >= rep.at("colors_reserved").get<int32_t>());
  CHECK(!rep.at("levels").empty());
  oec_coloring_free(col);
}

TEST_CASE("diagnostics come back in both formats") {
  Inst inst;
  REQUIRE(oec_instance_gen_regular(4, 3, 6, "interleaved", &inst.h) == OEC_OK);
  char* s = nullptr;
  REQUIRE(oec_diag_marginals(inst.h, "exact", 0, 14, 0, 9, "csv", &s) == OEC_OK);
  std::string csv = take(s);
  CHECK(csv.find("estimate") != std::string::npos);
  REQUIRE(oec_diag_marginals(inst.h, "exact", 0, 14, 200, 9, "json", &s) == OEC_OK);
  json m = json::parse(take(s));
  CHECK(m.at("trials") == 200);
  CHECK(m.at("rows").size() == 12);

  REQUIRE(oec_diag_covariances(inst.h, "worst", "exact", 0, 14, 500, 9, "json", &s) == OEC_OK);
  json cov = json::parse(take(s));
  CHECK(cov.at("trials") == 500);
  CHECK(!cov.at("pairs").empty());

  REQUIRE(oec_diag_concentration(inst.h, "desk", "exact", 0, 14, 50, 0, 9, "json", &s) == OEC_OK);
  json conc = json::parse(take(s));
  CHECK(conc.at("trials") == 50);
  CHECK(conc.at("exceed_freq").get<double>() >= 0);
}
