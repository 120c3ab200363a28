#ifndef OEC_H
#define OEC_H

/* C interface to the online edge-coloring library.
 *
 * Every function returns an oec_status; results come back through out
 * parameters. Strings returned through char** are heap-allocated and must be
 * released with oec_string_free. Handles are opaque and must be released
 * with their matching _free function. On any status other than OEC_OK the
 * out parameters are untouched and oec_last_error() describes the failure
 * for the calling thread.
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum oec_status {
  OEC_OK = 0,
  OEC_E_INVARIANT = 1,   /* input or result violates a documented invariant */
  OEC_E_BAD_INPUT = 2,   /* malformed input, unknown name, null argument */
  OEC_E_UNSUPPORTED = 3, /* valid request outside this build's limits */
  OEC_E_INTERNAL = 4
} oec_status;

typedef struct oec_instance oec_instance;
typedef struct oec_round oec_round;
typedef struct oec_coloring oec_coloring;

const char* oec_version(void);

/* Message for the most recent failing call on this thread. */
const char* oec_last_error(void);

void oec_string_free(char* s);

/* {"c", "half_plus_c", "low_degree_threshold", "residual"} */
oec_status oec_constants_json(char** out);

/* --- instances ------------------------------------------------------- */

/* JSON Lines text: header {"n","delta","bipartite_sides"} then one
 * {"v","edges"} line per arrival. */
oec_status oec_instance_parse(const char* jsonl_text, oec_instance** out);

/* order: "interleaved" | "one_sided" | "random" */
oec_status oec_instance_gen_regular(int32_t per_side, int32_t delta, uint64_t seed,
                                    const char* order, oec_instance** out);

/* model: "erdos_renyi" | "union_of_matchings" */
oec_status oec_instance_gen_general(int32_t n, int32_t delta, const char* model,
                                    uint64_t seed, oec_instance** out);

oec_status oec_instance_set_uniform_x(oec_instance* inst);

/* {"n","delta","edges","bipartite","max_fractional_degree","violations"} */
oec_status oec_instance_info_json(const oec_instance* inst, char** out);

oec_status oec_instance_jsonl(const oec_instance* inst, char** out);

/* 1 when a bipartite 2-coloring is declared or found, else 0. */
oec_status oec_instance_bipartite(const oec_instance* inst, int32_t* out);

void oec_instance_free(oec_instance* inst);

/* --- online rounding -------------------------------------------------- */

/* backend: "exact" | "ensemble". replicas applies to the ensemble backend;
 * exact_cap bounds the vertex count accepted by the exact backend. */
oec_status oec_round_run(const oec_instance* inst, const char* backend, int64_t replicas,
                         int32_t exact_cap, uint64_t seed, oec_round** out);

/* Matching realized by the reported replica: {"edges":[[u,v],...]} */
oec_status oec_round_matching_json(const oec_round* r, char** out);

/* Per-edge calibration table (x, branch, g, q1, J, p, marginal, ...). */
oec_status oec_round_schedule_csv(const oec_round* r, char** out);

oec_status oec_round_summary_json(const oec_round* r, char** out);

void oec_round_free(oec_round* r);

/* --- edge coloring ----------------------------------------------------*/

/* algo: "greedy" | "matchings" | "general"; preset: "paper" | "desk".
 * backend/replicas control the rounding passes inside the reductions. */
oec_status oec_color_run(const oec_instance* inst, const char* algo, const char* preset,
                         const char* backend, int64_t replicas, uint64_t seed,
                         oec_coloring** out);

/* "u,v,color" rows, one per edge. */
oec_status oec_coloring_csv(const oec_coloring* c, char** out);

/* Run report: palette, ratio, properness, reserved colors, level and phase
 * breakdown. Empty object for colorings that were parsed, not run. */
oec_status oec_coloring_report_json(const oec_coloring* c, char** out);

/* format: "csv" | "json" */
oec_status oec_coloring_parse(const char* text, const char* format, oec_coloring** out);

oec_status oec_verify_coloring_json(const oec_instance* inst, const oec_coloring* c,
                                    char** out);

void oec_coloring_free(oec_coloring* c);

/* --- diagnostics ------------------------------------------------------ */

/* format: "csv" | "json". trials == 0 reports the backend's own marginals;
 * trials > 0 adds estimates from fresh replays of the frozen schedule. */
oec_status oec_diag_marginals(const oec_instance* inst, const char* backend,
                              int64_t replicas, int32_t exact_cap, int64_t trials,
                              uint64_t seed, const char* format, char** out);

/* probe: "all" | "worst" */
oec_status oec_diag_covariances(const oec_instance* inst, const char* probe,
                                const char* backend, int64_t replicas, int32_t exact_cap,
                                int64_t trials, uint64_t seed, const char* format,
                                char** out);

/* preset: "paper" | "desk". phase_trials may be 0 to skip the coloring
 * phase tails. */
oec_status oec_diag_concentration(const oec_instance* inst, const char* preset,
                                  const char* backend, int64_t replicas,
                                  int32_t exact_cap, int64_t trials, int64_t phase_trials,
                                  uint64_t seed, const char* format, char** out);

#ifdef __cplusplus
}
#endif

#endif /* OEC_H */
