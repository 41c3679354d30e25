#ifndef FACTGPT_FACTGPT_H
#define FACTGPT_FACTGPT_H

/*
 * C interface to the claim matching and entailment toolkit.
 *
 * Records cross the boundary as UTF-8 JSON-lines text; parameters and
 * summaries as JSON objects. Every char** output is heap-allocated by the
 * library and must be released with factgpt_string_free(). Outputs are left
 * untouched when a call fails.
 *
 * A context is safe to use from several threads; its last-error slot is
 * per thread.
 */

#include <stddef.h>

#if defined(_WIN32)
#  if defined(FACTGPT_BUILDING)
#    define FACTGPT_API __declspec(dllexport)
#  else
#    define FACTGPT_API __declspec(dllimport)
#  endif
#else
#  define FACTGPT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum factgpt_status {
  FACTGPT_OK = 0,
  FACTGPT_INVALID_ARGUMENT = 1,
  FACTGPT_MALFORMED_JSON = 2,
  FACTGPT_SCHEMA_VIOLATION = 3,
  FACTGPT_EMPTY_INPUT = 4,
  FACTGPT_DUPLICATE_ID = 5,
  FACTGPT_UNKNOWN_EMBEDDER = 6,
  FACTGPT_DIMENSION_MISMATCH = 7,
  FACTGPT_EMPTY_CLAIM_STORE = 8,
  FACTGPT_EMPTY_BATCH = 9,
  FACTGPT_VALIDATION_ERROR = 10,
  FACTGPT_TOO_FEW_EXAMPLES = 11,
  FACTGPT_UNRESOLVED_CLAIM = 12,
  FACTGPT_UNPARSEABLE = 13,
  FACTGPT_EMPTY_VOTES = 14,
  FACTGPT_MISSING_GOLD = 15,
  FACTGPT_DUPLICATE_PREDICTION = 16,
  FACTGPT_UNKNOWN_JOB = 17,
  FACTGPT_NOT_FOUND = 18,
  FACTGPT_CONFLICT = 19,
  FACTGPT_IO_ERROR = 20,
  FACTGPT_AUTH_ERROR = 30,
  FACTGPT_RATE_LIMITED = 31,
  FACTGPT_PROVIDER_ERROR = 32,
  FACTGPT_TIMEOUT = 33,
  FACTGPT_INTERNAL = 99
} factgpt_status;

typedef enum factgpt_label {
  FACTGPT_LABEL_NONE = -1,
  FACTGPT_LABEL_ENTAILMENT = 0,
  FACTGPT_LABEL_NEUTRAL = 1,
  FACTGPT_LABEL_CONTRADICTION = 2
} factgpt_label;

typedef struct factgpt_context factgpt_context;
typedef struct factgpt_service factgpt_service;

FACTGPT_API const char* factgpt_version(void);
FACTGPT_API const char* factgpt_status_name(factgpt_status status);
/* Non-zero for authentication, rate-limit, provider, timeout and unknown-job errors. */
FACTGPT_API int factgpt_is_provider_failure(factgpt_status status);
FACTGPT_API void factgpt_string_free(char* s);
/* Lower-case hex SHA-256 of `size` bytes; NULL on allocation failure. */
FACTGPT_API char* factgpt_sha256_hex(const char* data, size_t size);

/* Message of the calling thread's most recent failure ("" if none). */
FACTGPT_API const char* factgpt_last_error(void);
/* {"code": "...", "status": N, "message": "...", "detail": ...} */
FACTGPT_API char* factgpt_last_error_json(void);

/*
 * options_json (all keys optional):
 *   provider            "mock" (default), "live", or a provider id such as "huggingface"
 *   api_base, api_key   fall back to FACTGPT_API_BASE / FACTGPT_API_KEY
 *   temperature_floor   overrides the provider floor table
 *   requests_per_minute, max_in_flight, max_retries,
 *   request_timeout_ms, retry_base_delay_ms, retry_max_delay_ms
 *   audit_log           path of a JSON-lines request log
 *   clock               "system" or a fixed RFC 3339 timestamp
 *   workers             default parallelism for generation/classification
 */
FACTGPT_API factgpt_status factgpt_context_create(const char* options_json, factgpt_context** out);
FACTGPT_API void factgpt_context_destroy(factgpt_context* ctx);

/*
 * kind: claims, posts, pairs, synthetic, predictions, votes, gold, finetune.
 * report_json: {"records": N, "errors": [{"line", "kind", "message"}]}.
 * Returns FACTGPT_VALIDATION_ERROR when any line fails.
 */
FACTGPT_API factgpt_status factgpt_validate_jsonl(const char* kind, const char* text, char** report_json);

/* Validates claims, fills missing ids, drops repeated ids (first wins). */
FACTGPT_API factgpt_status factgpt_ingest_claims(const char* claims_jsonl, char** out_jsonl,
                                                 char** summary_json);

/* params_json: matcher keys alpha, top_k, min_combined_score, embedder_id. */
FACTGPT_API factgpt_status factgpt_pair(factgpt_context* ctx, const char* posts_jsonl, const char* claims_jsonl,
                                        const char* params_json, char** pairs_jsonl);

/* params_json: {"model": id, "workers"?: n}. summary_json lists counts, failures, warnings. */
FACTGPT_API factgpt_status factgpt_generate(factgpt_context* ctx, const char* claims_jsonl, const char* params_json,
                                            char** synthetic_jsonl, char** summary_json);

/* params_json: {"train_fraction"?: 0.8, "seed"?: 0}. */
FACTGPT_API factgpt_status factgpt_split(const char* synthetic_jsonl, const char* params_json, char** train_jsonl,
                                         char** validation_jsonl);

FACTGPT_API factgpt_status factgpt_export_finetune(const char* synthetic_jsonl, const char* claims_jsonl,
                                                   char** finetune_jsonl);

/* params_json: {"base_model": id, "epochs"?: 3}. job_json is a FineTuneJob object. */
FACTGPT_API factgpt_status factgpt_finetune_submit(factgpt_context* ctx, const char* finetune_jsonl,
                                                   const char* params_json, char** job_json);
FACTGPT_API factgpt_status factgpt_finetune_poll(factgpt_context* ctx, const char* job_id, char** job_json);
/* params_json: {"poll_interval_ms"?: 5000, "max_polls"?: 10000}. */
FACTGPT_API factgpt_status factgpt_finetune_wait(factgpt_context* ctx, const char* job_json, const char* params_json,
                                                 char** final_job_json);

/*
 * Resumable generate -> split -> export -> submit -> poll run under work_dir.
 * params_json: {"generator_model", "base_model", "work_dir", "seed"?,
 *   "train_fraction"?, "epochs"?, "wait"?: true, "poll_interval_ms"?}.
 * result_json: {"job": {...}, "manifest": {...}, "skipped_stages": [...]}.
 */
FACTGPT_API factgpt_status factgpt_finetune_pipeline(factgpt_context* ctx, const char* claims_jsonl,
                                                     const char* params_json, char** result_json);

/*
 * params_json: {"model": id, "parallelism"?: n, "checkpoint"?: path,
 *   "checkpoint_every"?: 1, "max_tokens"?: n}.
 * summary_json: {"requested", "resumed", "unlabeled", "errors": [...]}.
 * Provider failures still produce predictions (label null) and return
 * FACTGPT_OK; callers inspect summary_json.errors.
 */
FACTGPT_API factgpt_status factgpt_classify(factgpt_context* ctx, const char* pairs_jsonl, const char* posts_jsonl,
                                            const char* claims_jsonl, const char* params_json,
                                            char** predictions_jsonl, char** summary_json);

/* Majority vote per VoteSet; distribution_markdown may be NULL. */
FACTGPT_API factgpt_status factgpt_aggregate(const char* votes_jsonl, char** gold_jsonl,
                                             char** distribution_markdown);

/* params_json: {"ties"?: "exclude"|"credit_either", "unparseable"?: "count_wrong"|"exclude"}. */
FACTGPT_API factgpt_status factgpt_evaluate(const char* gold_jsonl, const char* predictions_jsonl,
                                            const char* params_json, char** report_json);

/* reports_json: [{"model", "train_set_from"?, "report": EvalReport}]. */
FACTGPT_API factgpt_status factgpt_render_report(const char* reports_json, char** markdown);

/* Returns FACTGPT_UNPARSEABLE (label NONE) when no label token is present. */
FACTGPT_API factgpt_status factgpt_parse_label(const char* raw_response, factgpt_label* label, int* ambiguous);

/*
 * config_json: host, port, store_dir, ui_dir, cors_origin, api_base,
 * classify_model, matcher{...}.
 */
FACTGPT_API factgpt_status factgpt_service_create(factgpt_context* ctx, const char* config_json,
                                                  factgpt_service** out);
/* Blocks until factgpt_service_stop() is called from another thread. */
FACTGPT_API factgpt_status factgpt_service_listen(factgpt_service* svc);
FACTGPT_API void factgpt_service_stop(factgpt_service* svc);
FACTGPT_API int factgpt_service_bound_port(const factgpt_service* svc);
/* Routes one request without a socket; response_json: {"status", "content_type", "body"}. */
FACTGPT_API factgpt_status factgpt_service_handle(factgpt_service* svc, const char* method, const char* path,
                                                  const char* query_json, const char* body, char** response_json);
FACTGPT_API void factgpt_service_destroy(factgpt_service* svc);

#ifdef __cplusplus
}
#endif

#endif
