#ifndef SUMEVAL_H
#define SUMEVAL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Measurement level for [`sumeval_krippendorff_alpha`].
 */
typedef enum SumevalLevel {
  SUMEVAL_LEVEL_NOMINAL = 0,
  SUMEVAL_LEVEL_ORDINAL = 1,
} SumevalLevel;

/**
 * Result code of every fallible call.
 */
typedef enum SumevalStatus {
  SUMEVAL_STATUS_OK = 0,
  /**
   * Null pointer, bad UTF-8 or malformed JSON argument.
   */
  SUMEVAL_STATUS_INVALID_ARGUMENT = 1,
  SUMEVAL_STATUS_INVALID_CONFIG = 2,
  SUMEVAL_STATUS_INVALID_VALUE = 3,
  SUMEVAL_STATUS_DEGENERATE_INPUT = 4,
  SUMEVAL_STATUS_INSUFFICIENT_DATA = 5,
  /**
   * Backend unreachable, timed out or answered with an error status.
   */
  SUMEVAL_STATUS_BACKEND = 6,
  SUMEVAL_STATUS_REPLAY_MISS = 7,
  SUMEVAL_STATUS_MALFORMED_RESPONSE = 8,
  SUMEVAL_STATUS_NO_PARSABLE_QA = 9,
  SUMEVAL_STATUS_EMPTY_QUESTION_SET = 10,
  SUMEVAL_STATUS_REFINEMENT = 11,
  SUMEVAL_STATUS_IO = 12,
  SUMEVAL_STATUS_PANIC = 13,
  SUMEVAL_STATUS_OTHER = 14,
} SumevalStatus;

/**
 * LLM gateway: backend, replay cache and concurrency limit.
 */
typedef struct SumevalGateway SumevalGateway;

/**
 * One evaluation result.
 */
typedef struct SumevalReport SumevalReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *sumeval_last_error(void);

/**
 * Library version as a static string.
 */
const char *sumeval_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 */
void sumeval_string_free(char *s);

/**
 * 1.0 on a case-insensitive exact match, else Jaccard overlap of token sets.
 */
enum SumevalStatus sumeval_empm_similarity(const char *a, const char *b, double *out);

/**
 * Unigram F1 of `candidate` against `reference`.
 */
enum SumevalStatus sumeval_rouge1_f1(const char *candidate, const char *reference, double *out);

/**
 * Mean of the similarities that exceed `tau`, counting the rest as zero.
 */
enum SumevalStatus sumeval_mean_gated(const double *similarities,
                                      size_t n,
                                      double tau,
                                      double *out);

/**
 * Kendall tau-b between two score vectors of length `n`.
 */
enum SumevalStatus sumeval_kendall_tau_b(const double *x, const double *y, size_t n, double *out);

/**
 * Two-sided permutation p-value of tau-b. Exact for small `n`, otherwise
 * Monte Carlo with `iterations` draws seeded by `seed`.
 */
enum SumevalStatus sumeval_permutation_pvalue(const double *x,
                                              const double *y,
                                              size_t n,
                                              size_t iterations,
                                              uint64_t seed,
                                              double *out);

/**
 * Krippendorff's alpha over a row-major `units` x `raters` table. NaN marks
 * a missing rating. `level` is a [`SumevalLevel`] value.
 */
enum SumevalStatus sumeval_krippendorff_alpha(const double *ratings,
                                              size_t units,
                                              size_t raters,
                                              uint32_t level,
                                              double *out);

/**
 * Creates a gateway. `base_url` and `model` fall back to the library
 * defaults when null. `cache_dir` may be null. With `strict_replay` set,
 * every request must be served from `cache_dir` and no network call is made.
 */
enum SumevalStatus sumeval_gateway_new(const char *base_url,
                                       const char *model,
                                       const char *cache_dir,
                                       bool strict_replay,
                                       size_t max_in_flight,
                                       struct SumevalGateway **out);

/**
 * Releases a gateway. Null is ignored.
 */
void sumeval_gateway_free(struct SumevalGateway *gateway);

/**
 * Scores `summary` against `document`. `config_json` is a JSON object of
 * evaluation settings to override, or null for the defaults.
 */
enum SumevalStatus sumeval_evaluate(const struct SumevalGateway *gateway,
                                    const char *config_json,
                                    const char *document,
                                    const char *summary,
                                    struct SumevalReport **out);

/**
 * Releases a report. Null is ignored.
 */
void sumeval_report_free(struct SumevalReport *report);

/**
 * Coverage score of a report, or NaN for a null handle.
 */
double sumeval_report_coverage(const struct SumevalReport *report);

/**
 * Consistency score of a report, or NaN for a null handle.
 */
double sumeval_report_consistency(const struct SumevalReport *report);

/**
 * Number of unanswered document questions in the coverage feedback.
 */
size_t sumeval_report_coverage_feedback_len(const struct SumevalReport *report);

/**
 * Number of inconsistent facts in the consistency feedback.
 */
size_t sumeval_report_consistency_feedback_len(const struct SumevalReport *report);

/**
 * Full report, feedback and diagnostics included, as JSON.
 */
enum SumevalStatus sumeval_report_to_json(const struct SumevalReport *report, char **out);

/**
 * Runs the evaluate and revise loop and writes the trace as JSON. On a
 * failure part way through, the partial trace is still written to `out`
 * when it holds at least one report, and the error status is returned.
 */
enum SumevalStatus sumeval_refine(const struct SumevalGateway *gateway,
                                  const char *eval_config_json,
                                  const char *refine_config_json,
                                  const char *document,
                                  const char *summary,
                                  char **out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SUMEVAL_H */
