#ifndef RETROFIT_CQ_H
#define RETROFIT_CQ_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Input syntax for [`rcq_statements_parse`].
 */
typedef enum RcqFormat {
  RCQ_FORMAT_N_TRIPLES = 0,
  RCQ_FORMAT_TURTLE = 1,
} RcqFormat;

/**
 * Result of every fallible call.
 */
typedef enum RcqStatus {
  RCQ_STATUS_OK = 0,
  RCQ_STATUS_NULL_POINTER = 1,
  RCQ_STATUS_INVALID_UTF8 = 2,
  RCQ_STATUS_INVALID_ARGUMENT = 3,
  RCQ_STATUS_OUT_OF_RANGE = 4,
  RCQ_STATUS_PARSE = 5,
  RCQ_STATUS_IO = 6,
  RCQ_STATUS_GENERATION = 7,
  RCQ_STATUS_MATCHING = 8,
  RCQ_STATUS_METRICS = 9,
  RCQ_STATUS_PANIC = 10,
} RcqStatus;

/**
 * Filtration strictness for the pattern-based checks.
 */
typedef enum RcqStrictness {
  RCQ_STRICTNESS_OFF = 0,
  RCQ_STRICTNESS_LENIENT = 1,
  RCQ_STRICTNESS_STRICT = 2,
} RcqStrictness;

/**
 * Opaque ordered list of questions.
 */
typedef struct RcqQuestionList RcqQuestionList;

/**
 * Opaque set of extracted statements.
 */
typedef struct RcqStatementSet RcqStatementSet;

typedef struct RcqIngestCounts {
  size_t parsed;
  size_t excluded_blank;
  size_t excluded_opaque;
  size_t excluded_duplicate;
  size_t kept;
} RcqIngestCounts;

typedef struct RcqMatchSummary {
  size_t validated;
  size_t matched_design;
  size_t n_candidates;
  size_t n_design;
} RcqMatchSummary;

typedef struct RcqMetrics {
  double precision;
  double recall;
  double f1;
  /**
   * Non-zero when precision had no candidates to divide by.
   */
  uint8_t precision_undefined;
  uint8_t recall_undefined;
} RcqMetrics;

typedef struct RcqStats {
  size_t n_unmatched;
  uint32_t pct_unmatched;
  double mean;
  /**
   * NaN when there is a single observation.
   */
  double std;
  size_t min;
  double p25;
  double p50;
  size_t max;
} RcqStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. Borrowed:
 * valid until the next call into this library on the same thread.
 */
const char *rcq_last_error_message(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void rcq_string_free(char *s);

/**
 * Library version as a static string.
 */
const char *rcq_version(void);

/**
 * Parses an in-memory document and keeps statements with readable labels.
 *
 * # Safety
 * `text` and `source_id` must be NUL-terminated; `out` must be writable.
 */
enum RcqStatus rcq_statements_parse(const char *text,
                                    enum RcqFormat format,
                                    const char *source_id,
                                    struct RcqStatementSet **out);

/**
 * Loads a `.nt` or `.ttl` file.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` must be writable.
 */
enum RcqStatus rcq_statements_load(const char *path, struct RcqStatementSet **out);

/**
 * # Safety
 * `set` must be NULL or a live handle; it is invalid afterwards.
 */
void rcq_statements_free(struct RcqStatementSet *set);

/**
 * Number of kept statements; 0 for NULL.
 *
 * # Safety
 * `set` must be NULL or a live handle.
 */
size_t rcq_statements_len(const struct RcqStatementSet *set);

/**
 * # Safety
 * `set` must be a live handle and `out` writable.
 */
enum RcqStatus rcq_statements_counts(const struct RcqStatementSet *set,
                                     struct RcqIngestCounts *out);

/**
 * Writes the statement as N-Triples (one line, no trailing newline).
 *
 * # Safety
 * `set` must be a live handle and `out` writable. Free the result with
 * [`rcq_string_free`].
 */
enum RcqStatus rcq_statement_ntriples(const struct RcqStatementSet *set, size_t index, char **out);

/**
 * Renders a built-in prompt ("P1", "P2" or "P3") for one statement.
 *
 * # Safety
 * `set` must be a live handle, `template` NUL-terminated and `out`
 * writable. Free the result with [`rcq_string_free`].
 */
enum RcqStatus rcq_render_prompt(const struct RcqStatementSet *set,
                                 size_t index,
                                 const char *template_,
                                 char **out);

struct RcqQuestionList *rcq_questions_new(void);

/**
 * # Safety
 * `list` must be NULL or a live handle; it is invalid afterwards.
 */
void rcq_questions_free(struct RcqQuestionList *list);

/**
 * Appends a copy of `question`.
 *
 * # Safety
 * `list` must be a live handle and `question` NUL-terminated.
 */
enum RcqStatus rcq_questions_push(struct RcqQuestionList *list, const char *question);

/**
 * # Safety
 * `list` must be NULL or a live handle.
 */
size_t rcq_questions_len(const struct RcqQuestionList *list);

/**
 * Borrowed question text, or NULL when out of range.
 *
 * # Safety
 * `list` must be NULL or a live handle. The pointer is valid until the
 * list is modified or freed.
 */
const char *rcq_questions_get(const struct RcqQuestionList *list, size_t index);

/**
 * Questions from the offline mock provider for one statement. The same
 * (seed, model, template, statement) always yields the same list.
 *
 * # Safety
 * `set` must be a live handle, `template` and `model` NUL-terminated and
 * `out` writable.
 */
enum RcqStatus rcq_mock_generate(const struct RcqStatementSet *set,
                                 size_t index,
                                 const char *template_,
                                 const char *model,
                                 uint64_t seed,
                                 struct RcqQuestionList **out);

/**
 * Filters `input` and returns the kept questions in order.
 * `dedup_threshold` is a token-sort ratio in 0..=100.
 *
 * # Safety
 * `input` must be a live handle and `kept` writable.
 */
enum RcqStatus rcq_filter(const struct RcqQuestionList *input,
                          enum RcqStrictness strictness,
                          uint32_t dedup_threshold,
                          struct RcqQuestionList **kept);

/**
 * Matches candidates against design questions with the lexical backend.
 *
 * # Safety
 * Both lists must be live handles and `out` writable.
 */
enum RcqStatus rcq_match(const struct RcqQuestionList *candidates,
                         const struct RcqQuestionList *design,
                         double threshold,
                         struct RcqMatchSummary *out);

/**
 * Precision, recall and F1 from counts.
 *
 * # Safety
 * `out` must be writable.
 */
enum RcqStatus rcq_metrics_from_counts(size_t validated,
                                       size_t n_candidates,
                                       size_t unmatched_design,
                                       size_t n_design,
                                       struct RcqMetrics *out);

/**
 * Descriptive statistics over word counts of unmatched design questions.
 * Writes nothing and returns `Ok` with `*has_row = 0` when `len` is 0.
 *
 * # Safety
 * `word_counts` must point at `len` values (or be NULL when `len` is 0);
 * `out` and `has_row` must be writable.
 */
enum RcqStatus rcq_unmatched_stats(const size_t *word_counts,
                                   size_t len,
                                   size_t n_design,
                                   struct RcqStats *out,
                                   uint8_t *has_row);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RETROFIT_CQ_H */
