#ifndef PRIVACY_FRONTIER_H
#define PRIVACY_FRONTIER_H

/* Generated by cbindgen. Do not edit. */

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

/**
 * Result code of every fallible call.
 */
typedef enum PfStatus {
  PF_STATUS_OK = 0,
  PF_STATUS_NULL_POINTER = 1,
  PF_STATUS_INVALID_UTF8 = 2,
  PF_STATUS_PARSE = 3,
  PF_STATUS_INVALID_INPUT = 4,
  PF_STATUS_TOO_LARGE = 5,
  PF_STATUS_NOT_MEMBER = 6,
  PF_STATUS_INDEX_OUT_OF_RANGE = 7,
  PF_STATUS_BUFFER_TOO_SMALL = 8,
  PF_STATUS_INTERNAL = 9,
  PF_STATUS_PANIC = 10,
} PfStatus;

/**
 * The extreme posteriors of a problem.
 */
typedef struct PfEnumeration PfEnumeration;

/**
 * A parsed problem (graph, prior, budget).
 */
typedef struct PfProblem PfProblem;

/**
 * Outcome of comparing the enumeration with the vertex oracle.
 */
typedef struct PfReport PfReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the next failing call.
 */
const char *pf_last_error_message(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void pf_string_free(char *s);

/**
 * Library version, statically allocated.
 */
const char *pf_version(void);

/**
 * Parses a JSON problem description.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum PfStatus pf_problem_from_json(const char *json, struct PfProblem **out);

/**
 * # Safety
 * `p` must come from [`pf_problem_from_json`] or be null.
 */
void pf_problem_free(struct PfProblem *p);

/**
 * Number of states, or 0 for null.
 *
 * # Safety
 * `p` must be a live problem or null.
 */
size_t pf_problem_num_states(const struct PfProblem *p);

/**
 * Enumerates the extreme posteriors.
 *
 * # Safety
 * `p` must be a live problem; `out` must be writable.
 */
enum PfStatus pf_enumerate(const struct PfProblem *p, struct PfEnumeration **out);

/**
 * # Safety
 * `e` must come from [`pf_enumerate`] or be null.
 */
void pf_enumeration_free(struct PfEnumeration *e);

/**
 * Number of records (1 when the budget is degenerate), or 0 for null.
 *
 * # Safety
 * `e` must be a live enumeration or null.
 */
size_t pf_enumeration_len(const struct PfEnumeration *e);

/**
 * Number of levels of record `index`.
 *
 * # Safety
 * `e` must be a live enumeration; `out` must be writable.
 */
enum PfStatus pf_enumeration_num_levels(const struct PfEnumeration *e, size_t index, size_t *out);

/**
 * Copies record `index` as doubles into `buf`, which must hold one entry per state.
 *
 * # Safety
 * `e` must be a live enumeration; `buf` must have room for `len` doubles.
 */
enum PfStatus pf_enumeration_posterior_f64(const struct PfEnumeration *e,
                                           size_t index,
                                           double *buf,
                                           size_t len);

/**
 * Record `index` as exact fractions, comma-separated. Free with [`pf_string_free`].
 *
 * # Safety
 * `e` must be a live enumeration; `out` must be writable.
 */
enum PfStatus pf_enumeration_posterior_exact(const struct PfEnumeration *e,
                                             size_t index,
                                             char **out);

/**
 * The full enumeration as JSON (exact fractions). Free with [`pf_string_free`].
 *
 * # Safety
 * `e` must be a live enumeration; `out` must be writable.
 */
enum PfStatus pf_enumeration_to_json(const struct PfEnumeration *e, char **out);

/**
 * Compares the enumeration with the vertex oracle on problems of at most `cap` states.
 *
 * # Safety
 * `p` must be a live problem; `out` must be writable.
 */
enum PfStatus pf_verify(const struct PfProblem *p, size_t cap, struct PfReport **out);

/**
 * # Safety
 * `r` must come from [`pf_verify`] or be null.
 */
void pf_report_free(struct PfReport *r);

/**
 * True when both vertex sets agree and no two chains share a posterior.
 *
 * # Safety
 * `r` must be a live report or null.
 */
bool pf_report_is_match(const struct PfReport *r);

/**
 * Number of vertices found by the oracle, or 0 for null.
 *
 * # Safety
 * `r` must be a live report or null.
 */
size_t pf_report_oracle_vertices(const struct PfReport *r);

/**
 * The report as JSON. Free with [`pf_string_free`].
 *
 * # Safety
 * `r` must be a live report; `out` must be writable.
 */
enum PfStatus pf_report_to_json(const struct PfReport *r, char **out);

/**
 * Decomposes `posterior` (comma-separated fractions) into extreme posteriors; JSON out.
 *
 * # Safety
 * `p` must be a live problem; `posterior` a nul-terminated string; `out` writable.
 */
enum PfStatus pf_decompose(const struct PfProblem *p, const char *posterior, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PRIVACY_FRONTIER_H */
