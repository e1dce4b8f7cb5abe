/* C interface for the bibrank citation-ranking engine. */

#pragma once

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen; edit the Rust source instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum BrStatus {
  BR_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  BR_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  BR_STATUS_INVALID_UTF8 = 2,
  /**
   * The requested paper or author is not known.
   */
  BR_STATUS_NOT_FOUND = 3,
  /**
   * Input could not be parsed (snapshot or state file).
   */
  BR_STATUS_PARSE = 4,
  /**
   * The data violates a model invariant (e.g. an empty bibliography on
   * a citing paper).
   */
  BR_STATUS_INCONSISTENT = 5,
  BR_STATUS_IO = 6,
  /**
   * Attempt to register or count something twice.
   */
  BR_STATUS_DUPLICATE = 7,
  /**
   * The operation is not available in the requested mode.
   */
  BR_STATUS_UNAVAILABLE = 8,
  /**
   * A caught panic; the handle remains valid but the call had no effect.
   */
  BR_STATUS_PANIC = 9,
} BrStatus;

/**
 * Reference-count mode of the ranking model.
 */
typedef enum BrRefCountMode {
  /**
   * Full bibliography length of the citing paper.
   */
  BR_REF_COUNT_MODE_BIBLIOGRAPHY = 0,
  /**
   * Only references resolving inside the snapshot.
   */
  BR_REF_COUNT_MODE_IN_DATABASE = 1,
} BrRefCountMode;

/**
 * Opaque citation-graph handle.
 */
typedef struct BrGraph BrGraph;

/**
 * Opaque rank-state handle.
 */
typedef struct BrState BrState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *br_last_error_message(void);

/**
 * Loads a snapshot file (line-delimited `key=value` records) into a graph.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string; `out`, when the call
 * succeeds, receives a handle that must be released with [`br_graph_free`].
 */
enum BrStatus br_graph_from_snapshot_file(const char *path, struct BrGraph **out);

/**
 * Parses snapshot text directly.
 *
 * # Safety
 * As [`br_graph_from_snapshot_file`], with `text` holding the snapshot body.
 */
enum BrStatus br_graph_from_snapshot_text(const char *text, struct BrGraph **out);

/**
 * Releases a graph handle. Null is ignored.
 *
 * # Safety
 * `graph` must be a pointer returned by a `br_graph_*` constructor, not
 * yet freed.
 */
void br_graph_free(struct BrGraph *graph);

/**
 * Number of papers in the graph.
 *
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
enum BrStatus br_graph_paper_count(const struct BrGraph *graph, uintptr_t *out);

/**
 * PaperRank of one paper.
 *
 * # Safety
 * `graph` live handle, `paper_id` NUL-terminated, `out` writable.
 */
enum BrStatus br_paper_rank(const struct BrGraph *graph,
                            const char *paper_id,
                            enum BrRefCountMode mode,
                            double *out);

/**
 * AuthorRank of one author, over every paper of theirs in the graph.
 *
 * # Safety
 * `graph` live handle, `author_id` NUL-terminated, `out` writable.
 */
enum BrStatus br_author_rank(const struct BrGraph *graph,
                             const char *author_id,
                             enum BrRefCountMode mode,
                             double *out);

/**
 * Number of papers citing `paper_id`.
 *
 * # Safety
 * `graph` live handle, `paper_id` NUL-terminated, `out` writable.
 */
enum BrStatus br_citation_count(const struct BrGraph *graph, const char *paper_id, uint64_t *out);

/**
 * h-index of one author.
 *
 * # Safety
 * `graph` live handle, `author_id` NUL-terminated, `out` writable.
 */
enum BrStatus br_h_index(const struct BrGraph *graph, const char *author_id, uint64_t *out);

/**
 * Citations-per-unit-rank ratio. `*out_defined` is false for uncited
 * papers, where the ratio is 0/0 and `*out_value` is left at 0.
 *
 * # Safety
 * `graph` live handle, `paper_id` NUL-terminated, out-pointers writable.
 */
enum BrStatus br_rho(const struct BrGraph *graph,
                     const char *paper_id,
                     enum BrRefCountMode mode,
                     double *out_value,
                     bool *out_defined);

/**
 * Checks that per-paper citer sums equal one power-method step of the
 * citation matrix (in-database mode), componentwise within 1e-12.
 *
 * # Safety
 * `graph` live handle, out-pointers writable.
 */
enum BrStatus br_verify_first_step(const struct BrGraph *graph,
                                   bool *out_holds,
                                   double *out_max_deviation);

/**
 * Bootstraps a rank state from the graph.
 *
 * # Safety
 * `graph` live handle; `out` receives a handle to release with
 * [`br_state_free`].
 */
enum BrStatus br_state_init(const struct BrGraph *graph,
                            enum BrRefCountMode mode,
                            struct BrState **out);

/**
 * Releases a state handle. Null is ignored.
 *
 * # Safety
 * `state` must be a pointer returned by a `br_state_*` constructor, not
 * yet freed.
 */
void br_state_free(struct BrState *state);

/**
 * Applies one citation reported as (citing id, citing bibliography
 * length); writes the cited paper's rank increase to `out_delta`.
 * Bibliography-mode states only.
 *
 * # Safety
 * `state` live handle, id strings NUL-terminated, `out_delta` writable.
 */
enum BrStatus br_state_apply_citation(struct BrState *state,
                                      const char *citing_id,
                                      uint32_t citing_bibliography_length,
                                      const char *cited_id,
                                      double *out_delta);

/**
 * Current rank of one paper in the state.
 *
 * # Safety
 * `state` live handle, `paper_id` NUL-terminated, `out` writable.
 */
enum BrStatus br_state_paper_rank(const struct BrState *state, const char *paper_id, double *out);

/**
 * Current rank of one author in the state.
 *
 * # Safety
 * `state` live handle, `author_id` NUL-terminated, `out` writable.
 */
enum BrStatus br_state_author_rank(const struct BrState *state, const char *author_id, double *out);

/**
 * Writes the state to a file (write-new-then-swap).
 *
 * # Safety
 * `state` live handle, `path` NUL-terminated.
 */
enum BrStatus br_state_save_file(const struct BrState *state, const char *path);

/**
 * Loads a state file previously written by [`br_state_save_file`].
 *
 * # Safety
 * `path` NUL-terminated; `out` receives a handle to release with
 * [`br_state_free`].
 */
enum BrStatus br_state_load_file(const char *path, struct BrState **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
