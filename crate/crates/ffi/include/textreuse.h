#ifndef TEXTREUSE_H
#define TEXTREUSE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TrDirection {
  TR_DIRECTION_IN = 0,
  TR_DIRECTION_OUT = 1,
  TR_DIRECTION_BOTH = 2,
} TrDirection;

/**
 * Result code of every fallible call.
 */
typedef enum TrStatus {
  TR_STATUS_OK = 0,
  TR_STATUS_NULL_ARGUMENT = 1,
  TR_STATUS_INVALID_UTF8 = 2,
  TR_STATUS_IO = 3,
  TR_STATUS_PARSE = 4,
  TR_STATUS_NOT_FOUND = 5,
  TR_STATUS_OUT_OF_RANGE = 6,
  TR_STATUS_INVALID_ARGUMENT = 7,
  TR_STATUS_PANIC = 8,
} TrStatus;

/**
 * A loaded corpus.
 */
typedef struct TrCorpus TrCorpus;

/**
 * An owned list of edges.
 */
typedef struct TrEdges TrEdges;

/**
 * An edge store bound to the corpus it was built from.
 */
typedef struct TrStore TrStore;

/**
 * Detection parameters; start from [`tr_align_params_default`].
 */
typedef struct TrAlignParams {
  size_t k;
  uint32_t min_align_length;
  double min_positives;
  size_t max_seed_occurrences;
} TrAlignParams;

/**
 * Borrowed view of one edge; the id strings live as long as the edge set.
 */
typedef struct TrEdge {
  const char *t1_id;
  size_t t1_start;
  size_t t1_end;
  const char *t2_id;
  size_t t2_start;
  size_t t2_end;
  uint32_t align_length;
  double positives_percent;
} TrEdge;

/**
 * Filters for [`tr_store_query_json`]. Year bounds apply only when the
 * matching `has_` flag is non-zero.
 */
typedef struct TrQuery {
  enum TrDirection direction;
  uint8_t has_year_from;
  int32_t year_from;
  uint8_t has_year_to;
  int32_t year_to;
  uint8_t exclude_same_author;
} TrQuery;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *tr_last_error(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void tr_string_free(char *s);

/**
 * Loads a corpus directory.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum TrStatus tr_corpus_open(const char *path, struct TrCorpus **out);

/**
 * # Safety
 * `corpus` must come from [`tr_corpus_open`] and not have been freed.
 */
void tr_corpus_free(struct TrCorpus *corpus);

/**
 * Number of documents; 0 for null.
 *
 * # Safety
 * `corpus` must be null or a live handle.
 */
size_t tr_corpus_len(const struct TrCorpus *corpus);

/**
 * # Safety
 * Pointers must be valid; `doc_id` NUL-terminated.
 */
enum TrStatus tr_corpus_doc_len(const struct TrCorpus *corpus, const char *doc_id, size_t *out);

struct TrAlignParams tr_align_params_default(void);

/**
 * Runs all-pairs detection. `params` may be null for defaults.
 *
 * # Safety
 * `corpus` must be a live handle, `params` null or valid, `out` writable.
 */
enum TrStatus tr_detect(const struct TrCorpus *corpus,
                        const struct TrAlignParams *params,
                        struct TrEdges **out);

/**
 * Reads an edge file.
 *
 * # Safety
 * `path` NUL-terminated, `out` writable.
 */
enum TrStatus tr_edges_read(const char *path, struct TrEdges **out);

/**
 * Writes an edge file.
 *
 * # Safety
 * `edges` live, `path` NUL-terminated.
 */
enum TrStatus tr_edges_write(const struct TrEdges *edges, const char *path);

/**
 * Number of edges; 0 for null.
 *
 * # Safety
 * `edges` must be null or a live handle.
 */
size_t tr_edges_len(const struct TrEdges *edges);

/**
 * Copies edge `index` into `out`; its strings borrow from `edges`.
 *
 * # Safety
 * `edges` live, `out` writable.
 */
enum TrStatus tr_edges_get(const struct TrEdges *edges, size_t index, struct TrEdge *out);

/**
 * # Safety
 * `edges` must come from this library and not have been freed.
 */
void tr_edges_free(struct TrEdges *edges);

/**
 * Merges fragmented edges; a negative limit selects its default.
 *
 * # Safety
 * `edges` live, `out` writable.
 */
enum TrStatus tr_defragment(const struct TrEdges *edges,
                            int64_t gap_limit,
                            int64_t diag_limit,
                            struct TrEdges **out);

/**
 * Builds a queryable store; the edges are copied.
 *
 * # Safety
 * Handles live, `out` writable.
 */
enum TrStatus tr_store_new(const struct TrCorpus *corpus,
                           const struct TrEdges *edges,
                           struct TrStore **out);

/**
 * # Safety
 * `store` must come from [`tr_store_new`] and not have been freed.
 */
void tr_store_free(struct TrStore *store);

/**
 * Incoming and outgoing edge counts of a document (same-author excluded).
 *
 * # Safety
 * `store` live, `doc_id` NUL-terminated, outputs writable.
 */
enum TrStatus tr_store_counts(const struct TrStore *store,
                              const char *doc_id,
                              size_t *in_count,
                              size_t *out_count);

/**
 * Edges of a document as a JSON array; free with [`tr_string_free`].
 * `query` may be null for outgoing edges with same-author exclusion.
 *
 * # Safety
 * `store` live, `doc_id` NUL-terminated, `query` null or valid, `out` writable.
 */
enum TrStatus tr_store_query_json(const struct TrStore *store,
                                  const char *doc_id,
                                  const struct TrQuery *query,
                                  char **out);

/**
 * Metadata search results as a JSON array; free with [`tr_string_free`].
 *
 * # Safety
 * `corpus` live, `query` NUL-terminated, `out` writable.
 */
enum TrStatus tr_search_json(const struct TrCorpus *corpus, const char *query, char **out);

/**
 * Raw to annotated offset; identity when the document has no annotation table.
 *
 * # Safety
 * `corpus` live, `doc_id` NUL-terminated, `out` writable.
 */
enum TrStatus tr_raw_to_annotated(const struct TrCorpus *corpus,
                                  const char *doc_id,
                                  size_t raw_offset,
                                  size_t *out);

/**
 * Annotated to raw offset; offsets inside inserted text map to the
 * insertion point.
 *
 * # Safety
 * `corpus` live, `doc_id` NUL-terminated, `out` writable.
 */
enum TrStatus tr_annotated_to_raw(const struct TrCorpus *corpus,
                                  const char *doc_id,
                                  size_t annotated_offset,
                                  size_t *out);

/**
 * Page of a raw offset, with synthetic pagination when there is no page map.
 *
 * # Safety
 * `corpus` live, `doc_id` NUL-terminated, `out` writable.
 */
enum TrStatus tr_offset_to_page(const struct TrCorpus *corpus,
                                const char *doc_id,
                                size_t raw_offset,
                                uint32_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TEXTREUSE_H */
