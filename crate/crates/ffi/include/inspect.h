#ifndef INSPECT_H
#define INSPECT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum InspectStatus {
  INSPECT_STATUS_OK = 0,
  INSPECT_STATUS_NULL_ARGUMENT = 1,
  INSPECT_STATUS_INVALID_UTF8 = 2,
  INSPECT_STATUS_IO = 3,
  INSPECT_STATUS_PARSE = 4,
  INSPECT_STATUS_GRAPH = 5,
  INSPECT_STATUS_MATCH = 6,
  INSPECT_STATUS_OUT_OF_RANGE = 7,
  INSPECT_STATUS_PANIC = 8,
} InspectStatus;

// Opaque knowledge graph.
typedef struct InspectGraph InspectGraph;

// Opaque parsed query.
typedef struct InspectQuery InspectQuery;

// Opaque ranked result list.
typedef struct InspectResults InspectResults;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failing call on this thread, or null. The pointer
// stays valid until the next call into this library on the same thread.
const char *inspect_last_error_message(void);

// Loads a graph file. `taxonomy_path` may be null for the placeholder taxonomy.
//
// # Safety
// String arguments must be null or NUL-terminated; `out` must be writable.
enum InspectStatus inspect_graph_load(const char *path,
                                      const char *taxonomy_path,
                                      struct InspectGraph **out);

// Empty graph over the placeholder taxonomy, or over `taxonomy_path` when non-null.
//
// # Safety
// `taxonomy_path` must be null or NUL-terminated; `out` must be writable.
enum InspectStatus inspect_graph_new(const char *taxonomy_path, struct InspectGraph **out);

// Applies graph-file lines. Bad lines are skipped and counted in `errors`.
// Any of the count pointers may be null.
//
// # Safety
// `g` must come from this library; `lines` must be NUL-terminated.
enum InspectStatus inspect_graph_ingest(struct InspectGraph *g,
                                        const char *lines,
                                        size_t *nodes_added,
                                        size_t *edges_added,
                                        size_t *errors);

// Current graph version; 0 for a null handle.
//
// # Safety
// `g` must be null or come from this library.
uint64_t inspect_graph_version(const struct InspectGraph *g);

// # Safety
// `g` must be null or come from this library.
size_t inspect_graph_node_count(const struct InspectGraph *g);

// # Safety
// `g` must be null or come from this library, and not be used afterwards.
void inspect_graph_free(struct InspectGraph *g);

// Parses query-language text.
//
// # Safety
// `text` must be NUL-terminated; `out` must be writable.
enum InspectStatus inspect_query_parse(const char *text, struct InspectQuery **out);

// Canonical text form of a query. Free with [`inspect_string_free`].
//
// # Safety
// `q` must come from this library; `out` must be writable.
enum InspectStatus inspect_query_print(const struct InspectQuery *q, char **out);

// # Safety
// `q` must be null or come from this library, and not be used afterwards.
void inspect_query_free(struct InspectQuery *q);

// Ranks `g` against `q`. A NaN `threshold` uses the query's own; any other
// value must lie in [0, 1].
//
// # Safety
// Handles must come from this library; `out` must be writable.
enum InspectStatus inspect_match(const struct InspectGraph *g,
                                 const struct InspectQuery *q,
                                 double threshold,
                                 struct InspectResults **out);

// Number of entries; 0 for a null handle.
//
// # Safety
// `r` must be null or come from this library.
size_t inspect_results_len(const struct InspectResults *r);

// Score and seed person of entry `index`. `person` receives a string to free
// with [`inspect_string_free`]; either out-pointer may be null.
//
// # Safety
// `r` must come from this library.
enum InspectStatus inspect_results_get(const struct InspectResults *r,
                                       size_t index,
                                       double *score,
                                       char **person);

// Whole result list as JSON. Free with [`inspect_string_free`].
//
// # Safety
// `r` must come from this library; `out` must be writable.
enum InspectStatus inspect_results_to_json(const struct InspectResults *r, char **out);

// # Safety
// `r` must be null or come from this library, and not be used afterwards.
void inspect_results_free(struct InspectResults *r);

// # Safety
// `s` must be null or a string returned by this library.
void inspect_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INSPECT_H */
