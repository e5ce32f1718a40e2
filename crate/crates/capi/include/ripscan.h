/* C interface for the ripscan anti-piracy toolkit. */

#ifndef RIPSCAN_H
#define RIPSCAN_H

/* Generated with cbindgen:0.29.4 */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call in this interface.
typedef enum RipscanStatus {
  // The call succeeded.
  RIPSCAN_STATUS_OK = 0,
  // A required pointer argument was null.
  RIPSCAN_STATUS_NULL_ARGUMENT = 1,
  // An input string was not valid UTF-8.
  RIPSCAN_STATUS_INVALID_UTF8 = 2,
  // An input document did not parse (JSON or config syntax).
  RIPSCAN_STATUS_PARSE_ERROR = 3,
  // The run configuration was rejected.
  RIPSCAN_STATUS_CONFIG_ERROR = 4,
  // A stage input artifact is missing; run the earlier stages first.
  RIPSCAN_STATUS_MISSING_INPUT = 5,
  // A pipeline stage failed.
  RIPSCAN_STATUS_STAGE_FAILED = 6,
  // The platform stayed unreachable through every retry.
  RIPSCAN_STATUS_TRANSPORT_EXHAUSTED = 7,
  // Filesystem error.
  RIPSCAN_STATUS_IO_ERROR = 8,
  // The stage name is not part of the pipeline.
  RIPSCAN_STATUS_UNKNOWN_STAGE = 9,
  // A panic was caught at the FFI boundary; state may be inconsistent.
  RIPSCAN_STATUS_PANIC = 99,
} RipscanStatus;

// Licensed-title catalog for fuzzy matching.
typedef struct RipscanCatalog RipscanCatalog;

// Deterministic rule classifier over the piracy taxonomy.
typedef struct RipscanClassifier RipscanClassifier;

// A configured pipeline run over the simulated platform.
typedef struct RipscanPipeline RipscanPipeline;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Crate version as a static string; never freed.
const char *ripscan_version(void);

// Message for the most recent failure on this thread. The pointer stays
// valid until the next failing ripscan call on the same thread. Never null.
const char *ripscan_last_error(void);

// Release a string returned through a `char **` out parameter.
//
// # Safety
// `s` must be null or a pointer previously returned by this library.
void ripscan_string_free(char *s);

// Create a classifier with the built-in signature set.
//
// # Safety
// `out` must be a valid pointer.
enum RipscanStatus ripscan_classifier_new(struct RipscanClassifier **out);

// Destroy a classifier handle.
//
// # Safety
// `classifier` must be null or a live handle from `ripscan_classifier_new`.
void ripscan_classifier_free(struct RipscanClassifier *classifier);

// Binary piracy detection over a post given as JSON. Writes the verdict to
// `out_is_piracy`.
//
// # Safety
// All pointers must be valid; `post_json` nul-terminated UTF-8.
enum RipscanStatus ripscan_classifier_detect(const struct RipscanClassifier *classifier,
                                             const char *post_json,
                                             bool *out_is_piracy);

// Full classification of a post given as JSON. On success `out_verdict_json`
// receives the verdict document (labels, justifications); free it with
// `ripscan_string_free`.
//
// # Safety
// All pointers must be valid; `post_json` nul-terminated UTF-8.
enum RipscanStatus ripscan_classifier_classify(const struct RipscanClassifier *classifier,
                                               const char *post_json,
                                               bool author_is_bot,
                                               char **out_verdict_json);

// Load a catalog from a JSONL file.
//
// # Safety
// `path` must be nul-terminated UTF-8; `out` must be valid.
enum RipscanStatus ripscan_catalog_open(const char *path, struct RipscanCatalog **out);

// Destroy a catalog handle.
//
// # Safety
// `catalog` must be null or a live handle from `ripscan_catalog_open`.
void ripscan_catalog_free(struct RipscanCatalog *catalog);

// Match a post (JSON) against the catalog. `threshold` in [0, 1]; pass 0.8
// for the default. `out_matches_json` receives a JSON array ordered best
// match first; free it with `ripscan_string_free`.
//
// # Safety
// All pointers must be valid; `post_json` nul-terminated UTF-8.
enum RipscanStatus ripscan_catalog_match(const struct RipscanCatalog *catalog,
                                         const char *post_json,
                                         double threshold,
                                         char **out_matches_json);

// Create a pipeline from configuration text in the flat `key = value`
// format. Pass null for an all-defaults run (paths resolve against the
// current working directory).
//
// # Safety
// `config_text` must be null or nul-terminated UTF-8; `out` must be valid.
enum RipscanStatus ripscan_pipeline_new(const char *config_text, struct RipscanPipeline **out);

// Destroy a pipeline handle.
//
// # Safety
// `pipeline` must be null or a live handle from `ripscan_pipeline_new`.
void ripscan_pipeline_free(struct RipscanPipeline *pipeline);

// Run every stage in order, skipping stages already completed on disk.
//
// # Safety
// `pipeline` must be a live handle.
enum RipscanStatus ripscan_pipeline_run(struct RipscanPipeline *pipeline);

// Run one named stage: synth, probe, gate, expand, hydrate, detect,
// categorize, match, graph, estimate, report, or track.
//
// # Safety
// `pipeline` must be a live handle; `stage` nul-terminated UTF-8.
enum RipscanStatus ripscan_pipeline_run_stage(struct RipscanPipeline *pipeline, const char *stage);

// The run id (12 hex characters derived from the configuration). Free with
// `ripscan_string_free`.
//
// # Safety
// `pipeline` must be a live handle; `out` must be valid.
enum RipscanStatus ripscan_pipeline_run_id(const struct RipscanPipeline *pipeline, char **out);

// Absolute or relative path of the run's artifact directory. Free with
// `ripscan_string_free`.
//
// # Safety
// `pipeline` must be a live handle; `out` must be valid.
enum RipscanStatus ripscan_pipeline_run_dir(const struct RipscanPipeline *pipeline, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RIPSCAN_H */
