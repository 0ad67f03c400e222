#ifndef TGIX_H
#define TGIX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TgixStatus {
  TGIX_STATUS_OK = 0,
  /**
   * The query ran but found nothing.
   */
  TGIX_STATUS_NO_MATCH = 1,
  TGIX_STATUS_ERROR = 2,
  TGIX_STATUS_UNKNOWN_REVISION = 3,
  TGIX_STATUS_INVALID_ARGUMENT = 4,
  TGIX_STATUS_IO = 5,
  TGIX_STATUS_CORRUPT = 6,
  TGIX_STATUS_NO_ACTIVE_REVISION = 7,
  TGIX_STATUS_NOT_A_REPOSITORY = 8,
  TGIX_STATUS_PANIC = 9,
} TgixStatus;

/**
 * Opaque engine handle.
 */
typedef struct TgixEngine TgixEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Opens (creating if needed) the index stored in directory `dir`.
 *
 * # Safety
 * `dir` must be a NUL-terminated string and `out` a writable pointer.
 */
enum TgixStatus tgix_open(const char *dir, struct TgixEngine **out);

/**
 * Opens a volatile in-memory index.
 *
 * # Safety
 * `out` must be a writable pointer.
 */
enum TgixStatus tgix_open_in_memory(struct TgixEngine **out);

/**
 * Releases an engine. Null is ignored.
 *
 * # Safety
 * `engine` must be null or a live handle; it is invalid afterwards.
 */
void tgix_close(struct TgixEngine *engine);

/**
 * Ingests `branch` of the repository at `repo`. Ingestion statistics are
 * written to `out_json` when it is not null.
 *
 * # Safety
 * Pointers must be valid; `out_json` may be null.
 */
enum TgixStatus tgix_index_git(const struct TgixEngine *engine,
                               const char *repo,
                               const char *branch,
                               char **out_json);

/**
 * Resolves a revision id or commit-id prefix.
 *
 * # Safety
 * Pointers must be valid.
 */
enum TgixStatus tgix_resolve(const struct TgixEngine *engine,
                             const char *spec,
                             uint64_t *out_revision);

/**
 * Makes `revision` active. The number of posting mutations is written to
 * `out_mutations` when it is not null.
 *
 * # Safety
 * `engine` must be valid; `out_mutations` may be null.
 */
enum TgixStatus tgix_checkout(const struct TgixEngine *engine,
                              uint64_t revision,
                              uint64_t *out_mutations);

/**
 * Commits the directory `worktree` on top of the active revision.
 *
 * # Safety
 * Pointers must be valid; `out_revision` may be null.
 */
enum TgixStatus tgix_commit_dir(const struct TgixEngine *engine,
                                const char *worktree,
                                uint64_t *out_revision);

/**
 * Writes the active revision to `out_revision`, or returns
 * `NoActiveRevision` for an empty index.
 *
 * # Safety
 * Pointers must be valid.
 */
enum TgixStatus tgix_active_revision(const struct TgixEngine *engine, uint64_t *out_revision);

/**
 * Full-text search. Writes `{"results":[...],"truncated":...}` to
 * `out_json`; returns `NoMatch` when nothing was found. `worktree` may be
 * null.
 *
 * # Safety
 * Pointers must be valid; `worktree` may be null.
 */
enum TgixStatus tgix_search_json(const struct TgixEngine *engine,
                                 const char *pattern,
                                 size_t limit,
                                 const char *worktree,
                                 char **out_json);

/**
 * CamelHump symbol search. Writes a JSON array of ranked matches.
 *
 * # Safety
 * Pointers must be valid.
 */
enum TgixStatus tgix_symbol_json(const struct TgixEngine *engine,
                                 const char *pattern,
                                 size_t limit,
                                 char **out_json);

/**
 * Index statistics as a JSON object.
 *
 * # Safety
 * Pointers must be valid.
 */
enum TgixStatus tgix_stats_json(const struct TgixEngine *engine, size_t top_k, char **out_json);

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *tgix_last_error(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library, freed at most once.
 */
void tgix_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TGIX_H */
