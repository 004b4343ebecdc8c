/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef VCLOSURE_H
#define VCLOSURE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by every fallible entry point.
 */
typedef enum {
  VCL_STATUS_OK = 0,
  VCL_STATUS_NULL_POINTER = 1,
  VCL_STATUS_INVALID_UTF8 = 2,
  VCL_STATUS_PARSE = 3,
  VCL_STATUS_INVALID_ARGUMENT = 4,
  VCL_STATUS_BUDGET_EXCEEDED = 5,
  VCL_STATUS_FRINGE_TOO_LARGE = 6,
  VCL_STATUS_INCONSISTENCY = 7,
  VCL_STATUS_PANIC = 8,
} VclStatus;

typedef enum {
  VCL_VERDICT_YES = 0,
  VCL_VERDICT_NO = 1,
  VCL_VERDICT_UNKNOWN = 2,
} VclVerdict;

/**
 * A finitely generated subgroup of a free group.
 */
typedef struct VclSubgroup VclSubgroup;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Folds the subgroup of the rank-`rank` free group generated by the
 * comma-separated words in `gens` (letters `a..z`, inverses `A..Z`).
 *
 * # Safety
 * `gens` must be a valid C string and `out` a valid pointer.
 */
VclStatus vcl_subgroup_new(uint32_t rank, const char *gens, VclSubgroup **out);

/**
 * # Safety
 * `h` must be null or a handle from this library that has not been freed.
 */
void vcl_subgroup_free(VclSubgroup *h);

/**
 * Rank of the subgroup (size of a free basis), or 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t vcl_subgroup_rank(const VclSubgroup *h);

/**
 * # Safety
 * `h` must be a live handle, `word` a valid C string, `out` a valid pointer.
 */
VclStatus vcl_subgroup_contains(const VclSubgroup *h, const char *word, bool *out);

/**
 * Whether `k` is a subgroup of `h`.
 *
 * # Safety
 * `h` and `k` must be live handles, `out` a valid pointer.
 */
VclStatus vcl_subgroup_includes(const VclSubgroup *h, const VclSubgroup *k, bool *out);

/**
 * # Safety
 * `h` and `k` must be live handles, `out` a valid pointer.
 */
VclStatus vcl_subgroup_intersect(const VclSubgroup *h, const VclSubgroup *k, VclSubgroup **out);

/**
 * Free basis as a JSON array of words.
 *
 * # Safety
 * `h` must be a live handle, `out` a valid pointer.
 */
VclStatus vcl_subgroup_basis_json(const VclSubgroup *h, char **out);

/**
 * Subgroup graph in Graphviz DOT.
 *
 * # Safety
 * `h` must be a live handle, `out` a valid pointer.
 */
VclStatus vcl_subgroup_to_dot(const VclSubgroup *h, char **out);

/**
 * Decides whether `h` is a retract, searching words of length at most
 * `bound` when no exact criterion applies. If `json` is not null it
 * receives the verdict with its witness or certificate.
 *
 * # Safety
 * `h` must be a live handle, `verdict` a valid pointer, `json` null or valid.
 */
VclStatus vcl_is_retract(const VclSubgroup *h, uint32_t bound, VclVerdict *verdict, char **json);

/**
 * Smallest retract containing `h`. `exact` is set to false when some
 * smaller candidate could not be decided within `bound`.
 *
 * # Safety
 * `h` must be a live handle, `out` and `exact` valid pointers.
 */
VclStatus vcl_closure(const VclSubgroup *h, uint32_t bound, VclSubgroup **out, bool *exact);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void vcl_string_free(char *s);

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into this library on the same thread.
 */
const char *vcl_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VCLOSURE_H */
