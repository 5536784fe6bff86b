#ifndef SYMGP_H
#define SYMGP_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SymgpCategory {
  SYMGP_CATEGORY_ASYMMETRIC = 0,
  SYMGP_CATEGORY_CAT1 = 1,
  SYMGP_CATEGORY_CAT2 = 2,
  SYMGP_CATEGORY_CAT3 = 3,
  SYMGP_CATEGORY_CAT4 = 4,
  SYMGP_CATEGORY_CAT5 = 5,
} SymgpCategory;

typedef enum SymgpMetric {
  SYMGP_METRIC_AGPD = 0,
  SYMGP_METRIC_MGPD = 1,
  /**
   * MGPD for category 2, AGPD otherwise.
   */
  SYMGP_METRIC_AMGPD = 2,
} SymgpMetric;

typedef enum SymgpStatus {
  SYMGP_STATUS_OK = 0,
  SYMGP_STATUS_NULL_POINTER = 1,
  SYMGP_STATUS_INVALID_ARGUMENT = 2,
  SYMGP_STATUS_PARSE = 3,
  SYMGP_STATUS_PRECONDITION = 4,
  SYMGP_STATUS_IO = 5,
  SYMGP_STATUS_PANIC = 6,
} SymgpStatus;

/**
 * Opaque grouped primitives.
 */
typedef struct SymgpGp SymgpGp;

/**
 * Opaque point set.
 */
typedef struct SymgpPointSet SymgpPointSet;

/**
 * Opaque detected symmetry.
 */
typedef struct SymgpSymmetry SymgpSymmetry;

/**
 * Rigid pose `p -> R p + t`, rotation stored row-major.
 */
typedef struct SymgpPose {
  double rotation[9];
  double translation[3];
} SymgpPose;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the next
 * failing call on the same thread.
 */
const char *symgp_last_error(void);

/**
 * Library version as a static string.
 */
const char *symgp_version(void);

/**
 * Copies `n` points from `xyz` (`3 n` doubles).
 *
 * # Safety
 * `xyz` must point to `3 * n` readable doubles; `out` must be writable.
 */
enum SymgpStatus symgp_pointset_new(const double *xyz, size_t n, struct SymgpPointSet **out);

/**
 * Loads an OBJ, PLY or CSV model, chosen by extension.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum SymgpStatus symgp_pointset_load(const char *path, struct SymgpPointSet **out);

/**
 * Generates a toy shape such as `"pyramid:4"` or `"cube@3000"`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `out` must be writable.
 */
enum SymgpStatus symgp_pointset_generate(const char *spec,
                                         uint64_t seed,
                                         struct SymgpPointSet **out);

/**
 * # Safety
 * `set` must be a live handle; `out` must be writable.
 */
enum SymgpStatus symgp_pointset_len(const struct SymgpPointSet *set, size_t *out);

/**
 * # Safety
 * `set` must be null or a handle not yet freed.
 */
void symgp_pointset_free(struct SymgpPointSet *set);

/**
 * Symmetric Hausdorff distance between two point sets.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must be writable.
 */
enum SymgpStatus symgp_hausdorff(const struct SymgpPointSet *a,
                                 const struct SymgpPointSet *b,
                                 double *out);

/**
 * Detects symmetry with the default detector settings.
 *
 * # Safety
 * `set` must be a live handle; `out` must be writable.
 */
enum SymgpStatus symgp_detect(const struct SymgpPointSet *set, struct SymgpSymmetry **out);

/**
 * # Safety
 * `sym` must be a live handle; `out` must be writable.
 */
enum SymgpStatus symgp_symmetry_category(const struct SymgpSymmetry *sym, enum SymgpCategory *out);

/**
 * Number of geometric symmetry axes (one per line).
 *
 * # Safety
 * `sym` must be a live handle; `out` must be writable.
 */
enum SymgpStatus symgp_symmetry_axis_count(const struct SymgpSymmetry *sym, size_t *out);

/**
 * Axis `index`: unit direction, order, and whether it is continuous.
 *
 * # Safety
 * `sym` must be a live handle; `axis` must hold 3 doubles; the other outputs
 * must be writable.
 */
enum SymgpStatus symgp_symmetry_axis(const struct SymgpSymmetry *sym,
                                     size_t index,
                                     double *axis,
                                     uint32_t *order,
                                     bool *continuous);

/**
 * # Safety
 * `sym` must be null or a handle not yet freed.
 */
void symgp_symmetry_free(struct SymgpSymmetry *sym);

/**
 * Grouped primitives at `radius` normalized units; a non-positive radius means
 * the detected object radius.
 *
 * # Safety
 * `sym` must be a live handle; `out` must be writable.
 */
enum SymgpStatus symgp_gp_build(const struct SymgpSymmetry *sym,
                                double radius,
                                struct SymgpGp **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum SymgpStatus symgp_gp_from_json(const char *json, struct SymgpGp **out);

/**
 * Serializes to JSON; release the string with [`symgp_string_free`].
 *
 * # Safety
 * `gp` must be a live handle; `out` must be writable.
 */
enum SymgpStatus symgp_gp_to_json(const struct SymgpGp *gp, char **out);

/**
 * # Safety
 * `gp` must be a live handle; `out` must be writable.
 */
enum SymgpStatus symgp_gp_group_count(const struct SymgpGp *gp, size_t *out);

/**
 * # Safety
 * `gp` must be null or a handle not yet freed.
 */
void symgp_gp_free(struct SymgpGp *gp);

/**
 * Grouped-primitive distance between an estimated and a ground-truth pose.
 * `metric` takes a [`SymgpMetric`] value.
 *
 * # Safety
 * `gp`, `t_hat` and `t_dot` must be valid; `out` must be writable.
 */
enum SymgpStatus symgp_distance(const struct SymgpGp *gp,
                                uint32_t metric,
                                const struct SymgpPose *t_hat,
                                const struct SymgpPose *t_dot,
                                double *out);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void symgp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYMGP_H */
