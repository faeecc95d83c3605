#ifndef UGRASP_H
#define UGRASP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum UgraspStatus {
  UGRASP_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  UGRASP_STATUS_NULL_POINTER = 1,
  /**
   * An argument was out of range or malformed.
   */
  UGRASP_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A file could not be read or written.
   */
  UGRASP_STATUS_IO = 3,
  /**
   * Input data was malformed or inconsistent.
   */
  UGRASP_STATUS_DATA = 4,
  /**
   * The learned models do not support the query.
   */
  UGRASP_STATUS_DEGENERATE = 5,
  /**
   * An internal error; the library state is unchanged.
   */
  UGRASP_STATUS_PANIC = 6,
} UgraspStatus;

/**
 * A trained model archive.
 */
typedef struct UgraspArchive UgraspArchive;

/**
 * A point cloud with its viewpoint.
 */
typedef struct UgraspCloud UgraspCloud;

/**
 * Surface features extracted from a cloud.
 */
typedef struct UgraspFeatures UgraspFeatures;

/**
 * A hand description.
 */
typedef struct UgraspHand UgraspHand;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *ugrasp_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ugrasp_version(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void ugrasp_string_free(char *s);

/**
 * Builds a cloud from `n_points` xyz triples.
 *
 * # Safety
 * `xyz` must hold `3 * n_points` doubles and `viewpoint` 3 doubles.
 */
enum UgraspStatus ugrasp_cloud_new(const double *xyz,
                                   size_t n_points,
                                   const double *viewpoint,
                                   struct UgraspCloud **out);

/**
 * Reads an ASCII PLY cloud.
 *
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum UgraspStatus ugrasp_cloud_load(const char *path, struct UgraspCloud **out);

/**
 * Number of points, or 0 for null.
 *
 * # Safety
 * `cloud` must be null or a live handle.
 */
size_t ugrasp_cloud_len(const struct UgraspCloud *cloud);

/**
 * # Safety
 * `cloud` must be null or a live handle, not used afterwards.
 */
void ugrasp_cloud_free(struct UgraspCloud *cloud);

/**
 * Extracts one feature per point with a stable neighbourhood fit.
 *
 * # Safety
 * `cloud` must be a live handle.
 */
enum UgraspStatus ugrasp_features_extract(const struct UgraspCloud *cloud,
                                          size_t k_nn,
                                          struct UgraspFeatures **out);

/**
 * Number of features, or 0 for null.
 *
 * # Safety
 * `features` must be null or a live handle.
 */
size_t ugrasp_features_len(const struct UgraspFeatures *features);

/**
 * Copies feature `index` into `pose` (7 doubles) and `curvature` (2).
 *
 * # Safety
 * `pose` and `curvature` must have room for 7 and 2 doubles.
 */
enum UgraspStatus ugrasp_features_get(const struct UgraspFeatures *features,
                                      size_t index,
                                      double *pose,
                                      double *curvature);

/**
 * # Safety
 * `features` must be null or a live handle, not used afterwards.
 */
void ugrasp_features_free(struct UgraspFeatures *features);

/**
 * The built-in two-finger hand.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum UgraspStatus ugrasp_hand_default(struct UgraspHand **out);

/**
 * Reads a hand description JSON file.
 *
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum UgraspStatus ugrasp_hand_load(const char *path, struct UgraspHand **out);

/**
 * Number of links, or 0 for null.
 *
 * # Safety
 * `hand` must be null or a live handle.
 */
size_t ugrasp_hand_num_links(const struct UgraspHand *hand);

/**
 * Number of joints, or 0 for null.
 *
 * # Safety
 * `hand` must be null or a live handle.
 */
size_t ugrasp_hand_dof(const struct UgraspHand *hand);

/**
 * World poses of every link, written as `7 * num_links` doubles.
 *
 * # Safety
 * `wrist` must hold 7 doubles, `config` `n_config`, and `poses` `poses_len`.
 */
enum UgraspStatus ugrasp_hand_forward_kinematics(const struct UgraspHand *hand,
                                                 const double *wrist,
                                                 const double *config,
                                                 size_t n_config,
                                                 double *poses,
                                                 size_t poses_len);

/**
 * # Safety
 * `hand` must be null or a live handle, not used afterwards.
 */
void ugrasp_hand_free(struct UgraspHand *hand);

/**
 * Reads a model archive written by `ugrasp train`.
 *
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum UgraspStatus ugrasp_archive_load(const char *path, struct UgraspArchive **out);

/**
 * Number of grasp types, or 0 for null.
 *
 * # Safety
 * `archive` must be null or a live handle.
 */
size_t ugrasp_archive_num_grasp_types(const struct UgraspArchive *archive);

/**
 * # Safety
 * `archive` must be null or a live handle, not used afterwards.
 */
void ugrasp_archive_free(struct UgraspArchive *archive);

/**
 * Finds grasps on `cloud` and writes the best `top` as a JSON grasp list
 * to `out_json`, to be released with [`ugrasp_string_free`].
 *
 * `config_json` may be null for defaults; `seed` overrides its seed.
 *
 * # Safety
 * Handles must be live; `config_json` null or NUL-terminated.
 */
enum UgraspStatus ugrasp_infer(const struct UgraspArchive *archive,
                               const struct UgraspCloud *cloud,
                               const char *config_json,
                               uint64_t seed,
                               size_t top,
                               char **out_json);

/**
 * Antipodal von Mises-Fisher density of unit quaternion `q` (w x y z)
 * around `mean` with concentration `kappa`.
 *
 * # Safety
 * `q` and `mean` must hold 4 doubles.
 */
enum UgraspStatus ugrasp_theta(const double *q, const double *mean, double kappa, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UGRASP_H */
