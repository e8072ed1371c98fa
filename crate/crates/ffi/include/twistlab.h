#ifndef TWISTLAB_H
#define TWISTLAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TwistlabStatus {
  TWISTLAB_STATUS_OK = 0,
  TWISTLAB_STATUS_NULL_POINTER = 1,
  TWISTLAB_STATUS_INVALID_ARGUMENT = 2,
  TWISTLAB_STATUS_GEOMETRY = 3,
  TWISTLAB_STATUS_GAPLESS = 4,
  TWISTLAB_STATUS_UNCONVERGED = 5,
  TWISTLAB_STATUS_NUMERICAL = 6,
  TWISTLAB_STATUS_PANIC = 7,
} TwistlabStatus;

typedef enum TwistlabModel {
  /**
   * Parameters: `u`.
   */
  TWISTLAB_MODEL_QWZ = 0,
  /**
   * Parameters: `mu`, `delta`.
   */
  TWISTLAB_MODEL_PIP = 1,
  /**
   * No parameters.
   */
  TWISTLAB_MODEL_TRIVIAL = 2,
} TwistlabModel;

typedef struct TwistlabSystem TwistlabSystem;

typedef struct TwistlabParity {
  double nu;
  int64_t nu_rounded;
  int32_t z2;
  /**
   * Nonzero iff `nu_rounded` is even; `z8_re`, `z8_im` are zero otherwise.
   */
  int32_t has_z8;
  double z8_re;
  double z8_im;
} TwistlabParity;

typedef struct TwistlabTwist {
  double sigma;
  double theta_re;
  double theta_im;
  double omega_re;
  double omega_im;
} TwistlabTwist;

/**
 * Exact predictions; phases are `e^{2πi num/den}`.
 */
typedef struct TwistlabPredicted {
  double sigma;
  int64_t theta_num;
  int64_t theta_den;
  int64_t omega_num;
  int64_t omega_den;
  int32_t z2;
  int32_t has_z8;
  int64_t z8_num;
  int64_t z8_den;
} TwistlabPredicted;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Build a disk of the given radius around `(apex_x, apex_y)` and its
 * ground state. `model` is a `TwistlabModel` value; `p0`, `p1` are the
 * model parameters (unused ones ignored).
 * On success `*out` owns a handle to release with `twistlab_system_free`.
 *
 * # Safety
 * `out` must be null or valid for a pointer write.
 */
enum TwistlabStatus twistlab_system_new(int32_t model,
                                        double p0,
                                        double p1,
                                        double radius,
                                        double apex_x,
                                        double apex_y,
                                        struct TwistlabSystem **out);

/**
 * # Safety
 * `system` must be null or a handle from `twistlab_system_new` not yet freed.
 */
void twistlab_system_free(struct TwistlabSystem *system);

/**
 * Dimension of the one-particle space.
 *
 * # Safety
 * `system` must be a live handle or null; `out` valid or null.
 */
enum TwistlabStatus twistlab_system_dim(const struct TwistlabSystem *system, size_t *out);

/**
 * Real-space Chern number.
 *
 * # Safety
 * `system` must be a live handle or null; `out` valid or null.
 */
enum TwistlabStatus twistlab_chern_number(const struct TwistlabSystem *system, double *out);

/**
 * `Z/2` and `Z/8` parity indices.
 *
 * # Safety
 * `system` must be a live handle or null; `out` valid or null.
 */
enum TwistlabStatus twistlab_parity_indices(const struct TwistlabSystem *system,
                                            struct TwistlabParity *out);

/**
 * Twist statistics of `copies` (odd) stacked copies of the system.
 *
 * # Safety
 * `system` must be a live handle or null; `out` valid or null.
 */
enum TwistlabStatus twistlab_twist_statistics(const struct TwistlabSystem *system,
                                              size_t copies,
                                              struct TwistlabTwist *out);

/**
 * Momentum-space Chern number of a band model (`TwistlabModel` value) on a
 * `kgrid × kgrid` mesh.
 *
 * # Safety
 * `out` must be valid or null.
 */
enum TwistlabStatus twistlab_tknn_chern(int32_t model,
                                        double p0,
                                        double p1,
                                        size_t kgrid,
                                        int64_t *out);

/**
 * Closed-form predictions for Chern number `nu` on `copies` odd copies.
 *
 * # Safety
 * `out` must be valid or null.
 */
enum TwistlabStatus twistlab_predicted(int64_t nu, size_t copies, struct TwistlabPredicted *out);

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t twistlab_last_error(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *twistlab_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TWISTLAB_H */
