#ifndef PHMOTION_H
#define PHMOTION_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum PhmStatus {
  PHM_STATUS_OK = 0,
  PHM_STATUS_NULL_POINTER = 1,
  PHM_STATUS_INVALID_ARGUMENT = 2,
  PHM_STATUS_NON_FINITE = 3,
  PHM_STATUS_DEGENERATE = 4,
  PHM_STATUS_NEAR_ANTIPODAL = 5,
  PHM_STATUS_RESIDUAL_TOO_LARGE = 6,
  PHM_STATUS_NON_MONOTONIC = 7,
  PHM_STATUS_TOO_FEW_SAMPLES = 8,
  PHM_STATUS_OUT_OF_RANGE = 9,
  PHM_STATUS_PANIC = 10,
} PhmStatus;

typedef struct PhmPredictor PhmPredictor;

typedef struct PhmSegment PhmSegment;

typedef struct PhmTrajectory PhmTrajectory;

/**
 * Reconstruction settings; fill with [`phm_config_default`].
 */
typedef struct PhmConfig {
  double phi0;
  double phi1;
  double phi2;
  double kappa_max;
  double tau_max;
  /**
   * 0 for rotation-minimising frames, 1 for Frenet frames.
   */
  int32_t frenet_frames;
} PhmConfig;

/**
 * A timestamped pose. Orientation is stored x, y, z, w.
 */
typedef struct PhmPose {
  double t;
  double position[3];
  double orientation[4];
} PhmPose;

/**
 * A moving frame sample.
 */
typedef struct PhmFrame {
  double t;
  double point[3];
  double tangent[3];
  double normal[3];
  double binormal[3];
  double curvature;
  /**
   * Meaningful only when `torsion_defined` is non-zero.
   */
  double torsion;
  int32_t torsion_defined;
  double theta;
} PhmFrame;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *phm_last_error_message(void);

/**
 * Static description of a status code.
 */
const char *phm_status_string(enum PhmStatus status);

/**
 * Writes the default configuration to `out`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum PhmStatus phm_config_default(struct PhmConfig *out);

/**
 * Builds the segment between two poses. `config` may be null for
 * defaults. On success `*out` owns a handle for [`phm_segment_free`].
 *
 * # Safety
 * Non-null pointers must be valid; `out` must be valid for writes.
 */
enum PhmStatus phm_segment_new(const struct PhmPose *start,
                               const struct PhmPose *end,
                               const struct PhmConfig *config,
                               struct PhmSegment **out);

/**
 * Pose (and, if `frame` is non-null, frame) at absolute time `t`,
 * clamped to the segment.
 *
 * # Safety
 * `segment` must come from [`phm_segment_new`]; `pose` must be valid for
 * writes; `frame` must be null or valid for writes.
 */
enum PhmStatus phm_segment_sample(const struct PhmSegment *segment,
                                  double t,
                                  struct PhmPose *pose,
                                  struct PhmFrame *frame);

/**
 * 1 if the segment is the straight-line fallback, 0 if it is a PH curve,
 * -1 for a null handle.
 *
 * # Safety
 * `segment` must be null or come from [`phm_segment_new`].
 */
int32_t phm_segment_is_fallback(const struct PhmSegment *segment);

/**
 * Arc length of the segment in metres.
 *
 * # Safety
 * `segment` must come from [`phm_segment_new`]; `out` must be valid for
 * writes.
 */
enum PhmStatus phm_segment_length(const struct PhmSegment *segment, double *out);

/**
 * # Safety
 * `segment` must be null or a handle not yet freed.
 */
void phm_segment_free(struct PhmSegment *segment);

/**
 * Reconstructs `count` poses at `rate` Hz.
 *
 * # Safety
 * `poses` must point to `count` readable poses; `config` may be null;
 * `out` must be valid for writes.
 */
enum PhmStatus phm_trajectory_reconstruct(const struct PhmPose *poses,
                                          size_t count,
                                          double rate,
                                          const struct PhmConfig *config,
                                          struct PhmTrajectory **out);

/**
 * Number of samples, 0 for a null handle.
 *
 * # Safety
 * `traj` must be null or come from [`phm_trajectory_reconstruct`].
 */
size_t phm_trajectory_len(const struct PhmTrajectory *traj);

/**
 * Sample `index`; `frame` may be null.
 *
 * # Safety
 * `traj` must come from [`phm_trajectory_reconstruct`]; `pose` must be
 * valid for writes; `frame` must be null or valid for writes.
 */
enum PhmStatus phm_trajectory_get(const struct PhmTrajectory *traj,
                                  size_t index,
                                  struct PhmPose *pose,
                                  struct PhmFrame *frame);

/**
 * # Safety
 * `traj` must be null or a handle not yet freed.
 */
void phm_trajectory_free(struct PhmTrajectory *traj);

/**
 * Starts a predictor at its first measurement with default noise
 * settings.
 *
 * # Safety
 * `first` must be valid; `out` must be valid for writes.
 */
enum PhmStatus phm_predictor_new(const struct PhmPose *first, struct PhmPredictor **out);

/**
 * Corrects the predictor with a new measurement. On failure the state is
 * unchanged.
 *
 * # Safety
 * `predictor` must come from [`phm_predictor_new`]; `measured` must be
 * valid.
 */
enum PhmStatus phm_predictor_update(struct PhmPredictor *predictor, const struct PhmPose *measured);

/**
 * Pose `horizon` seconds after the latest measurement.
 *
 * # Safety
 * `predictor` must come from [`phm_predictor_new`]; `out` must be valid
 * for writes.
 */
enum PhmStatus phm_predictor_predict(const struct PhmPredictor *predictor,
                                     double horizon,
                                     struct PhmPose *out);

/**
 * # Safety
 * `predictor` must be null or a handle not yet freed.
 */
void phm_predictor_free(struct PhmPredictor *predictor);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHMOTION_H */
