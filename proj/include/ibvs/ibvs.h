/* C interface to the visual servoing simulator. All objects are opaque and
 * owned by the caller once created; release them with the matching _free
 * function. Functions return IBVS_OK or an error code; ibvs_last_error()
 * describes the most recent failure on the calling thread. */
#ifndef IBVS_IBVS_H
#define IBVS_IBVS_H

#include <stddef.h>
#include <stdint.h>

#if defined(IBVS_BUILDING_LIBRARY)
#define IBVS_API __attribute__((visibility("default")))
#else
#define IBVS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ibvs_status {
  IBVS_OK = 0,
  IBVS_ERR_INVALID_ARGUMENT = 1,
  IBVS_ERR_CAMERA_INSIDE_SPHERE = 2,
  IBVS_ERR_BEHIND_CAMERA = 3,
  IBVS_ERR_DEGENERATE_NORMAL = 4,
  IBVS_ERR_ZERO_OBSERVED_DIAMETER = 5,
  IBVS_ERR_NOT_IN_VIEW = 6,
  IBVS_ERR_SINGULAR_INTERACTION = 7,
  IBVS_ERR_EMPTY_MASK = 8,
  IBVS_ERR_NO_BOUNDARY = 9,
  IBVS_ERR_TOO_FEW_POINTS = 10,
  IBVS_ERR_NO_CONSENSUS = 11,
  IBVS_ERR_CONFIG = 12,
  IBVS_ERR_IO = 13,
  IBVS_ERR_INTERNAL = 99
} ibvs_status;

typedef enum ibvs_outcome {
  IBVS_OUTCOME_CONVERGED = 0,
  IBVS_OUTCOME_TIMEOUT = 2,
  IBVS_OUTCOME_TRACK_LOST = 3
} ibvs_outcome;

typedef struct ibvs_scenario ibvs_scenario;
typedef struct ibvs_run ibvs_run;

typedef struct ibvs_run_options {
  int has_seed;
  uint64_t seed;
  int max_iterations;    /* <= 0 keeps the scenario's limit */
  const char* frame_dir; /* NULL disables per-frame dumps */
  int analytic_features; /* nonzero bypasses renderer and tracker */
} ibvs_run_options;

/* Ellipse in normalized image coordinates. */
typedef struct ibvs_ellipse {
  double center_x;
  double center_y;
  double semi_major;
  double semi_minor;
  double orientation;
} ibvs_ellipse;

IBVS_API const char* ibvs_version(void);
IBVS_API const char* ibvs_status_string(ibvs_status status);
IBVS_API const char* ibvs_last_error(void);
IBVS_API const char* ibvs_outcome_string(ibvs_outcome outcome);

IBVS_API ibvs_status ibvs_scenario_load(const char* path, ibvs_scenario** out);
IBVS_API ibvs_status ibvs_scenario_parse(const char* json_text, ibvs_scenario** out);
IBVS_API void ibvs_scenario_free(ibvs_scenario* scenario);
/* The returned string lives as long as the scenario. */
IBVS_API ibvs_status ibvs_scenario_name(const ibvs_scenario* scenario, const char** out);
IBVS_API ibvs_status ibvs_scenario_seed(const ibvs_scenario* scenario, uint64_t* out);

IBVS_API void ibvs_run_options_init(ibvs_run_options* options);
IBVS_API ibvs_status ibvs_run_scenario(const ibvs_scenario* scenario, const ibvs_run_options* options,
                                       ibvs_run** out);
IBVS_API void ibvs_run_free(ibvs_run* run);
IBVS_API ibvs_status ibvs_run_outcome(const ibvs_run* run, ibvs_outcome* out);
IBVS_API ibvs_status ibvs_run_iterations(const ibvs_run* run, int* out);
IBVS_API ibvs_status ibvs_run_final_error(const ibvs_run* run, double* out);
IBVS_API ibvs_status ibvs_run_wall_time(const ibvs_run* run, double* out);
IBVS_API ibvs_status ibvs_run_seed(const ibvs_run* run, uint64_t* out);
/* Squared feature error of trace row `index` (NaN when the row has no observation). */
IBVS_API ibvs_status ibvs_run_error_at(const ibvs_run* run, int index, double* out);
IBVS_API ibvs_status ibvs_run_write_trace(const ibvs_run* run, const char* path);
IBVS_API ibvs_status ibvs_run_write_summary(const ibvs_run* run, const char* path);

/* Sphere (x, y, z, radius) in the camera frame. */
IBVS_API ibvs_status ibvs_project_sphere(const double sphere[4], ibvs_ellipse* out);
/* (xg, yg, mu20, mu11, mu02) */
IBVS_API ibvs_status ibvs_features_from_ellipse(const ibvs_ellipse* ellipse, double features[5]);

#ifdef __cplusplus
}
#endif

#endif /* IBVS_IBVS_H */
