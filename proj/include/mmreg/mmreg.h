/* C interface to the multi-body registration library. */
#ifndef MMREG_H
#define MMREG_H

#include <stddef.h>
#include <stdint.h>

#if defined(MMREG_BUILDING_LIBRARY)
#define MMREG_API __attribute__((visibility("default")))
#else
#define MMREG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mmreg_status {
  MMREG_OK = 0,
  MMREG_INVALID_ARGUMENT = 1, /* bad config key/value or null pointer */
  MMREG_ALGORITHM = 2,        /* algorithm ran but failed (e.g. no viable clusters) */
  MMREG_IO = 3,
  MMREG_PARSE = 4,
  MMREG_INFEASIBLE = 5, /* scene spec cannot be packed */
  MMREG_INTERNAL = 6
} mmreg_status;

typedef struct mmreg_config mmreg_config;
typedef struct mmreg_scene mmreg_scene;
typedef struct mmreg_result mmreg_result;

MMREG_API const char* mmreg_version(void);

/* Message for the last failing call on this thread; "" if none. */
MMREG_API const char* mmreg_last_error(void);

/* Frees strings returned by functions documented as "caller frees". */
MMREG_API void mmreg_string_free(char* s);

MMREG_API mmreg_status mmreg_config_create(mmreg_config** out);
MMREG_API void mmreg_config_destroy(mmreg_config* cfg);
MMREG_API mmreg_status mmreg_config_load(mmreg_config* cfg, const char* path);
MMREG_API mmreg_status mmreg_config_set(mmreg_config* cfg, const char* key, const char* value);
/* "key=value" form. */
MMREG_API mmreg_status mmreg_config_set_assignment(mmreg_config* cfg, const char* assignment);
/* Caller frees *out. */
MMREG_API mmreg_status mmreg_config_get(const mmreg_config* cfg, const char* key, char** out);
/* 16 hex digits plus NUL. */
MMREG_API mmreg_status mmreg_config_hash(const mmreg_config* cfg, char out[17]);

MMREG_API mmreg_status mmreg_scene_generate(const mmreg_config* cfg, mmreg_scene** out);
MMREG_API mmreg_status mmreg_scene_load(const char* path, mmreg_scene** out);
MMREG_API mmreg_status mmreg_scene_save(const mmreg_scene* scene, const char* path);
MMREG_API void mmreg_scene_destroy(mmreg_scene* scene);
MMREG_API size_t mmreg_scene_size(const mmreg_scene* scene);
MMREG_API int mmreg_scene_num_objects(const mmreg_scene* scene);
MMREG_API double mmreg_scene_sigma(const mmreg_scene* scene);
MMREG_API double mmreg_scene_tau(const mmreg_scene* scene);
/* a[3], b[3], *label (0 = outlier). */
MMREG_API mmreg_status mmreg_scene_correspondence(const mmreg_scene* scene, size_t i, double a[3],
                                                  double b[3], int* label);

/* Runs the configured algorithm. When the algorithm itself fails a result is
   still produced (status "error") and MMREG_ALGORITHM is returned. */
MMREG_API mmreg_status mmreg_run(const mmreg_config* cfg, const mmreg_scene* scene, mmreg_result** out);

/* Evaluates a prediction file against a scene. The file is either a result
   file written by mmreg_result_save or a plain clustering (one label per
   line), in which case cluster motions are fitted from the labels. */
MMREG_API mmreg_status mmreg_eval(const mmreg_scene* scene, const char* pred_path, mmreg_result** out);

MMREG_API mmreg_status mmreg_result_save(const mmreg_result* res, const char* path);
/* Known names: point_error, point_error_per_point, rotation_error,
   translation_error, mask_iou, em_iterations, em_converged, wall_seconds. */
MMREG_API mmreg_status mmreg_result_metric(const mmreg_result* res, const char* name, double* out);
MMREG_API int mmreg_result_num_clusters(const mmreg_result* res);
/* 1 if the algorithm succeeded. */
MMREG_API int mmreg_result_ok(const mmreg_result* res);
MMREG_API const char* mmreg_result_error(const mmreg_result* res);
/* Copies up to n labels; returns the total count. */
MMREG_API size_t mmreg_result_labels(const mmreg_result* res, int* out, size_t n);
MMREG_API void mmreg_result_destroy(mmreg_result* res);

/* Runs the bench suite selected by bench.suite and writes both CSV files. */
MMREG_API mmreg_status mmreg_bench(const mmreg_config* cfg, const char* csv_path, const char* summary_path);

/* Single-body registration of n >= 3 correspondences; R is row-major. */
MMREG_API mmreg_status mmreg_horn_register(const double* a, const double* b, size_t n, double R[9],
                                           double t[3], double* sigma_hat);

#ifdef __cplusplus
}
#endif

#endif /* MMREG_H */
