/* C API for the media profiling library. All functions return mp_status;
 * structured results come back as heap-allocated JSON strings that the caller
 * releases with mp_string_free. Handles are opaque and freed with their
 * matching *_free function. On any non-MP_OK return, mp_last_error() gives a
 * thread-local human-readable message. */
#ifndef MEDIAPROF_H
#define MEDIAPROF_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mp_status {
    MP_OK = 0,
    MP_ERR_INVALID = 1,        /* bad argument or contract violation */
    MP_ERR_PARSE = 2,          /* malformed input data */
    MP_ERR_NOT_FOUND = 3,      /* missing file, model, bundle, or plan */
    MP_ERR_NETWORK = 4,        /* backend unreachable after retries */
    MP_ERR_NO_CONVERGENCE = 5, /* iterative solver hit its bound */
    MP_ERR_RUNTIME = 6
} mp_status;

typedef struct mp_config mp_config;
typedef struct mp_dataset mp_dataset;
typedef struct mp_model mp_model;

const char* mp_version(void);

/* Message for the last failing call on this thread; empty after a success. */
const char* mp_last_error(void);

void mp_string_free(char* s);

/* ---- configuration ---- */
mp_status mp_config_load(const char* path, mp_config** out);
mp_status mp_config_set_seed(mp_config* config, uint32_t seed);
mp_status mp_config_set_jobs(mp_config* config, int jobs);
/* Path of the configured dataset snapshot. */
mp_status mp_config_dataset_path(const mp_config* config, char** path_out);
void mp_config_free(mp_config* config);

/* ---- dataset snapshots ---- */
mp_status mp_dataset_load(const char* path, mp_dataset** out);
int64_t mp_dataset_size(const mp_dataset* dataset);
/* task: "bias" | "factuality"; out: {"<label>": count, ...} */
mp_status mp_dataset_label_counts(const mp_dataset* dataset, const char* task, char** json_out);
void mp_dataset_free(mp_dataset* dataset);

/* ---- pipeline stages ---- */
/* sources_csv: comma-separated subset of
 * articles,twitter,youtube,facebook,wikipedia; NULL or "" means all. */
mp_status mp_ingest(const mp_config* config, const mp_dataset* dataset, const char* sources_csv,
                    char** summary_json_out);

mp_status mp_featurize(const mp_config* config, const mp_dataset* dataset, const char* task,
                       char** summary_json_out);

/* features_csv: comma-separated registry ids; model_out may be NULL for the
 * configured models directory. */
mp_status mp_train(const mp_config* config, const mp_dataset* dataset, const char* task,
                   const char* features_csv, int folds, const char* model_out,
                   char** summary_json_out);

mp_status mp_evaluate(const mp_config* config, const mp_dataset* dataset, const char* task,
                      const char* features_csv, int folds, char** eval_json_out);

/* plan: bundled plan name or path to a plan file; out_dir may be NULL for the
 * configured reports directory. */
mp_status mp_ablate(const mp_config* config, const mp_dataset* dataset, const char* plan,
                    const char* out_dir, char** report_json_out);

/* format: "json" | "markdown" | "csv" */
mp_status mp_render_report(const char* report_json, const char* format, char** text_out);

/* ---- trained models ---- */
mp_status mp_model_open(const char* path, mp_model** out);
/* "bias" or "factuality" */
mp_status mp_model_task(const mp_model* model, char** task_out);
void mp_model_free(mp_model* model);

/* Calibrated posteriors for one medium, for every model passed (either may be
 * NULL, not both). */
mp_status mp_predict(const mp_config* config, const mp_model* bias_model,
                     const mp_model* factuality_model, const char* medium_id,
                     char** prediction_json_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MEDIAPROF_H */
