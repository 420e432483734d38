#ifndef SCICOE_H
#define SCICOE_H
/*
 * C interface to the solver/verifier co-evolution library.
 *
 * Every function returns a scicoe_status. On failure the message is
 * available from scicoe_last_error() until the next call on the same thread.
 * Handles are opaque and released with their *_destroy function.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SCICOE_API __declspec(dllexport)
#else
#define SCICOE_API __attribute__((visibility("default")))
#endif

typedef enum scicoe_status {
    SCICOE_OK = 0,
    SCICOE_ERR_INTERNAL = 1,
    SCICOE_ERR_INPUT = 2,       /* parse, config or I/O problem */
    SCICOE_ERR_CONSISTENCY = 3, /* inputs disagree with each other */
    SCICOE_ERR_DEGENERATE = 4   /* numerical degeneracy */
} scicoe_status;

typedef struct scicoe_matrix scicoe_matrix;
typedef struct scicoe_config scicoe_config;
typedef struct scicoe_train_log scicoe_train_log;

SCICOE_API const char* scicoe_version(void);
SCICOE_API const char* scicoe_last_error(void);

/* Verification matrix from (i, j, bit) triples; every cell exactly once. */
SCICOE_API scicoe_status scicoe_matrix_create(size_t n, size_t m, const size_t* rows, const size_t* cols,
                                              const uint8_t* bits, size_t count, scicoe_matrix** out);
SCICOE_API void scicoe_matrix_destroy(scicoe_matrix* matrix);
SCICOE_API scicoe_status scicoe_matrix_dims(const scicoe_matrix* matrix, size_t* n, size_t* m);
SCICOE_API scicoe_status scicoe_matrix_pass_rate(const scicoe_matrix* matrix, size_t i, double* out);
SCICOE_API scicoe_status scicoe_matrix_best_of_n(const scicoe_matrix* matrix, size_t* out);

/* Anchored verifier rewards for a labeled matrix; out has m entries. */
SCICOE_API scicoe_status scicoe_reward_anchored(const scicoe_matrix* matrix, const uint8_t* labels, size_t n_labels,
                                                double* out);

/* Configuration: defaults, then file and key/value overrides. */
SCICOE_API scicoe_status scicoe_config_create(scicoe_config** out);
SCICOE_API scicoe_status scicoe_config_load(const char* path, scicoe_config** out);
SCICOE_API void scicoe_config_destroy(scicoe_config* config);
SCICOE_API scicoe_status scicoe_config_set(scicoe_config* config, const char* key, const char* value);
/* Copies the value into buf (NUL-terminated); *needed receives the full length + 1. */
SCICOE_API scicoe_status scicoe_config_get(const scicoe_config* config, const char* key, char* buf, size_t buf_size,
                                           size_t* needed);
SCICOE_API scicoe_status scicoe_config_set_jobs(scicoe_config* config, size_t jobs);
SCICOE_API scicoe_status scicoe_config_validate(const scicoe_config* config);

/* In-memory simulation. */
SCICOE_API scicoe_status scicoe_train(const scicoe_config* config, scicoe_train_log** out);
SCICOE_API void scicoe_train_log_destroy(scicoe_train_log* log);
SCICOE_API size_t scicoe_train_log_size(const scicoe_train_log* log);
/* Value of a TrainLog column ("bon_acc", "dispersion", ...) at record `row`. */
SCICOE_API scicoe_status scicoe_train_log_value(const scicoe_train_log* log, size_t row, const char* column,
                                                double* out);

/* File-level commands; the exit code of the CLI is the returned status. */
SCICOE_API scicoe_status scicoe_cmd_reward_stage1(const char* matrix_path, const char* labels_path,
                                                  const char* out_path, size_t jobs);
SCICOE_API scicoe_status scicoe_cmd_reward_stage2(const char* matrix_path, const char* embeddings_path,
                                                  const scicoe_config* config, const char* out_path,
                                                  const char* geometry_csv_path, size_t jobs);
SCICOE_API scicoe_status scicoe_cmd_simulate(const scicoe_config* config, const char* out_dir);
/* Writes the table to out_path when non-NULL; otherwise to stdout. */
SCICOE_API scicoe_status scicoe_cmd_analyze(const char* const* log_paths, size_t count, const char* out_path);
SCICOE_API scicoe_status scicoe_cmd_rerun(const char* manifest_path, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif
