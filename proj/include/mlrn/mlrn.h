// Copyright 2026 The MLRN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MLRN_MLRN_H_
#define MLRN_MLRN_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(MLRN_BUILDING_LIBRARY)
#define MLRN_API __declspec(dllexport)
#else
#define MLRN_API __declspec(dllimport)
#endif
#else
#define MLRN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mlrn_status {
  MLRN_OK = 0,
  MLRN_ERR_INVALID_ARGUMENT = 1,
  MLRN_ERR_SHAPE = 2,
  MLRN_ERR_IO = 3,
  MLRN_ERR_FORMAT = 4,
  MLRN_ERR_NUMERIC = 5,
  MLRN_ERR_STATE = 6,
  MLRN_ERR_DOMAIN = 7,
  MLRN_ERR_INTERNAL = 99
} mlrn_status;

/* Message of the last failed call on this thread; "" when none. */
MLRN_API const char* mlrn_last_error(void);
MLRN_API const char* mlrn_status_name(mlrn_status status);
MLRN_API const char* mlrn_version(void);

/* Strings returned through char** out-parameters are released with this. */
MLRN_API void mlrn_string_free(char* s);

/* ---- configuration ---------------------------------------------------- */

typedef struct mlrn_config mlrn_config;

MLRN_API mlrn_status mlrn_config_new(mlrn_config** out);
MLRN_API mlrn_status mlrn_config_load(const char* path, mlrn_config** out);
MLRN_API mlrn_status mlrn_config_parse(const char* text, mlrn_config** out);
/* Dotted keys as in config files, e.g. "optimizer.lr". */
MLRN_API mlrn_status mlrn_config_set(mlrn_config* cfg, const char* key, const char* value);
MLRN_API mlrn_status mlrn_config_format(const mlrn_config* cfg, char** out_text);
MLRN_API void mlrn_config_free(mlrn_config* cfg);

/* ---- datasets --------------------------------------------------------- */

typedef struct mlrn_dataset mlrn_dataset;

/* Generates `count` samples from the config's generator section with the
 * given seed. */
MLRN_API mlrn_status mlrn_dataset_generate(const mlrn_config* cfg, uint64_t count, uint64_t seed,
                                           mlrn_dataset** out);
MLRN_API mlrn_status mlrn_dataset_read(const char* path, mlrn_dataset** out);
MLRN_API mlrn_status mlrn_dataset_write(const mlrn_dataset* ds, const char* path);
MLRN_API size_t mlrn_dataset_size(const mlrn_dataset* ds);
MLRN_API size_t mlrn_dataset_image_size(const mlrn_dataset* ds);
MLRN_API mlrn_status mlrn_dataset_target(const mlrn_dataset* ds, size_t index, uint8_t* out);
/* Copies 16 * S * S pixel bytes of one sample into `out`. */
MLRN_API mlrn_status mlrn_dataset_panels(const mlrn_dataset* ds, size_t index, uint8_t* out, size_t out_len);
MLRN_API void mlrn_dataset_free(mlrn_dataset* ds);

/* ---- training --------------------------------------------------------- */

typedef struct mlrn_epoch_metrics {
  uint64_t epoch;
  double training_acc;
  double training_loss;
  double validation_acc;
  double validation_loss;
} mlrn_epoch_metrics;

typedef void (*mlrn_epoch_callback)(const mlrn_epoch_metrics* row, void* user);

typedef struct mlrn_train_options {
  const char* train_path;       /* required */
  const char* val_path;         /* optional */
  const char* checkpoint_path;  /* optional; rewritten every epoch */
  const char* metrics_path;     /* optional; rewritten every epoch */
  const char* resume_path;      /* optional checkpoint to continue from */
  mlrn_epoch_callback on_epoch; /* optional */
  void* user;
} mlrn_train_options;

MLRN_API mlrn_status mlrn_train(const mlrn_config* cfg, const mlrn_train_options* options);

/* ---- models and evaluation ------------------------------------------- */

typedef struct mlrn_model mlrn_model;
typedef struct mlrn_report mlrn_report;

MLRN_API mlrn_status mlrn_model_load(const char* checkpoint_path, mlrn_model** out);
MLRN_API size_t mlrn_model_parameter_count(const mlrn_model* model);
/* Scores the 8 candidates of one sample. */
MLRN_API mlrn_status mlrn_model_scores(mlrn_model* model, const mlrn_dataset* ds, size_t index, float scores[8]);
MLRN_API void mlrn_model_free(mlrn_model* model);

MLRN_API mlrn_status mlrn_evaluate(mlrn_model* model, const mlrn_dataset* ds, mlrn_report** out);
/* Rows in table order, then "All single acc", "Total acc", "Total error". */
MLRN_API size_t mlrn_report_row_count(const mlrn_report* report);
MLRN_API mlrn_status mlrn_report_row(const mlrn_report* report, size_t index, const char** name, double* value);
MLRN_API double mlrn_report_total_acc(const mlrn_report* report);
MLRN_API mlrn_status mlrn_report_format(const mlrn_report* report, char** out_text);
MLRN_API void mlrn_report_free(mlrn_report* report);

/* ---- diagnostics ------------------------------------------------------ */

typedef enum mlrn_gradcheck_scale { MLRN_GRADCHECK_TINY = 0, MLRN_GRADCHECK_SMALL = 1 } mlrn_gradcheck_scale;

typedef struct mlrn_gradcheck_result {
  double max_relative_error;
  uint64_t checked;
  uint64_t skipped_kinks;
} mlrn_gradcheck_result;

/* Finite-difference check of an end-to-end model at 64-bit precision. */
MLRN_API mlrn_status mlrn_gradcheck(mlrn_gradcheck_scale scale, mlrn_gradcheck_result* out);

typedef struct mlrn_seed_run {
  uint64_t seed;
  double training_acc;
  double validation_acc;
} mlrn_seed_run;

typedef void (*mlrn_seed_callback)(const mlrn_seed_run* run, void* user);

/* Trains n_seeds runs (seeds train.seed, train.seed + 1, ...) on the same
 * data and returns the summary table with the two-cluster split. */
MLRN_API mlrn_status mlrn_multiseed(const mlrn_config* cfg, size_t n_seeds, mlrn_seed_callback on_run, void* user,
                                    char** out_summary);

#ifdef __cplusplus
}
#endif

#endif /* MLRN_MLRN_H_ */
