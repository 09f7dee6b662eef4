// Copyright 2026 The CWT Authors. All Rights Reserved.
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

/* C interface to the cyclic weight transfer library. All functions return a
 * cwt_status; on failure cwt_last_error() describes the fault for the
 * calling thread. Strings returned through char** are freed with
 * cwt_string_free. */

#ifndef CWT_CWT_H_
#define CWT_CWT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(CWT_BUILDING_LIBRARY)
#define CWT_API __attribute__((visibility("default")))
#else
#define CWT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct cwt_config cwt_config;
typedef struct cwt_network cwt_network;

typedef enum cwt_status {
  CWT_OK = 0,
  CWT_ERR_INVALID_ARGUMENT = 1,
  CWT_ERR_CONTRACT = 2,
  CWT_ERR_VALIDATION = 3,
  CWT_ERR_PARSE = 4,
  CWT_ERR_INCOMPATIBLE = 5,
  CWT_ERR_NUMERIC = 6,
  CWT_ERR_PROTOCOL = 7,
  CWT_ERR_TIMEOUT = 8,
  CWT_ERR_CONFIG = 9,
  CWT_ERR_IO = 10,
  CWT_ERR_GENERATION = 11,
  CWT_ERR_DEGENERATE = 12,
  CWT_ERR_UNDEFINED_CORRELATION = 13,
  CWT_ERR_INTERNAL = 14
} cwt_status;

/* Process exit codes used by the command-line tool. */
enum {
  CWT_EXIT_OK = 0,
  CWT_EXIT_FAILURE = 1,
  CWT_EXIT_CONFIG = 2,
  CWT_EXIT_PROTOCOL = 3,
  CWT_EXIT_NUMERIC = 4
};

typedef enum cwt_log_level {
  CWT_LOG_DEBUG = 0,
  CWT_LOG_INFO = 1,
  CWT_LOG_WARNING = 2,
  CWT_LOG_ERROR = 3
} cwt_log_level;

typedef void (*cwt_log_fn)(cwt_log_level level, const char* message, void* user);

CWT_API const char* cwt_version(void);
CWT_API const char* cwt_last_error(void);
CWT_API const char* cwt_status_name(cwt_status status);
CWT_API int cwt_exit_code(cwt_status status);
CWT_API void cwt_string_free(char* s);

/* Installs a process-wide log handler; NULL silences logging. */
CWT_API void cwt_set_log_handler(cwt_log_fn fn, void* user);

/* Configuration. profile is "ci" or "paper". */
CWT_API cwt_status cwt_config_profile(const char* profile, cwt_config** out);
/* profile_override, when non-NULL, replaces the file's "profile" key. */
CWT_API cwt_status cwt_config_load(const char* path, const char* profile_override, cwt_config** out);
CWT_API cwt_status cwt_config_from_json(const char* json, cwt_config** out);
CWT_API void cwt_config_free(cwt_config* cfg);
CWT_API cwt_status cwt_config_set_seed(cwt_config* cfg, uint64_t seed);
/* NULL or "" clears the store path. */
CWT_API cwt_status cwt_config_set_store(cwt_config* cfg, const char* path);
CWT_API cwt_status cwt_config_to_json(const cwt_config* cfg, char** json_out);

/* Pipeline. data_dir holds the output of cwt_generate_data. Checkpoint
 * paths of trained models are returned through path_out. */
CWT_API cwt_status cwt_generate_data(const cwt_config* cfg, const char* out_dir, char** manifest_out);
CWT_API cwt_status cwt_train_ssl(const cwt_config* cfg, const char* data_dir, const char* site,
                                 const char* out_dir, char** path_out);
/* All sites in-process, one thread each. Uses the configured store
 * directory if set, an in-memory store otherwise. */
CWT_API cwt_status cwt_train_msl(const cwt_config* cfg, const char* data_dir, const char* out_dir,
                                 char** path_out);
/* One site's worker against the configured store directory. */
CWT_API cwt_status cwt_run_site_worker(const cwt_config* cfg, const char* data_dir, const char* site,
                                       const char* out_dir, char** path_out);
CWT_API cwt_status cwt_evaluate(const cwt_config* cfg, const char* data_dir, size_t count,
                                const char* const* names, const char* const* checkpoint_paths,
                                const char* out_dir, char** table_out);
/* Renders the table stored in report_dir/report.csv. */
CWT_API cwt_status cwt_report(const char* report_dir, char** table_out);

/* Networks. */
CWT_API cwt_status cwt_network_load(const cwt_config* cfg, const char* checkpoint_path, cwt_network** out);
CWT_API void cwt_network_free(cwt_network* net);
CWT_API size_t cwt_network_parameter_count(const cwt_network* net);
CWT_API cwt_status cwt_network_save(const cwt_network* net, const char* path);
/* Probability map for one [height, width] slice, row-major. */
CWT_API cwt_status cwt_network_predict(const cwt_network* net, const float* image, size_t height, size_t width,
                                       float* probabilities);

#ifdef __cplusplus
}
#endif

#endif /* CWT_CWT_H_ */
