// Copyright 2026 The mecdt Authors.
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

// C interface to the MEC resource-allocation simulator, the prompt decision
// transformer, and the federated training / evaluation pipeline.
//
// All objects are opaque handles created by *_create / *_load functions and
// released with the matching *_free. Every fallible call returns a
// mecdt_status; on failure mecdt_last_error() describes the problem for the
// calling thread until its next failing call.
//
// Buffers: functions that fill a caller buffer take its capacity and report
// the required size through 'needed' (including the terminating NUL for
// strings). A too-small buffer yields MECDT_E_INVALID_ARGUMENT with *needed
// set, so callers can retry. Passing buf == NULL and len == 0 queries the
// size and returns MECDT_OK.

#ifndef MECDT_MECDT_H_
#define MECDT_MECDT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MECDT_API __declspec(dllexport)
#else
#define MECDT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mecdt_status {
  MECDT_OK = 0,
  MECDT_E_INVALID_ARGUMENT = 1,
  MECDT_E_CONFIG = 2,
  MECDT_E_PARSE = 3,
  MECDT_E_IO = 4,
  MECDT_E_INTEGRITY = 5,
  MECDT_E_INFEASIBLE = 6,
  MECDT_E_INTERNAL = 7
} mecdt_status;

typedef struct mecdt_config mecdt_config;
typedef struct mecdt_env mecdt_env;
typedef struct mecdt_model mecdt_model;

// User levels for mecdt_env_reset.
enum { MECDT_LEVEL_STANDARD = 0, MECDT_LEVEL_ADVANCED = 1, MECDT_LEVEL_PREMIUM = 2 };

MECDT_API const char* mecdt_version(void);
MECDT_API const char* mecdt_last_error(void);
MECDT_API const char* mecdt_status_name(mecdt_status status);
// Process exit code for a status: 0 ok, 3 data/checkpoint integrity, 2 for
// every other failure (usage, config, missing files).
MECDT_API int mecdt_exit_code(mecdt_status status);

// ---- Configuration --------------------------------------------------------

// Shipped defaults. Environment overrides are not applied.
MECDT_API mecdt_status mecdt_config_default(mecdt_config** out);
// Parses an INI file and applies MECDT_<SECTION>_<KEY> overrides.
MECDT_API mecdt_status mecdt_config_load(const char* path, mecdt_config** out);
// key is "section.key", e.g. "fl.rounds". Values use the INI syntax. The
// config is validated by the operations that consume it.
MECDT_API mecdt_status mecdt_config_set(mecdt_config* cfg, const char* key,
                                        const char* value);
MECDT_API mecdt_status mecdt_config_get(const mecdt_config* cfg, const char* key,
                                        char* buf, size_t len, size_t* needed);
// Resolved INI text of the whole config.
MECDT_API mecdt_status mecdt_config_dump(const mecdt_config* cfg, char* buf,
                                         size_t len, size_t* needed);
MECDT_API mecdt_status mecdt_config_validate(const mecdt_config* cfg);
MECDT_API void mecdt_config_free(mecdt_config* cfg);

// ---- Pipeline -------------------------------------------------------------

// Writes shard_<e>.bin per server, envs.json, manifest.json, config.ini and
// run.json into out_dir.
MECDT_API mecdt_status mecdt_gen_data(const mecdt_config* cfg, const char* out_dir);
// Federated training from a gen-data directory. With resume != 0 training
// continues from the newest checkpoint in out_dir.
MECDT_API mecdt_status mecdt_train(const mecdt_config* cfg, const char* data_dir,
                                   const char* out_dir, int resume);
// Evaluation on the held-out environments; writes summary.json and CSVs.
MECDT_API mecdt_status mecdt_eval(const mecdt_config* cfg, const char* checkpoint,
                                  const char* out_dir);
// axis: qoe_th, hfqoe_th, bandwidth (MHz), frequency (GHz), rtg, prompt_len.
// grid == NULL with n == 0 uses the default grid.
MECDT_API mecdt_status mecdt_sweep(const mecdt_config* cfg, const char* checkpoint,
                                   const char* axis, const double* grid, size_t n,
                                   const char* out_dir);

// ---- Environment ----------------------------------------------------------

MECDT_API mecdt_status mecdt_env_create(const mecdt_config* cfg, mecdt_env** out);
// levels: one MECDT_LEVEL_* per active user.
MECDT_API mecdt_status mecdt_env_reset(mecdt_env* env, const int* levels,
                                       size_t users, uint64_t seed);
// Raw state length 11 * K_max + 2 and action length 5 * K_max.
MECDT_API size_t mecdt_env_state_dim(const mecdt_env* env);
MECDT_API size_t mecdt_env_action_dim(const mecdt_env* env);
MECDT_API mecdt_status mecdt_env_state(const mecdt_env* env, double* out, size_t len);
// Applies one allocation action (entries in [0, 1], 5 per user slot).
MECDT_API mecdt_status mecdt_env_step(mecdt_env* env, const double* action,
                                      size_t len, double* reward, int* done);
MECDT_API void mecdt_env_free(mecdt_env* env);

// ---- Model ----------------------------------------------------------------

typedef struct mecdt_model_info {
  int state_dim;
  int action_dim;
  int embed_dim;
  int layers;
  int prompt_len;
  int context_len;
  int round;
  int use_prompt;
} mecdt_model_info;

// expected may be NULL; otherwise the checkpoint dimensions must match it.
MECDT_API mecdt_status mecdt_model_load(const char* path, const mecdt_config* expected,
                                        mecdt_model** out);
MECDT_API mecdt_status mecdt_model_info_get(const mecdt_model* model,
                                            mecdt_model_info* out);
// Plays one evaluation episode (eval.t_te steps) and reports its EP reward.
MECDT_API mecdt_status mecdt_model_rollout(const mecdt_model* model,
                                           const mecdt_config* cfg, const int* levels,
                                           size_t users, uint64_t seed, double rtg,
                                           double* ep_reward);
MECDT_API void mecdt_model_free(mecdt_model* model);

#ifdef __cplusplus
}  // extern "C"
#endif

#endif  // MECDT_MECDT_H_
