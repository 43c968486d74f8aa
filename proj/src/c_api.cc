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

#include "mecdt/mecdt.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "env.h"
#include "evalharness.h"
#include "model.h"
#include "pipeline.h"
#include "run_config.h"
#include "status.h"

struct mecdt_config {
  mecdt::RunConfig cfg;
};

struct mecdt_env {
  std::unique_ptr<mecdt::MecEnv> env;
};

struct mecdt_model {
  std::shared_ptr<const mecdt::ModelParams> params;
  int round = 0;
};

namespace {

thread_local std::string last_error;

mecdt_status ToStatus(mecdt::ErrorCode code) {
  switch (code) {
    case mecdt::ErrorCode::kInvalidArgument: return MECDT_E_INVALID_ARGUMENT;
    case mecdt::ErrorCode::kInfeasibleLink:
    case mecdt::ErrorCode::kInfeasibleCompute: return MECDT_E_INFEASIBLE;
    case mecdt::ErrorCode::kParse: return MECDT_E_PARSE;
    case mecdt::ErrorCode::kConfig: return MECDT_E_CONFIG;
    case mecdt::ErrorCode::kIntegrity: return MECDT_E_INTEGRITY;
    case mecdt::ErrorCode::kIo: return MECDT_E_IO;
  }
  return MECDT_E_INTERNAL;
}

mecdt_status SetError(mecdt_status status, const std::string& what) {
  last_error = what;
  return status;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
mecdt_status Guard(Fn&& fn) {
  try {
    fn();
    return MECDT_OK;
  } catch (const mecdt::Error& e) {
    return SetError(ToStatus(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return SetError(MECDT_E_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return SetError(MECDT_E_IO, e.what());
  } catch (const std::exception& e) {
    return SetError(MECDT_E_INTERNAL, e.what());
  }
}

#define MECDT_REQUIRE_ARG(cond)                                          \
  do {                                                                   \
    if (!(cond)) {                                                       \
      return SetError(MECDT_E_INVALID_ARGUMENT,                          \
                      std::string(__func__) + ": invalid argument: " #cond); \
    }                                                                    \
  } while (0)

mecdt_status CopyOut(const std::string& s, char* buf, size_t len, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  // A null buffer with zero length is a size query.
  if (buf == nullptr && len == 0 && needed) return MECDT_OK;
  if (buf == nullptr || len < s.size() + 1) {
    return SetError(MECDT_E_INVALID_ARGUMENT, "buffer too small");
  }
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return MECDT_OK;
}

mecdt::RunConfig Finalized(const mecdt_config* cfg) {
  mecdt::RunConfig c = cfg->cfg;
  c.Finalize();
  c.LoadGazeLibrary();
  return c;
}

std::vector<mecdt::UserLevel> Levels(const int* levels, size_t users) {
  std::vector<mecdt::UserLevel> out;
  for (size_t i = 0; i < users; ++i) {
    mecdt::Require(levels[i] >= 0 && levels[i] <= 2, "user level must be 0, 1 or 2");
    out.push_back(static_cast<mecdt::UserLevel>(levels[i]));
  }
  return out;
}

}  // namespace

extern "C" {

const char* mecdt_version(void) { return mecdt::Version(); }

const char* mecdt_last_error(void) { return last_error.c_str(); }

const char* mecdt_status_name(mecdt_status status) {
  switch (status) {
    case MECDT_OK: return "ok";
    case MECDT_E_INVALID_ARGUMENT: return "invalid argument";
    case MECDT_E_CONFIG: return "config error";
    case MECDT_E_PARSE: return "parse error";
    case MECDT_E_IO: return "io error";
    case MECDT_E_INTEGRITY: return "integrity error";
    case MECDT_E_INFEASIBLE: return "infeasible allocation";
    case MECDT_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

int mecdt_exit_code(mecdt_status status) {
  if (status == MECDT_OK) return 0;
  if (status == MECDT_E_INTEGRITY) return 3;
  return 2;
}

mecdt_status mecdt_config_default(mecdt_config** out) {
  MECDT_REQUIRE_ARG(out);
  return Guard([&] {
    auto c = std::make_unique<mecdt_config>();
    c->cfg.Finalize();
    *out = c.release();
  });
}

mecdt_status mecdt_config_load(const char* path, mecdt_config** out) {
  MECDT_REQUIRE_ARG(path && out);
  return Guard([&] {
    auto c = std::make_unique<mecdt_config>();
    c->cfg = mecdt::LoadRunConfig(path);
    *out = c.release();
  });
}

mecdt_status mecdt_config_set(mecdt_config* cfg, const char* key, const char* value) {
  MECDT_REQUIRE_ARG(cfg && key && value);
  return Guard([&] { mecdt::SetRunConfigValue(cfg->cfg, key, value); });
}

mecdt_status mecdt_config_get(const mecdt_config* cfg, const char* key, char* buf,
                              size_t len, size_t* needed) {
  MECDT_REQUIRE_ARG(cfg && key);
  std::string value;
  const mecdt_status s = Guard([&] { value = mecdt::GetRunConfigValue(cfg->cfg, key); });
  return s == MECDT_OK ? CopyOut(value, buf, len, needed) : s;
}

mecdt_status mecdt_config_dump(const mecdt_config* cfg, char* buf, size_t len,
                               size_t* needed) {
  MECDT_REQUIRE_ARG(cfg);
  std::string text;
  const mecdt_status s = Guard([&] { text = mecdt::DumpRunConfig(cfg->cfg); });
  return s == MECDT_OK ? CopyOut(text, buf, len, needed) : s;
}

mecdt_status mecdt_config_validate(const mecdt_config* cfg) {
  MECDT_REQUIRE_ARG(cfg);
  return Guard([&] {
    mecdt::RunConfig c = cfg->cfg;
    c.Finalize();
  });
}

void mecdt_config_free(mecdt_config* cfg) { delete cfg; }

mecdt_status mecdt_gen_data(const mecdt_config* cfg, const char* out_dir) {
  MECDT_REQUIRE_ARG(cfg && out_dir);
  return Guard([&] { mecdt::GenerateData(Finalized(cfg), out_dir); });
}

mecdt_status mecdt_train(const mecdt_config* cfg, const char* data_dir,
                         const char* out_dir, int resume) {
  MECDT_REQUIRE_ARG(cfg && data_dir && out_dir);
  return Guard([&] { mecdt::TrainModel(Finalized(cfg), data_dir, out_dir, resume != 0); });
}

mecdt_status mecdt_eval(const mecdt_config* cfg, const char* checkpoint,
                        const char* out_dir) {
  MECDT_REQUIRE_ARG(cfg && checkpoint && out_dir);
  return Guard([&] { mecdt::EvaluateModel(Finalized(cfg), checkpoint, out_dir); });
}

mecdt_status mecdt_sweep(const mecdt_config* cfg, const char* checkpoint,
                         const char* axis, const double* grid, size_t n,
                         const char* out_dir) {
  MECDT_REQUIRE_ARG(cfg && checkpoint && axis && out_dir && (grid || n == 0));
  return Guard([&] {
    std::vector<double> g(grid, grid + n);
    mecdt::SweepModel(Finalized(cfg), checkpoint, axis, g, out_dir);
  });
}

mecdt_status mecdt_env_create(const mecdt_config* cfg, mecdt_env** out) {
  MECDT_REQUIRE_ARG(cfg && out);
  return Guard([&] {
    auto e = std::make_unique<mecdt_env>();
    e->env = std::make_unique<mecdt::MecEnv>(Finalized(cfg).system);
    *out = e.release();
  });
}

mecdt_status mecdt_env_reset(mecdt_env* env, const int* levels, size_t users,
                             uint64_t seed) {
  MECDT_REQUIRE_ARG(env && levels && users > 0);
  return Guard([&] {
    mecdt::EnvSpec spec;
    spec.levels = Levels(levels, users);
    spec.seed = seed;
    env->env->Reset(spec);
  });
}

size_t mecdt_env_state_dim(const mecdt_env* env) {
  return env ? static_cast<size_t>(mecdt::RawStateDim(env->env->config().max_users)) : 0;
}

size_t mecdt_env_action_dim(const mecdt_env* env) {
  return env ? static_cast<size_t>(mecdt::ActionDim(env->env->config().max_users)) : 0;
}

mecdt_status mecdt_env_state(const mecdt_env* env, double* out, size_t len) {
  MECDT_REQUIRE_ARG(env && out);
  const auto& s = env->env->state();
  if (s.empty()) return SetError(MECDT_E_INVALID_ARGUMENT, "environment was not reset");
  if (len < s.size()) return SetError(MECDT_E_INVALID_ARGUMENT, "state buffer too small");
  std::memcpy(out, s.data(), s.size() * sizeof(double));
  return MECDT_OK;
}

mecdt_status mecdt_env_step(mecdt_env* env, const double* action, size_t len,
                            double* reward, int* done) {
  MECDT_REQUIRE_ARG(env && action);
  return Guard([&] {
    const mecdt::StepResult r = env->env->Step(std::span<const double>(action, len));
    if (reward) *reward = r.reward;
    if (done) *done = r.done ? 1 : 0;
  });
}

void mecdt_env_free(mecdt_env* env) { delete env; }

mecdt_status mecdt_model_load(const char* path, const mecdt_config* expected,
                              mecdt_model** out) {
  MECDT_REQUIRE_ARG(path && out);
  return Guard([&] {
    std::unique_ptr<mecdt::RunConfig> exp;
    if (expected) exp = std::make_unique<mecdt::RunConfig>(Finalized(expected));
    mecdt::Checkpoint ck = mecdt::LoadCheckpoint(path, exp ? &exp->model : nullptr);
    auto m = std::make_unique<mecdt_model>();
    m->round = ck.round;
    m->params = std::make_shared<const mecdt::ModelParams>(std::move(ck.params));
    *out = m.release();
  });
}

mecdt_status mecdt_model_info_get(const mecdt_model* model, mecdt_model_info* out) {
  MECDT_REQUIRE_ARG(model && out);
  const auto& c = model->params->config();
  out->state_dim = c.state_dim;
  out->action_dim = c.action_dim;
  out->embed_dim = c.embed_dim;
  out->layers = c.layers;
  out->prompt_len = c.prompt_len;
  out->context_len = c.context_len;
  out->round = model->round;
  out->use_prompt = c.use_prompt ? 1 : 0;
  return MECDT_OK;
}

mecdt_status mecdt_model_rollout(const mecdt_model* model, const mecdt_config* cfg,
                                 const int* levels, size_t users, uint64_t seed,
                                 double rtg, double* ep_reward) {
  MECDT_REQUIRE_ARG(model && cfg && levels && users > 0 && ep_reward);
  return Guard([&] {
    const mecdt::RunConfig c = Finalized(cfg);
    mecdt::EnvSpec spec;
    spec.levels = Levels(levels, users);
    spec.seed = seed;
    mecdt::DtController controller(model->params);
    const mecdt::EpisodeResult r = mecdt::Rollout(controller, c.EvalSystem(), spec, rtg);
    if (r.failed) mecdt::Fail(mecdt::ErrorCode::kInvalidArgument, r.error);
    *ep_reward = r.ep;
  });
}

void mecdt_model_free(mecdt_model* model) { delete model; }

}  // extern "C"
