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

#include "run_config.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "gaze.h"
#include "status.h"

namespace mecdt {
namespace {

struct Binding {
  std::string section;
  std::string key;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

[[noreturn]] void BadValue(const std::string& what, const std::string& v) {
  Fail(ErrorCode::kConfig, "bad value for " + what + ": '" + v + "'");
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

template <typename T>
T ParseNumber(const std::string& what, const std::string& raw) {
  const std::string v = Trim(raw);
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) BadValue(what, raw);
  return out;
}

bool ParseBool(const std::string& what, const std::string& raw) {
  std::string v = Trim(raw);
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  BadValue(what, raw);
}

std::vector<std::string> SplitList(const std::string& raw) {
  std::vector<std::string> out;
  std::stringstream ss(raw);
  for (std::string item; std::getline(ss, item, ',');) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
std::string FormatList(const T& values) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += ",";
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(v)>>) {
      out += FormatDouble(v);
    } else if constexpr (std::is_integral_v<std::decay_t<decltype(v)>>) {
      out += std::to_string(v);
    } else {
      out += v;
    }
  }
  return out;
}

class Binder {
 public:
  explicit Binder(std::vector<Binding>* out) : out_(out) {}
  void Section(std::string s) { section_ = std::move(s); }

  void Int(const std::string& key, int& ref) {
    const std::string what = section_ + "." + key;
    Add(key, [&ref, what](const std::string& v) { ref = ParseNumber<int>(what, v); },
        [&ref] { return std::to_string(ref); });
  }
  void U64(const std::string& key, uint64_t& ref) {
    const std::string what = section_ + "." + key;
    Add(key, [&ref, what](const std::string& v) { ref = ParseNumber<uint64_t>(what, v); },
        [&ref] { return std::to_string(ref); });
  }
  void Double(const std::string& key, double& ref) {
    const std::string what = section_ + "." + key;
    Add(key, [&ref, what](const std::string& v) { ref = ParseNumber<double>(what, v); },
        [&ref] { return FormatDouble(ref); });
  }
  void Bool(const std::string& key, bool& ref) {
    const std::string what = section_ + "." + key;
    Add(key, [&ref, what](const std::string& v) { ref = ParseBool(what, v); },
        [&ref] { return std::string(ref ? "true" : "false"); });
  }
  void Triple(const std::string& key, std::array<double, 3>& ref) {
    const std::string what = section_ + "." + key;
    Add(key,
        [&ref, what](const std::string& v) {
          const auto items = SplitList(v);
          if (items.size() != 3) BadValue(what + " (needs 3 values)", v);
          for (int i = 0; i < 3; ++i) ref[i] = ParseNumber<double>(what, items[i]);
        },
        [&ref] { return FormatList(ref); });
  }
  void IntList(const std::string& key, std::vector<int>& ref) {
    const std::string what = section_ + "." + key;
    Add(key,
        [&ref, what](const std::string& v) {
          ref.clear();
          for (const auto& item : SplitList(v)) ref.push_back(ParseNumber<int>(what, item));
        },
        [&ref] { return FormatList(ref); });
  }
  void StringList(const std::string& key, std::vector<std::string>& ref) {
    Add(key, [&ref](const std::string& v) { ref = SplitList(v); },
        [&ref] { return FormatList(ref); });
  }
  void Custom(const std::string& key, std::function<void(const std::string&)> set,
              std::function<std::string()> get) {
    Add(key, std::move(set), std::move(get));
  }

 private:
  void Add(const std::string& key, std::function<void(const std::string&)> set,
           std::function<std::string()> get) {
    out_->push_back({section_, key, std::move(set), std::move(get)});
  }
  std::vector<Binding>* out_;
  std::string section_;
};

std::vector<Binding> Bindings(RunConfig& c) {
  std::vector<Binding> out;
  Binder b(&out);
  b.Section("run");
  b.U64("seed", c.seed);

  SystemConfig& s = c.system;
  b.Section("system");
  b.Int("num_servers", s.num_servers);
  b.Int("max_users", s.max_users);
  b.Int("grid_rows", s.grid_rows);
  b.Int("grid_cols", s.grid_cols);
  b.Int("frames_per_gop", s.frames_per_gop);
  b.Double("latency_threshold", s.latency_threshold);
  b.Double("total_bandwidth", s.total_bandwidth);
  b.Double("total_frequency", s.total_frequency);
  b.Triple("cycles_per_bit", s.cycles_per_bit);
  b.Double("transmit_power", s.transmit_power);
  b.Double("path_loss_exponent", s.path_loss_exponent);
  b.Custom(
      "noise_model",
      [&s](const std::string& v) {
        const std::string t = Trim(v);
        if (t == "psd") {
          s.noise_is_psd = true;
        } else if (t == "power") {
          s.noise_is_psd = false;
        } else {
          BadValue("system.noise_model (psd|power)", v);
        }
      },
      [&s] { return std::string(s.noise_is_psd ? "psd" : "power"); });
  b.Double("noise_psd", s.noise_psd);
  b.Double("compression_ratio", s.compression_ratio);
  b.Double("interference", s.interference);
  b.Double("rate_bias_frac", s.rate_bias_frac);
  b.Double("freq_bias_frac", s.freq_bias_frac);
  b.Double("render_scale", s.render_scale);
  b.Double("qoe_threshold", s.qoe_threshold);
  b.Double("hfqoe_threshold", s.hfqoe_threshold);
  b.Double("penalty_qoe", s.penalty_qoe);
  b.Double("penalty_hfqoe", s.penalty_hfqoe);
  b.Bool("penalty_hfqoe_per_user", s.penalty_hfqoe_per_user);
  b.Triple("thresholds_standard", s.level_thresholds[0]);
  b.Triple("thresholds_advanced", s.level_thresholds[1]);
  b.Triple("thresholds_premium", s.level_thresholds[2]);
  b.Double("user_x_min", s.user_x_min);
  b.Double("user_x_max", s.user_x_max);
  b.Double("user_y_min", s.user_y_min);
  b.Double("user_y_max", s.user_y_max);
  b.Int("episode_len", s.episode_len);
  b.Double("gaze_step_sigma", s.gaze_step_sigma);
  b.StringList("gaze_traces", c.gaze_traces);

  DataConfig& d = c.data;
  b.Section("data");
  b.IntList("user_counts", d.user_counts);
  b.Int("train_envs_per_count", d.train_envs_per_count);
  b.Int("heldout_envs_per_count", d.heldout_envs_per_count);
  b.Int("episodes_per_env", d.episodes_per_env);
  b.Double("mix_random", d.mix.random);
  b.Double("mix_proportional", d.mix.proportional);
  b.Double("mix_hillclimb", d.mix.hillclimb);
  b.Int("hillclimb_iters", d.mix.hillclimb_iters);
  b.Int("threads", d.threads);

  FlConfig& f = c.fl;
  b.Section("fl");
  b.Int("rounds", f.rounds);
  b.Int("local_epochs", f.local_epochs);
  b.Int("local_iters", f.local_iters);
  b.Int("batch", f.batch);
  b.Double("lr", f.lr);
  b.Double("weight_decay", f.weight_decay);
  b.Double("lr_decay", f.lr_decay);
  b.Int("warmup", f.warmup);
  b.Double("grad_clip", f.grad_clip);
  b.Double("adam_beta1", f.adam_beta1);
  b.Double("adam_beta2", f.adam_beta2);
  b.Double("adam_eps", f.adam_eps);
  b.Int("checkpoint_every", f.checkpoint_every);
  b.Int("threads", f.threads);

  ModelConfig& m = c.model;
  b.Section("model");
  b.Int("embed_dim", m.embed_dim);
  b.Int("layers", m.layers);
  b.Int("heads", m.heads);
  b.Double("dropout", m.dropout);
  b.Int("max_timestep", m.max_timestep);
  b.Int("ffn_mult", m.ffn_mult);
  b.Double("init_std", m.init_std);
  b.Int("prompt_len", m.prompt_len);
  b.Int("context_len", m.context_len);
  b.Double("rtg_scale", m.rtg_scale);
  b.Custom(
      "transform",
      [&m](const std::string& v) {
        const std::string t = Trim(v);
        if (t == "symlog") {
          m.transform = InputTransform::kSymlog;
        } else if (t == "linear") {
          m.transform = InputTransform::kLinear;
        } else {
          BadValue("model.transform (symlog|linear)", v);
        }
      },
      [&m] {
        return std::string(m.transform == InputTransform::kSymlog ? "symlog" : "linear");
      });
  b.Bool("use_prompt", m.use_prompt);
  b.Bool("use_user_info", m.use_user_info);

  EvalConfig& e = c.eval;
  b.Section("eval");
  b.Int("episodes", e.episodes);
  b.Double("rtg", e.rtg);
  b.Int("t_te", e.t_te);
  b.Bool("baselines", e.baselines);
  b.Int("threads", e.threads);
  return out;
}

std::string EnvName(const Binding& b) {
  std::string name = "MECDT_" + b.section + "_" + b.key;
  std::transform(name.begin(), name.end(), name.begin(), ::toupper);
  return name;
}

RunConfig Parse(std::istream& in, const EnvLookup& env,
                const std::filesystem::path& base_dir) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    Fail(ErrorCode::kConfig, std::string("config parse error: ") + e.what());
  }
  RunConfig cfg;
  std::vector<Binding> bindings = Bindings(cfg);
  std::set<std::string> known;
  for (const auto& b : bindings) known.insert(b.section + "." + b.key);

  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      Fail(ErrorCode::kConfig, "config key '" + section + "' is outside a section");
    }
    for (const auto& [key, value] : body) {
      if (!known.contains(section + "." + key)) {
        Fail(ErrorCode::kConfig, "unknown config key [" + section + "] " + key);
      }
    }
  }
  for (auto& b : bindings) {
    if (auto v = tree.get_optional<std::string>(
            boost::property_tree::ptree::path_type(b.section + "/" + b.key, '/'))) {
      b.set(*v);
    }
    if (env) {
      if (auto v = env(EnvName(b))) b.set(*v);
    }
  }
  for (auto& p : cfg.gaze_traces) {
    const std::filesystem::path path(p);
    if (path.is_relative() && !base_dir.empty()) p = (base_dir / path).string();
  }
  cfg.Finalize();
  return cfg;
}

}  // namespace

void RunConfig::Finalize() {
  system.Validate();
  fl.clients = system.num_servers;
  fl.Validate();
  const ModelConfig dims = ModelConfigForUsers(system.max_users);
  model.state_dim = dims.state_dim;
  model.action_dim = dims.action_dim;
  model.Validate();
  auto check = [](bool ok, const std::string& what) {
    if (!ok) Fail(ErrorCode::kConfig, "invalid config: " + what);
  };
  check(!data.user_counts.empty(), "data.user_counts is empty");
  for (int k : data.user_counts) {
    check(k >= 1 && k <= system.max_users,
          "data.user_counts entries must be in [1, max_users]");
  }
  check(data.train_envs_per_count >= 1, "data.train_envs_per_count must be >= 1");
  check(data.heldout_envs_per_count >= 0, "data.heldout_envs_per_count must be >= 0");
  check(data.episodes_per_env >= 1, "data.episodes_per_env must be >= 1");
  check(data.mix.random >= 0 && data.mix.proportional >= 0 && data.mix.hillclimb >= 0 &&
            std::abs(data.mix.random + data.mix.proportional + data.mix.hillclimb - 1.0) < 1e-9,
        "data.mix_* fractions must be >= 0 and sum to 1");
  check(data.mix.hillclimb_iters >= 1, "data.hillclimb_iters must be >= 1");
  check(data.threads >= 1, "data.threads must be >= 1");
  check(eval.episodes >= 1, "eval.episodes must be >= 1");
  check(eval.t_te >= 1, "eval.t_te must be >= 1");
  check(eval.threads >= 1, "eval.threads must be >= 1");
}

SystemConfig RunConfig::EvalSystem() const {
  SystemConfig s = system;
  s.episode_len = eval.t_te;
  return s;
}

void RunConfig::LoadGazeLibrary() {
  if (gaze_traces.empty()) {
    system.gaze_library.reset();
    return;
  }
  auto lib = std::make_shared<std::vector<GazeTrace>>();
  for (const auto& p : gaze_traces) lib->push_back(IngestGazeCsv(p));
  system.gaze_library = std::move(lib);
}

EnvLookup ProcessEnv() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
}

RunConfig LoadRunConfig(const std::filesystem::path& path, const EnvLookup& env) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kConfig, "cannot open config file " + path.string());
  return Parse(in, env, path.parent_path());
}

RunConfig ParseRunConfig(const std::string& text, const EnvLookup& env) {
  std::istringstream in(text);
  return Parse(in, env, {});
}

std::string DumpRunConfig(const RunConfig& cfg) {
  RunConfig copy = cfg;
  std::string out;
  std::string section;
  for (const auto& b : Bindings(copy)) {
    if (b.section != section) {
      if (!section.empty()) out += "\n";
      section = b.section;
      out += "[" + section + "]\n";
    }
    out += b.key + " = " + b.get() + "\n";
  }
  return out;
}

void SetRunConfigValue(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (auto& b : Bindings(cfg)) {
    if (b.section + "." + b.key == key) {
      b.set(value);
      return;
    }
  }
  Fail(ErrorCode::kConfig, "unknown config key " + key);
}

std::string GetRunConfigValue(const RunConfig& cfg, const std::string& key) {
  RunConfig copy = cfg;
  for (auto& b : Bindings(copy)) {
    if (b.section + "." + b.key == key) return b.get();
  }
  Fail(ErrorCode::kConfig, "unknown config key " + key);
}

std::vector<std::string> RunConfigKeys() {
  RunConfig c;
  std::vector<std::string> out;
  for (const auto& b : Bindings(c)) out.push_back(b.section + "." + b.key);
  return out;
}

}  // namespace mecdt
