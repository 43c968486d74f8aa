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

// Command-line driver: gen-data, train, eval, sweep.

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mecdt/mecdt.h"

namespace {

struct Handle {
  mecdt_config* cfg = nullptr;
  ~Handle() { mecdt_config_free(cfg); }
};

int Report(mecdt_status s, const std::string& command) {
  if (s == MECDT_OK) return 0;
  std::cerr << "mecdt " << command << ": " << mecdt_status_name(s) << ": "
            << mecdt_last_error() << "\n";
  return mecdt_exit_code(s);
}

std::optional<std::vector<double>> ParseGrid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) return std::nullopt;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MEC resource allocation with a federated prompt decision transformer"};
  app.set_version_flag("--version", std::string(mecdt_version()));
  app.require_subcommand(1);

  std::string config_path;
  std::optional<uint64_t> seed;
  std::string out_dir;
  std::string data_dir;
  std::string checkpoint;
  std::string axis;
  std::string grid_text;
  bool resume = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "INI config file")->required();
    cmd->add_option("--seed", seed, "Run seed (overrides [run] seed)");
    cmd->add_option("--out", out_dir, "Output directory")->required();
  };
  CLI::App* gen = app.add_subcommand("gen-data", "Generate per-server offline datasets");
  add_common(gen);
  CLI::App* train = app.add_subcommand("train", "Federated training");
  add_common(train);
  train->add_option("--data", data_dir, "gen-data output directory")->required();
  train->add_flag("--resume", resume, "Continue from the newest checkpoint in --out");
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint on held-out envs");
  add_common(eval);
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  CLI::App* sweep = app.add_subcommand("sweep", "Sweep one quantity over a grid");
  add_common(sweep);
  sweep->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  sweep->add_option("--axis", axis,
                    "qoe_th | hfqoe_th | bandwidth (MHz) | frequency (GHz) | rtg | prompt_len")
      ->required();
  sweep->add_option("--grid", grid_text, "Comma-separated values (default grid if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  Handle h;
  if (mecdt_status s = mecdt_config_load(config_path.c_str(), &h.cfg); s != MECDT_OK) {
    return Report(s, command);
  }
  if (seed) {
    const std::string v = std::to_string(*seed);
    if (mecdt_status s = mecdt_config_set(h.cfg, "run.seed", v.c_str()); s != MECDT_OK) {
      return Report(s, command);
    }
  }
  if (mecdt_status s = mecdt_config_validate(h.cfg); s != MECDT_OK) {
    return Report(s, command);
  }

  mecdt_status s = MECDT_OK;
  if (*gen) {
    s = mecdt_gen_data(h.cfg, out_dir.c_str());
  } else if (*train) {
    s = mecdt_train(h.cfg, data_dir.c_str(), out_dir.c_str(), resume ? 1 : 0);
  } else if (*eval) {
    s = mecdt_eval(h.cfg, checkpoint.c_str(), out_dir.c_str());
  } else if (*sweep) {
    std::vector<double> grid;
    if (sweep->count("--grid") > 0) {
      auto parsed = ParseGrid(grid_text);
      if (!parsed) {
        std::cerr << "mecdt sweep: --grid must be comma-separated numbers\n";
        return 2;
      }
      if (parsed->empty()) {
        std::cerr << "mecdt sweep: --grid is empty\n";
        return 2;
      }
      grid = std::move(*parsed);
    }
    s = mecdt_sweep(h.cfg, checkpoint.c_str(), axis.c_str(),
                    grid.empty() ? nullptr : grid.data(), grid.size(), out_dir.c_str());
  }
  if (s == MECDT_OK) std::cout << command << ": wrote " << out_dir << "\n";
  return Report(s, command);
}
