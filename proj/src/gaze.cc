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

#include "gaze.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "status.h"

namespace mecdt {
namespace {

double Reflect(double v) {
  // Fold onto [0, 1]; handles steps larger than the unit interval too.
  v = std::fmod(std::fabs(v), 2.0);
  return v > 1.0 ? 2.0 - v : v;
}

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void ParseError(const std::filesystem::path& path, int line,
                             const std::string& what) {
  Fail(ErrorCode::kParse,
       path.string() + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

GazeTrace IngestGazeCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open gaze file " + path.string());

  GazeTrace trace;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = Trim(line);
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("frame", 0) == 0) continue;

    std::stringstream ss(line);
    std::string fields[3];
    int n = 0;
    for (std::string cell; std::getline(ss, cell, ',');) {
      if (n == 3) ParseError(path, line_no, "expected 3 columns");
      fields[n++] = Trim(cell);
    }
    if (n != 3) ParseError(path, line_no, "expected 3 columns");

    GazeSample s;
    auto [p, ec] = std::from_chars(fields[0].data(),
                                   fields[0].data() + fields[0].size(), s.frame);
    if (ec != std::errc() || p != fields[0].data() + fields[0].size()) {
      ParseError(path, line_no, "bad frame index '" + fields[0] + "'");
    }
    try {
      size_t used = 0;
      s.x = std::stod(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument("x");
      s.y = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("y");
    } catch (const std::exception&) {
      ParseError(path, line_no, "bad coordinate");
    }
    if (!std::isfinite(s.x) || !std::isfinite(s.y)) {
      ParseError(path, line_no, "non-finite coordinate");
    }
    if (!trace.samples.empty() && s.frame <= trace.samples.back().frame) {
      ParseError(path, line_no, "frame index must be strictly increasing");
    }
    if (s.x < 0.0 || s.x > 1.0 || s.y < 0.0 || s.y > 1.0) {
      s.x = std::clamp(s.x, 0.0, 1.0);
      s.y = std::clamp(s.y, 0.0, 1.0);
      ++trace.clamped_rows;
    }
    trace.samples.push_back(s);
  }
  return trace;
}

GazeTrace SynthGaze(uint64_t seed, int length, double step_sigma) {
  Require(length >= 1, "gaze trace length must be >= 1");
  Require(step_sigma >= 0, "step_sigma must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> step(0.0, 1.0);
  GazeTrace trace;
  trace.samples.reserve(length);
  double x = 0.5;
  double y = 0.5;
  for (int i = 0; i < length; ++i) {
    trace.samples.push_back({i, x, y});
    x = Reflect(x + step_sigma * step(rng));
    y = Reflect(y + step_sigma * step(rng));
  }
  return trace;
}

AttentionMap ComputeAttentionMap(const GazeTrace& trace, int step, int rows,
                                 int cols, int frames) {
  Require(!trace.empty(), "gaze trace is empty");
  Require(rows >= 1 && cols >= 1 && frames >= 1 && step >= 0,
          "invalid attention map arguments");
  std::vector<int> votes(static_cast<size_t>(rows) * cols, 0);
  const size_t len = trace.size();
  for (int f = 0; f < frames; ++f) {
    const auto& s = trace.samples[(static_cast<size_t>(step) * frames + f) % len];
    const int col = std::min(static_cast<int>(s.x * cols), cols - 1);
    const int row = std::min(static_cast<int>(s.y * rows), rows - 1);
    ++votes[static_cast<size_t>(row) * cols + col];
  }
  const auto best = std::max_element(votes.begin(), votes.end());
  const int center = static_cast<int>(best - votes.begin());
  const int cr = center / cols;
  const int cc = center % cols;

  AttentionMap m;
  m.counts[2] = 1;
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      if (dr == 0 && dc == 0) continue;
      const int r = cr + dr;
      const int c = cc + dc;
      if (r >= 0 && r < rows && c >= 0 && c < cols) ++m.counts[1];
    }
  }
  m.counts[0] = rows * cols - m.counts[1] - m.counts[2];
  return m;
}

}  // namespace mecdt
