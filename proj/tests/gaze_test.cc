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

#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "status.h"

namespace mecdt {
namespace {

std::filesystem::path WriteTemp(const std::string& name, const std::string& body) {
  const auto dir = std::filesystem::temp_directory_path() / "mecdt_gaze_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << body;
  return path;
}

std::string ParseMessage(const std::filesystem::path& path) {
  try {
    IngestGazeCsv(path);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    return e.what();
  }
  FAIL("expected a parse error");
  return "";
}

TEST_CASE("ingest reads frames and clamps out-of-range coordinates") {
  const auto path = WriteTemp("ok.csv", "frame,x,y\n0,0.1,0.2\n1,1.5,-0.25\n\n3,0.5,0.5\n");
  const GazeTrace t = IngestGazeCsv(path);
  REQUIRE(t.size() == 3);
  CHECK(t.clamped_rows == 1);
  CHECK(t.samples[1].x == 1.0);
  CHECK(t.samples[1].y == 0.0);
  CHECK(t.samples[2].frame == 3);
}

TEST_CASE("ingest errors name the offending line") {
  CHECK(ParseMessage(WriteTemp("cols.csv", "frame,x,y\n0,0.1,0.2\n1,0.2\n")).find(":3:") !=
        std::string::npos);
  CHECK(ParseMessage(WriteTemp("num.csv", "0,0.1,abc\n")).find(":1:") != std::string::npos);
  CHECK(ParseMessage(WriteTemp("order.csv", "0,0.1,0.1\n2,0.1,0.1\n2,0.3,0.3\n"))
            .find(":3:") != std::string::npos);
  CHECK(ParseMessage(WriteTemp("nan.csv", "0,nan,0.1\n")).find(":1:") != std::string::npos);
  try {
    IngestGazeCsv("/nonexistent/gaze.csv");
    FAIL("expected io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
}

TEST_CASE("attention map from a fixed gaze point") {
  GazeTrace t;
  t.samples = {{0, 0.5, 0.5}};
  // 4x4 grid, centre falls into tile (2, 2): full 8-neighbourhood.
  AttentionMap m = ComputeAttentionMap(t, 0, 4, 4, 30);
  CHECK(m.counts == std::array<int, 3>{7, 8, 1});
  t.samples = {{0, 0.0, 0.0}};
  m = ComputeAttentionMap(t, 5, 4, 4, 30);
  CHECK(m.counts == std::array<int, 3>{12, 3, 1});
  t.samples = {{0, 1.0, 0.3}};
  m = ComputeAttentionMap(t, 0, 4, 4, 30);
  CHECK(m.counts == std::array<int, 3>{10, 5, 1});
}

TEST_CASE("attention map majority vote and tie break") {
  GazeTrace t;
  // Two frames in tile 5, one in tile 0.
  t.samples = {{0, 0.3, 0.3}, {1, 0.3, 0.3}, {2, 0.0, 0.0}};
  AttentionMap m = ComputeAttentionMap(t, 0, 4, 4, 3);
  CHECK(m.counts[1] == 8);
  // One frame each: the lowest index (corner) wins.
  t.samples = {{0, 0.3, 0.3}, {1, 0.0, 0.0}};
  m = ComputeAttentionMap(t, 0, 4, 4, 2);
  CHECK(m.counts[1] == 3);
}

TEST_CASE("synthetic gaze stays in the unit square and is seeded") {
  const GazeTrace a = SynthGaze(9, 5000, 0.3);
  const GazeTrace b = SynthGaze(9, 5000, 0.3);
  REQUIRE(a.size() == 5000);
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a.samples[i].x >= 0.0);
    CHECK(a.samples[i].x <= 1.0);
    CHECK(a.samples[i].y >= 0.0);
    CHECK(a.samples[i].y <= 1.0);
    CHECK(a.samples[i].x == b.samples[i].x);
  }
  for (int step = 0; step < 300; ++step) {
    const AttentionMap m = ComputeAttentionMap(a, step, 4, 4, 30);
    CHECK(m.Total() == 16);
    CHECK(m.counts[2] == 1);
  }
  CHECK_THROWS_AS(SynthGaze(1, 0, 0.1), Error);
  CHECK_THROWS_AS(ComputeAttentionMap(GazeTrace{}, 0, 4, 4, 30), Error);
}

}  // namespace
}  // namespace mecdt
