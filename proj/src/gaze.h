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

#ifndef MECDT_GAZE_H_
#define MECDT_GAZE_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "types.h"

namespace mecdt {

struct GazeSample {
  int64_t frame = 0;
  double x = 0.5;  // normalized, [0, 1]
  double y = 0.5;
};

struct GazeTrace {
  std::vector<GazeSample> samples;
  // Rows whose coordinates had to be clamped into [0, 1] while ingesting.
  int clamped_rows = 0;

  size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

// Reads a "frame,x,y" CSV. Throws Error(kIo) for a missing file and
// Error(kParse) naming the line for malformed rows or non-increasing frames.
GazeTrace IngestGazeCsv(const std::filesystem::path& path);

// Reflected Gaussian random walk in the unit square, starting at the center.
GazeTrace SynthGaze(uint64_t seed, int length, double step_sigma);

// Tile hit by the majority of the F gaze samples of GoP 'step' (ties go to the
// lowest row-major index) becomes level 3, its clipped 8-neighbourhood level
// 2, everything else level 1. Reads past the end of the trace wrap around.
AttentionMap ComputeAttentionMap(const GazeTrace& trace, int step, int rows,
                                 int cols, int frames);

}  // namespace mecdt

#endif  // MECDT_GAZE_H_
