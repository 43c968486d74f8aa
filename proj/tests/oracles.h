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

// Straight-line re-implementations of the simulator formulas in extended
// precision. They share no code with the library and are used as reference
// values by the unit and acceptance tests.

#ifndef MECDT_TESTS_ORACLES_H_
#define MECDT_TESTS_ORACLES_H_

#include <cmath>
#include <vector>

namespace mecdt::oracle {

using Real = long double;

inline double Rate(double bandwidth, double power, double gain, double distance,
                   double alpha, double interference, double noise_psd) {
  if (bandwidth == 0.0) return 0.0;
  const Real signal = Real(power) * gain / std::pow(Real(distance), Real(alpha));
  const Real noise = Real(interference) + Real(noise_psd) * bandwidth;
  return double(Real(bandwidth) * std::log2(Real(1) + signal / noise));
}

// Bits per tile, per level (x frames) and per GoP.
struct Bits {
  Real b[3];
  Real g[3];
  Real total;
};

inline Bits TileBits(const double th[3], const double ratio[3], const int n[3],
                     int frames) {
  Bits out{};
  for (int a = 0; a < 3; ++a) {
    out.b[a] = Real(th[a]) * ratio[a];
    out.g[a] = Real(n[a]) * out.b[a] * frames;
  }
  out.total = out.g[0] + out.g[1] + out.g[2];
  return out;
}

inline double Download(double gop_bits, double omega, double rate, double bias) {
  return double(Real(gop_bits) / (Real(omega) * (Real(rate) - bias)));
}

inline double Render(const double g[3], const double c[3], double scale,
                     double freq, double bias) {
  Real cycles = 0;
  for (int a = 0; a < 3; ++a) cycles += Real(g[a]) * c[a];
  return double(cycles / (Real(scale) * (Real(freq) - bias)));
}

inline double Qoe(double latency, double t_th, const int n[3], int tiles,
                  const double b[3], const double th[3]) {
  Real sum = 0;
  for (int a = 0; a < 3; ++a) {
    sum += Real(a + 1) * n[a] / tiles * std::log(Real(1) + Real(b[a]) / th[a]);
  }
  return double((Real(1) - Real(latency) / t_th) * sum);
}

inline double Hfqoe(const std::vector<double>& avg) {
  const Real k = avg.size();
  Real mean = 0;
  for (double v : avg) mean += v;
  mean /= k;
  Real var = 0;
  for (double v : avg) var += (Real(v) - mean) * (Real(v) - mean);
  var /= k;
  return double(Real(1) - std::sqrt(var) / std::sqrt(k));
}

inline double Reward(const std::vector<double>& qoe, double hfqoe, double qoe_th,
                     double hfqoe_th, double p1, double p2) {
  Real total = 0;
  Real pen = 0;
  for (double q : qoe) {
    total += q;
    if (q < qoe_th) pen += qoe_th;
  }
  const Real hf = hfqoe < hfqoe_th ? Real(hfqoe_th) : Real(0);
  return double(total - Real(p1) * pen - Real(p2) * hf);
}

inline double RelErr(double got, double want) {
  if (got == want) return 0.0;
  return std::fabs(got - want) / std::max(std::fabs(want), 1e-300);
}

}  // namespace mecdt::oracle

#endif  // MECDT_TESTS_ORACLES_H_
