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

#include "physics.h"

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.h"
#include "status.h"

namespace mecdt {
namespace {

SystemConfig PaperConfig() { return SystemConfig{}; }

AttentionMap Map(int n1, int n2, int n3) { return AttentionMap{{n1, n2, n3}}; }

TEST_CASE("transmission rate") {
  SystemConfig cfg = PaperConfig();
  cfg.noise_psd = std::pow(10.0, -20.4);
  const ChannelState ch{1.0, 10.0, 0.0};
  CHECK(TransmissionRate(cfg, 0.0, ch) == 0.0);
  CHECK(TransmissionRate(cfg, 1e6, ch) == doctest::Approx(3.46e7).epsilon(2e-3));
  CHECK(TransmissionRate(cfg, 1e6, {2.0, 10.0, 0.0}) > TransmissionRate(cfg, 1e6, ch));
  CHECK(TransmissionRate(cfg, 1e6, {1.0, 12.0, 0.0}) < TransmissionRate(cfg, 1e6, ch));
  CHECK_THROWS_AS(TransmissionRate(cfg, -1.0, ch), Error);

  cfg.noise_is_psd = false;
  cfg.noise_psd = 1e-13;
  // Flat noise power: SNR does not depend on the bandwidth.
  CHECK(TransmissionRate(cfg, 2e6, ch) / TransmissionRate(cfg, 1e6, ch) ==
        doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("tile bits") {
  const SystemConfig cfg = PaperConfig();
  const UserProfile premium = cfg.Profile(UserLevel::kPremium);
  CHECK(premium.thresholds[2] == 12441600.0 / 4.0);
  const TileBits zero = ComputeTileBits(premium, {0, 0, 0}, Map(10, 5, 1), 16);
  CHECK(zero.gop == 0.0);
  const TileBits one = ComputeTileBits(premium, {0, 0, 1}, Map(15, 0, 1), 16);
  CHECK(one.per_level[2] == 49766400.0);

  const UserProfile standard = cfg.Profile(UserLevel::kStandard);
  const TileBits full = ComputeTileBits(standard, {1, 1, 1}, Map(10, 5, 1), 16);
  double brute = 0.0;
  for (int i = 0; i < 10; ++i) brute += standard.thresholds[0] * 16;
  for (int i = 0; i < 5; ++i) brute += standard.thresholds[1] * 16;
  brute += standard.thresholds[2] * 16;
  CHECK(full.gop == doctest::Approx(brute).epsilon(1e-15));
  CHECK_THROWS_AS(ComputeTileBits(standard, {1.5, 0, 0}, Map(10, 5, 1), 16), Error);
}

TEST_CASE("latencies") {
  SystemConfig cfg = PaperConfig();
  CHECK(DownloadLatency(0.0, 300, 1e7, 0) == 0.0);
  CHECK(DownloadLatency(3e8, 300, 1e7, 0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK_THROWS_AS(DownloadLatency(1.0, 300, 1e7, 1e7), Error);
  try {
    DownloadLatency(1.0, 300, 0.0, 0.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInfeasibleLink);
  }

  CHECK(RenderLatency({0, 0, 0}, cfg, 15e9, 0) == 0.0);
  CHECK(RenderLatency({0, 0, 49766400.0}, cfg, 15e9, 0) ==
        doctest::Approx(0.011059).epsilon(1e-4));
  cfg.render_scale = 1.0;
  CHECK(RenderLatency({0, 0, 49766400.0}, cfg, 15e9, 0) ==
        doctest::Approx(3.3178).epsilon(1e-4));
  try {
    RenderLatency({1, 1, 1}, cfg, 1e9, 1e9);
    FAIL("expected infeasible compute");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInfeasibleCompute);
  }
  CHECK(TotalLatency(0, 0) == 0.0);
  CHECK(TotalLatency(0.01, 0.02) == doctest::Approx(0.03));
}

TEST_CASE("qoe") {
  const SystemConfig cfg = PaperConfig();
  const UserProfile p = cfg.Profile(UserLevel::kAdvanced);
  const std::array<double, 3> at_th = p.thresholds;
  CHECK(Qoe(cfg.latency_threshold, cfg, p, Map(10, 5, 1), at_th) == 0.0);
  CHECK(Qoe(0.01, cfg, p, Map(10, 5, 1), {0, 0, 0}) == 0.0);
  CHECK(Qoe(0.0, cfg, p, Map(10, 5, 1), at_th) ==
        doctest::Approx(std::log(2.0) * 23.0 / 16.0).epsilon(1e-14));
  CHECK(Qoe(0.0, cfg, p, Map(10, 5, 1), at_th) == doctest::Approx(0.99637).epsilon(5e-5));
  CHECK(Qoe(0.08, cfg, p, Map(10, 5, 1), at_th) < 0.0);
  // Strictly increasing in each resolution below the latency threshold.
  for (int a = 0; a < 3; ++a) {
    std::array<double, 3> lo = {1000, 1000, 1000};
    std::array<double, 3> hi = lo;
    hi[a] += 1.0;
    CHECK(Qoe(0.01, cfg, p, Map(10, 5, 1), hi) > Qoe(0.01, cfg, p, Map(10, 5, 1), lo));
  }
}

TEST_CASE("hfqoe") {
  const std::vector<double> equal = {0.7, 0.7, 0.7};
  CHECK(Hfqoe(equal) == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> two = {1.0, 0.8};
  CHECK(Hfqoe(two) == doctest::Approx(1.0 - 0.1 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(Hfqoe(two) == doctest::Approx(0.92929).epsilon(1e-5));
  const std::vector<double> one = {0.3};
  CHECK(Hfqoe(one) == 1.0);
  CHECK_THROWS_AS(Hfqoe(std::vector<double>{}), Error);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 2);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> v(1 + i % 8);
    for (auto& x : v) x = u(rng);
    CHECK(Hfqoe(v) <= 1.0);
  }
}

TEST_CASE("reward") {
  const SystemConfig cfg = PaperConfig();
  const std::vector<double> good = {0.95, 1.0};
  CHECK(Reward(good, 0.9, cfg) == doctest::Approx(1.95));
  const std::vector<double> mixed = {1.0, 0.5};
  CHECK(Reward(mixed, 0.9, cfg) == doctest::Approx(0.59).epsilon(1e-14));
  CHECK(Reward(good, 0.7, cfg) == doctest::Approx(1.95 - 2 * 0.8).epsilon(1e-14));
  SystemConfig flat = cfg;
  flat.penalty_hfqoe_per_user = false;
  CHECK(Reward(good, 0.7, flat) == doctest::Approx(1.95 - 0.8).epsilon(1e-14));
}

TEST_CASE("action decoding") {
  SystemConfig cfg = PaperConfig();
  cfg.max_users = 4;
  const std::vector<UserProfile> profiles(4, cfg.Profile(UserLevel::kPremium));
  std::vector<double> a(20, 0.0);
  a[3] = 0.5;
  a[8] = 0.5;
  a[4] = 0.2;
  a[9] = 0.6;
  Allocation al = DecodeAction(a, 2, cfg, profiles);
  CHECK(al.bandwidth[0] == cfg.total_bandwidth / 2);
  CHECK(al.bandwidth[1] == cfg.total_bandwidth / 2);
  CHECK(al.frequency[0] == doctest::Approx(0.25 * cfg.total_frequency));
  CHECK(al.frequency[1] == doctest::Approx(0.75 * cfg.total_frequency));

  std::vector<double> zero(20, 0.0);
  al = DecodeAction(zero, 3, cfg, profiles);
  for (int k = 0; k < 3; ++k) {
    CHECK(al.bandwidth[k] == cfg.total_bandwidth / 3);
    CHECK(al.frequency[k] == cfg.total_frequency / 3);
    for (int j = 0; j < 3; ++j) CHECK(al.resolution[k][j] == 0.0);
  }
  CHECK_THROWS_AS(DecodeAction(zero, 5, cfg, profiles), Error);
  CHECK_THROWS_AS(DecodeAction(zero, 0, cfg, profiles), Error);
  std::vector<double> bad = zero;
  bad[0] = 1.1;
  CHECK_THROWS_AS(DecodeAction(bad, 1, cfg, profiles), Error);
  CHECK_THROWS_AS(DecodeAction(std::vector<double>(19, 0.0), 1, cfg, profiles), Error);
}

TEST_CASE("decoded allocations meet the resource budgets") {
  SystemConfig cfg = PaperConfig();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 500; ++trial) {
    const int k = 1 + trial % 8;
    std::vector<UserProfile> profiles;
    for (int i = 0; i < k; ++i) profiles.push_back(cfg.Profile(static_cast<UserLevel>(i % 3)));
    std::vector<double> a(40, 0.0);
    for (int i = 0; i < 5 * k; ++i) a[i] = u(rng);
    const Allocation al = DecodeAction(a, k, cfg, profiles);
    double bw = 0, fq = 0;
    for (int i = 0; i < k; ++i) {
      bw += al.bandwidth[i];
      fq += al.frequency[i];
      for (int j = 0; j < 3; ++j) CHECK(al.resolution[i][j] <= profiles[i].thresholds[j]);
    }
    CHECK(std::fabs(bw / cfg.total_bandwidth - 1.0) <= 1e-9);
    CHECK(std::fabs(fq / cfg.total_frequency - 1.0) <= 1e-9);
  }
}

TEST_CASE("formulas agree with the extended-precision oracles") {
  const SystemConfig base = PaperConfig();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 300; ++i) {
    SystemConfig cfg = base;
    cfg.transmit_power = 0.1 + u(rng);
    cfg.path_loss_exponent = 2 + 2 * u(rng);
    const ChannelState ch{0.01 + 3 * u(rng), 5 + 20 * u(rng), 1e-13 * u(rng)};
    const double bw = 1e4 + 1e7 * u(rng);
    const double got = TransmissionRate(cfg, bw, ch);
    const double want = oracle::Rate(bw, cfg.transmit_power, ch.gain, ch.distance,
                                     cfg.path_loss_exponent, ch.interference,
                                     cfg.noise_psd);
    CHECK(oracle::RelErr(got, want) <= 1e-12);

    const UserProfile p = cfg.Profile(static_cast<UserLevel>(i % 3));
    const int n3 = 1 + i % 3;
    const int n2 = i % 7;
    const int n[3] = {16 - n2 - n3, n2, n3};
    const double r[3] = {u(rng), u(rng), u(rng)};
    const TileBits tb = ComputeTileBits(p, {r[0], r[1], r[2]}, Map(n[0], n[1], n[2]), 16);
    const oracle::Bits ob = oracle::TileBits(p.thresholds.data(), r, n, 16);
    CHECK(oracle::RelErr(tb.gop, double(ob.total)) <= 1e-12);
    const double lat = 0.06 * u(rng);
    CHECK(oracle::RelErr(Qoe(lat, cfg, p, Map(n[0], n[1], n[2]), tb.per_tile),
                         oracle::Qoe(lat, cfg.latency_threshold, n, 16,
                                     tb.per_tile.data(), p.thresholds.data())) <= 1e-12);
  }
}

}  // namespace
}  // namespace mecdt
