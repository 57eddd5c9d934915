// Copyright 2026 The eegfp Authors.
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


#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "eegfp/connectivity.hpp"
#include "eegfp/dsp.hpp"
#include "eegfp/synthkit.hpp"

namespace eegfp {
namespace {

constexpr double kPi = std::numbers::pi;

PhaseSeries to_phases(const synth::Channels& ch, BandDefinition band = BandDefinition::high_beta()) {
  Recording rec;
  rec.sample_rate = 160.0;
  rec.channel_labels = {"A", "B"};
  rec.data = ch;
  return band_phase(rec, band);
}

PhaseSeries raw_phases(const synth::Channels& ph) {
  PhaseSeries s;
  s.sample_rate = 160.0;
  s.channel_labels = {"A", "B"};
  s.phases = ph;
  return s;
}

double stddev(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

TEST(ConstantLagPair, LaggedToneIsFullyCoupled) {
  const auto ps = to_phases(synth::constant_lag_pair(25.0, kPi / 3, 9600, 160.0));
  for (const auto& e : segment_epochs(ps, 12.0)) {
    EXPECT_GE(plv(e.phases[0], e.phases[1]), 0.98);
    EXPECT_GE(pli(e.phases[0], e.phases[1]), 0.98);
  }
}

TEST(ConstantLagPair, ZeroLagHasNoLaggedCoupling) {
  const auto ps = to_phases(synth::constant_lag_pair(25.0, 0.0, 9600, 160.0));
  for (const auto& e : segment_epochs(ps, 12.0)) {
    EXPECT_NEAR(plv(e.phases[0], e.phases[1]), 1.0, 1e-9);
    EXPECT_LE(pli(e.phases[0], e.phases[1]), 0.05);
  }
}

TEST(ConstantLagPair, DirectQuarterCyclePhasesGivePliOne) {
  const auto ph = synth::noisy_coupled_phases(25.0, kPi / 2, 0.0, 1920, 160.0, 0);
  EXPECT_EQ(pli(ph[0], ph[1]), 1.0);
}

TEST(ConstantLagPair, RejectsToneAboveNyquist) {
  EXPECT_THROW(synth::constant_lag_pair(90.0, 0.0, 100, 160.0), UsageError);
  EXPECT_THROW(synth::constant_lag_pair(25.0, -kPi, 100, 160.0), UsageError);
}

TEST(UniformPhasePair, DeterministicPerSeed) {
  EXPECT_EQ(synth::uniform_phase_pair(1000, 77), synth::uniform_phase_pair(1000, 77));
  EXPECT_NE(synth::uniform_phase_pair(1000, 77), synth::uniform_phase_pair(1000, 78));
  for (const auto& ch : synth::uniform_phase_pair(10000, 3)) {
    for (double v : ch) {
      ASSERT_GT(v, -kPi);
      ASSERT_LE(v, kPi);
    }
  }
}

TEST(UniformPhasePair, SingleSampleHasUnitPlv) {
  const auto p = synth::uniform_phase_pair(1, 5);
  EXPECT_EQ(plv(p[0], p[1]), 1.0);
}

TEST(UniformPhasePair, BothMetricsSmallForNearlyAllSeeds) {
  int pli_ok = 0, plv_ok = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto p = synth::uniform_phase_pair(10000, seed);
    pli_ok += pli(p[0], p[1]) <= 0.03;
    plv_ok += plv(p[0], p[1]) <= 0.03;
  }
  EXPECT_GE(pli_ok, 990);
  EXPECT_GE(plv_ok, 990);
}

TEST(SplitMix64, ReferenceStream) {
  // First outputs for seed 0 of the published SplitMix64 reference.
  SplitMix64 g(0);
  EXPECT_EQ(g(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(g(), 0x6E789E6AA1B965F4ULL);
  EXPECT_EQ(g(), 0x06C45D188009454FULL);
}

TEST(NoisyCoupledPair, ZeroNoiseIsConstantLagPair) {
  EXPECT_EQ(synth::noisy_coupled_pair(25.0, 0.4, 0.0, 500, 160.0, 9),
            synth::constant_lag_pair(25.0, 0.4, 500, 160.0));
}

TEST(NoisyCoupledPair, ShortWindowsScatterMore) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto ps = to_phases(synth::noisy_coupled_pair(25.0, 0.5, 1.0, 9600, 160.0, seed));
    auto per_epoch = [&](double w) {
      std::vector<double> v;
      for (const auto& e : segment_epochs(ps, w)) v.push_back(plv(e.phases[0], e.phases[1]));
      return v;
    };
    EXPECT_GT(stddev(per_epoch(0.5)), stddev(per_epoch(12.0))) << "seed " << seed;
  }
}

TEST(NoisyCoupledPair, HeavyJitterDecouples) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto ph = synth::noisy_coupled_phases(25.0, 0.5, 10.0, 1920, 160.0, seed);
    EXPECT_LE(plv(ph[0], ph[1]), 0.1) << "seed " << seed;
  }
}

TEST(NoisyCoupledPair, EstimatorSpreadShrinksWithWindow) {
  // Per-epoch PLV spread times sqrt(window) stays bounded across the grid.
  const auto grid = WindowGrid::standard();
  const std::size_t epochs = 200;
  const std::size_t n = epochs * window_samples(grid.lengths_s.back(), 160.0);
  const auto ps = raw_phases(synth::noisy_coupled_phases(25.0, 0.5, 1.0, n, 160.0, 31));
  double reference = 0.0;
  for (double w : grid.lengths_s) {
    std::vector<double> v;
    const auto t = epoch_features(ps, Method::kPLV, w);
    for (std::size_t e = 0; e < std::min<std::size_t>(epochs, t.n_epochs()); ++e) v.push_back(t.row(e)[0]);
    const double scaled = stddev(v) * std::sqrt(static_cast<double>(window_samples(w, 160.0)));
    if (reference == 0.0) reference = scaled;
    EXPECT_LE(scaled, 1.3 * reference) << "window " << w;
  }
}

TEST(Cohort, SessionsShareTraitsButNotNoise) {
  synth::CohortSpec spec;
  spec.n_samples = 1600;
  const auto a = synth::cohort_recording(spec, 0, Condition::kEyesOpen, 1);
  const auto b = synth::cohort_recording(spec, 0, Condition::kEyesOpen, 1);
  const auto c = synth::cohort_recording(spec, 0, Condition::kEyesOpen, 2);
  EXPECT_EQ(a.data, b.data);
  EXPECT_NE(a.data, c.data);
  EXPECT_EQ(a.n_channels(), spec.channels);
  EXPECT_EQ(a.subject_id, "S001");
}

}  // namespace
}  // namespace eegfp
