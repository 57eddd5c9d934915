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


#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "eegfp/dataset.hpp"
#include "eegfp/dsp.hpp"
#include "eegfp/edf.hpp"
#include "eegfp/errors.hpp"
#include "eegfp/random.hpp"

namespace eegfp::synth {

using Channels = std::vector<std::vector<double>>;

enum class SynthKind { kConstantLagPair, kUniformRandomPhases, kSinusoidChannel, kNoisyCoupledPair };

struct SynthSpec {
  SynthKind kind = SynthKind::kConstantLagPair;
  double frequency_hz = 25.0;
  double lag = 0.0;
  double noise_std = 0.0;
  std::size_t n_samples = 9600;
  double sample_rate = 160.0;
  std::uint64_t seed = 0;
};

namespace detail {

inline void check_tone(double f, double rate) {
  if (!(f > 0.0) || !(f < rate / 2.0)) {
    throw UsageError("tone frequency must lie in (0, rate/2)");
  }
}

inline void check_lag(double lag) {
  if (!(lag > -std::numbers::pi) || lag > std::numbers::pi) {
    throw UsageError("lag must lie in (-pi, pi]");
  }
}

inline double carrier(double f, double rate, std::size_t t) {
  return 2.0 * std::numbers::pi * f * static_cast<double>(t) / rate;
}

}  // namespace detail

/// cos(2 pi f t - lag).
inline std::vector<double> sinusoid(double f, double lag, std::size_t n, double rate) {
  detail::check_tone(f, rate);
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) x[t] = std::cos(detail::carrier(f, rate, t) - lag);
  return x;
}

/// Channel 0 = cos(2 pi f t), channel 1 = cos(2 pi f t - lag).
inline Channels constant_lag_pair(double f, double lag, std::size_t n, double rate) {
  detail::check_lag(lag);
  return {sinusoid(f, 0.0, n, rate), sinusoid(f, lag, n, rate)};
}

/// Two independent i.i.d. uniform phase sequences on (-pi, pi].
inline Channels uniform_phase_pair(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw UsageError("uniform_phase_pair needs n >= 1");
  SplitMix64 rng(seed);
  Channels out(2, std::vector<double>(n));
  for (auto& ch : out) {
    for (double& v : ch) v = rng.uniform_phase();
  }
  return out;
}

/// Like constant_lag_pair, but channel 1 carries an extra i.i.d. Gaussian
/// phase jitter of standard deviation noise_std (radians) per sample.
inline Channels noisy_coupled_pair(double f, double lag, double noise_std, std::size_t n,
                                   double rate, std::uint64_t seed) {
  detail::check_tone(f, rate);
  detail::check_lag(lag);
  if (!(noise_std >= 0.0)) throw UsageError("noise_std must be non-negative");
  if (noise_std == 0.0) return constant_lag_pair(f, lag, n, rate);
  SplitMix64 rng(seed);
  Channels out(2, std::vector<double>(n));
  for (std::size_t t = 0; t < n; ++t) {
    const double phase = detail::carrier(f, rate, t);
    out[0][t] = std::cos(phase);
    out[1][t] = std::cos(phase - lag - noise_std * rng.normal());
  }
  return out;
}

/// Phase model behind noisy_coupled_pair, without the signal: channel 0 is
/// 2 pi f t and channel 1 is 2 pi f t - lag - noise_std * e(t), both wrapped
/// to (-pi, pi]. Uses the same random stream as noisy_coupled_pair.
inline Channels noisy_coupled_phases(double f, double lag, double noise_std, std::size_t n,
                                     double rate, std::uint64_t seed) {
  detail::check_tone(f, rate);
  detail::check_lag(lag);
  if (!(noise_std >= 0.0)) throw UsageError("noise_std must be non-negative");
  SplitMix64 rng(seed);
  Channels out(2, std::vector<double>(n));
  for (std::size_t t = 0; t < n; ++t) {
    const double phase = detail::carrier(f, rate, t);
    const double jitter = noise_std == 0.0 ? 0.0 : noise_std * rng.normal();
    out[0][t] = wrap_to_pi(phase);
    out[1][t] = wrap_to_pi(phase - lag - jitter);
  }
  return out;
}

inline Channels generate(const SynthSpec& s) {
  switch (s.kind) {
    case SynthKind::kConstantLagPair:
      return constant_lag_pair(s.frequency_hz, s.lag, s.n_samples, s.sample_rate);
    case SynthKind::kUniformRandomPhases:
      return uniform_phase_pair(s.n_samples, s.seed);
    case SynthKind::kSinusoidChannel:
      detail::check_lag(s.lag);
      return {sinusoid(s.frequency_hz, s.lag, s.n_samples, s.sample_rate)};
    case SynthKind::kNoisyCoupledPair:
      return noisy_coupled_pair(s.frequency_hz, s.lag, s.noise_std, s.n_samples,
                                s.sample_rate, s.seed);
  }
  return {};
}

/// A cohort of synthetic "subjects". Every subject owns a fixed set of
/// per-channel lags and jitter levels (its fingerprint); each recording
/// session redraws only the jitter noise. Channel c of subject s is
///
///   cos(2 pi f t - lag[s][c] - jitter[s][c] * e_c(t)),  e_c(t) ~ N(0, 1) i.i.d.
///
/// so connectivity differs between subjects, and per-epoch estimates get
/// less noisy as epochs grow.
struct CohortSpec {
  std::size_t subjects = 8;
  std::size_t channels = 8;
  double frequency_hz = 25.0;
  double sample_rate = 160.0;
  std::size_t n_samples = 9600;
  double min_jitter = 1.2;
  double max_jitter = 1.6;
  double max_lag = 0.5;
  std::uint64_t seed = 1;
};

inline std::string cohort_subject_id(std::size_t subject) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "S%03zu", subject + 1);
  return buf;
}

inline Recording cohort_recording(const CohortSpec& spec, std::size_t subject,
                                  Condition condition, std::uint64_t session) {
  detail::check_tone(spec.frequency_hz, spec.sample_rate);
  SplitMix64 traits(mix_seed(spec.seed, 2 * subject + 1));
  std::vector<double> lag(spec.channels), jitter(spec.channels);
  for (std::size_t c = 0; c < spec.channels; ++c) {
    lag[c] = spec.max_lag * (2.0 * traits.uniform01() - 1.0);
    jitter[c] = spec.min_jitter + (spec.max_jitter - spec.min_jitter) * traits.uniform01();
  }
  SplitMix64 noise(mix_seed(spec.seed ^ session, 2 * subject + 2 +
                                                    (condition == Condition::kEyesOpen ? 0 : 1) *
                                                        0x10000));
  Recording rec;
  rec.subject_id = cohort_subject_id(subject);
  rec.condition = condition;
  rec.sample_rate = spec.sample_rate;
  rec.data.assign(spec.channels, std::vector<double>(spec.n_samples));
  for (std::size_t c = 0; c < spec.channels; ++c) {
    rec.channel_labels.push_back("C" + std::to_string(c + 1));
  }
  for (std::size_t t = 0; t < spec.n_samples; ++t) {
    const double phase = detail::carrier(spec.frequency_hz, spec.sample_rate, t);
    for (std::size_t c = 0; c < spec.channels; ++c) {
      rec.data[c][t] = std::cos(phase - lag[c] - jitter[c] * noise.normal());
    }
  }
  return rec;
}

/// Writes the cohort as a dataset tree: <root>/S###/S###R01.edf (eyes open)
/// and S###R02.edf (eyes closed), both from session 1.
inline void write_cohort_dataset(const CohortSpec& spec, const std::filesystem::path& root) {
  for (std::size_t s = 0; s < spec.subjects; ++s) {
    const std::string id = cohort_subject_id(s);
    std::filesystem::create_directories(root / id);
    for (Condition cond : {Condition::kEyesOpen, Condition::kEyesClosed}) {
      const std::string run = cond == Condition::kEyesOpen ? "R01" : "R02";
      write_edf(root / id / (id + run + ".edf"),
                recording_to_edf(cohort_recording(spec, s, cond, 1), -1.5, 1.5));
    }
  }
}

}  // namespace eegfp::synth
