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

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eegfp/dataset.hpp"
#include "eegfp/errors.hpp"
#include "eegfp/parallel.hpp"

namespace eegfp {

enum class BandName { kHighBeta, kGamma };

struct BandDefinition {
  BandName name = BandName::kHighBeta;
  double low_hz = 0.0;
  double high_hz = 0.0;

  static constexpr BandDefinition high_beta() { return {BandName::kHighBeta, 20.0, 30.0}; }
  static constexpr BandDefinition gamma() { return {BandName::kGamma, 30.0, 45.0}; }
  static constexpr BandDefinition of(BandName n) {
    return n == BandName::kHighBeta ? high_beta() : gamma();
  }

  friend bool operator==(const BandDefinition&, const BandDefinition&) = default;
};

inline std::string_view band_name(BandName b) {
  return b == BandName::kHighBeta ? "beta" : "gamma";
}

inline BandName parse_band(std::string_view s) {
  if (s == "beta" || s == "highbeta" || s == "HighBeta" || s == "high_beta") {
    return BandName::kHighBeta;
  }
  if (s == "gamma" || s == "Gamma") return BandName::kGamma;
  throw UsageError("unknown band '" + std::string(s) + "' (expected beta or gamma)");
}

/// Second-order section in transposed direct form II, a0 == 1.
struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 3> a{1.0, 0.0, 0.0};
};

/// Digital Butterworth band-pass. The filter is held as cascaded biquads for
/// filtering; numerator()/denominator() expand them into transfer-function
/// polynomials in z^-1.
struct FilterSpec {
  int order = 0;  // prototype order per pass
  double low_hz = 0.0;
  double high_hz = 0.0;
  double sample_rate = 0.0;
  std::vector<std::complex<double>> poles;
  std::vector<std::complex<double>> zeros;
  double gain = 1.0;
  std::vector<Biquad> sections;

  std::vector<double> numerator() const { return expand(true); }
  std::vector<double> denominator() const { return expand(false); }

  bool is_stable() const {
    return std::all_of(poles.begin(), poles.end(),
                       [](std::complex<double> p) { return std::abs(p) < 1.0; });
  }

  /// Complex response at frequency f (Hz), from the section cascade.
  std::complex<double> response(double f) const {
    const std::complex<double> zinv =
        std::polar(1.0, -2.0 * std::numbers::pi * f / sample_rate);
    std::complex<double> h = 1.0;
    for (const auto& s : sections) {
      h *= (s.b[0] + zinv * (s.b[1] + zinv * s.b[2])) /
           (s.a[0] + zinv * (s.a[1] + zinv * s.a[2]));
    }
    return h;
  }

 private:
  std::vector<double> expand(bool num) const {
    std::vector<double> poly{1.0};
    for (const auto& s : sections) {
      const auto& c = num ? s.b : s.a;
      std::vector<double> next(poly.size() + 2, 0.0);
      for (std::size_t i = 0; i < poly.size(); ++i) {
        for (std::size_t j = 0; j < 3; ++j) next[i + j] += poly[i] * c[j];
      }
      poly = std::move(next);
    }
    return poly;
  }
};

inline void validate_band(double low_hz, double high_hz, double sample_rate) {
  const double nyquist = sample_rate / 2.0;
  if (!(low_hz > 0.0) || !(low_hz < high_hz)) {
    throw UsageError("band edges must satisfy 0 < low < high");
  }
  if (high_hz >= nyquist) {
    throw UsageError("band edge " + std::to_string(high_hz) +
                     " Hz is at or above the Nyquist frequency " +
                     std::to_string(nyquist) + " Hz");
  }
}

/// Butterworth band-pass of the given prototype order: analog low-pass
/// prototype, low-pass to band-pass transform at pre-warped edges, then the
/// bilinear transform. The result has 2*order poles, order zeros at z = 1 and
/// order zeros at z = -1.
inline FilterSpec design_bandpass(double low_hz, double high_hz,
                                  double sample_rate, int order) {
  using cd = std::complex<double>;
  validate_band(low_hz, high_hz, sample_rate);
  if (order < 1) throw UsageError("filter order must be positive");

  const double fs2 = 2.0 * sample_rate;
  const double w1 = fs2 * std::tan(std::numbers::pi * low_hz / sample_rate);
  const double w2 = fs2 * std::tan(std::numbers::pi * high_hz / sample_rate);
  const double bw = w2 - w1;
  const double w0sq = w1 * w2;

  std::vector<cd> analog;
  for (int k = 0; k < order; ++k) {
    const cd proto = std::polar(
        1.0, std::numbers::pi * (2.0 * k + order + 1) / (2.0 * order));
    const cd half = proto * (bw / 2.0);
    const cd root = std::sqrt(half * half - w0sq);
    analog.push_back(half + root);
    analog.push_back(half - root);
  }

  FilterSpec spec;
  spec.order = order;
  spec.low_hz = low_hz;
  spec.high_hz = high_hz;
  spec.sample_rate = sample_rate;

  // Analog gain bw^order with order zeros at s = 0; bilinear maps those to
  // z = 1 and the zeros at infinity to z = -1.
  cd gain = std::pow(bw, order) * std::pow(fs2, order);
  for (const cd& p : analog) {
    spec.poles.push_back((fs2 + p) / (fs2 - p));
    gain /= (fs2 - p);
  }
  spec.gain = gain.real();
  for (int k = 0; k < order; ++k) spec.zeros.emplace_back(1.0, 0.0);
  for (int k = 0; k < order; ++k) spec.zeros.emplace_back(-1.0, 0.0);

  // Group poles into conjugate pairs; real poles pair with each other.
  std::vector<cd> upper;
  std::vector<double> real;
  for (const cd& p : spec.poles) {
    if (std::abs(p.imag()) <= 1e-12 * std::abs(p)) {
      real.push_back(p.real());
    } else if (p.imag() > 0) {
      upper.push_back(p);
    }
  }
  std::sort(upper.begin(), upper.end(),
            [](cd a, cd b) { return std::abs(a) < std::abs(b); });
  std::sort(real.begin(), real.end());
  for (const cd& p : upper) {
    Biquad s;
    s.b = {1.0, 0.0, -1.0};
    s.a = {1.0, -2.0 * p.real(), std::norm(p)};
    spec.sections.push_back(s);
  }
  for (std::size_t i = 0; i + 1 < real.size(); i += 2) {
    Biquad s;
    s.b = {1.0, 0.0, -1.0};
    s.a = {1.0, -(real[i] + real[i + 1]), real[i] * real[i + 1]};
    spec.sections.push_back(s);
  }
  for (auto& c : spec.sections.front().b) c *= spec.gain;
  return spec;
}

inline FilterSpec design_bandpass(const BandDefinition& band, double sample_rate,
                                  int order = 4) {
  return design_bandpass(band.low_hz, band.high_hz, sample_rate, order);
}

/// Samples reflected onto each end before forward-backward filtering.
inline std::size_t edge_padding(const FilterSpec& spec) {
  return static_cast<std::size_t>(3 * 3 * spec.order);
}

namespace dsp_detail {

// Runs the cascade in place. `x0` scales the steady-state initial conditions
// for a constant input, which removes the start-up step transient.
inline void cascade_filter(const FilterSpec& spec, std::vector<double>& x) {
  if (x.empty()) return;
  double level = x.front();
  for (const auto& s : spec.sections) {
    const double g = (s.b[0] + s.b[1] + s.b[2]) / (s.a[0] + s.a[1] + s.a[2]);
    double z2 = (s.b[2] - s.a[2] * g) * level;
    double z1 = (g - s.b[0]) * level;
    for (double& v : x) {
      const double in = v;
      const double y = s.b[0] * in + z1;
      z1 = s.b[1] * in - s.a[1] * y + z2;
      z2 = s.b[2] * in - s.a[2] * y;
      v = y;
    }
    level *= g;
  }
}

}  // namespace dsp_detail

/// Forward-backward (zero-phase) filtering. Each end is extended by an odd
/// reflection of edge_padding(spec) samples, the cascade runs forward and
/// then over the reversed output, and the padding is trimmed. The effective
/// magnitude response is |H|^2 with zero phase.
inline std::vector<double> zero_phase_filter(std::span<const double> signal,
                                             const FilterSpec& spec) {
  const std::size_t pad = edge_padding(spec);
  const std::size_t n = signal.size();
  if (n <= pad) {
    throw DataError("signal of " + std::to_string(n) +
                    " samples is too short for zero-phase filtering (needs > " +
                    std::to_string(pad) + ")");
  }
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t k = pad; k >= 1; --k) ext.push_back(2.0 * signal[0] - signal[k]);
  ext.insert(ext.end(), signal.begin(), signal.end());
  for (std::size_t k = 1; k <= pad; ++k) {
    ext.push_back(2.0 * signal[n - 1] - signal[n - 1 - k]);
  }
  dsp_detail::cascade_filter(spec, ext);
  std::reverse(ext.begin(), ext.end());
  dsp_detail::cascade_filter(spec, ext);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

namespace dsp_detail {

// FFTW planning is not thread-safe; execution is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class DftPlan {
 public:
  DftPlan(std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out,
          int sign) {
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(in.size()),
                             reinterpret_cast<fftw_complex*>(in.data()),
                             reinterpret_cast<fftw_complex*>(out.data()), sign,
                             FFTW_ESTIMATE);
  }
  ~DftPlan() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }
  DftPlan(const DftPlan&) = delete;
  DftPlan& operator=(const DftPlan&) = delete;

  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

}  // namespace dsp_detail

/// Wraps an angle from atan2 into (-pi, pi].
inline double wrap_phase(double phi) {
  return phi == -std::numbers::pi ? std::numbers::pi : phi;
}

/// Analytic signal by the frequency-domain Hilbert construction: DC and
/// Nyquist bins kept, strictly positive frequencies doubled, negative
/// frequencies zeroed.
inline std::vector<std::complex<double>> analytic_signal(std::span<const double> signal) {
  const std::size_t n = signal.size();
  if (n < 4) throw DataError("analytic signal needs at least 4 samples");
  std::vector<std::complex<double>> buf(n), spectrum(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(signal[i])) {
      throw DataError("NaN at sample " + std::to_string(i));
    }
    buf[i] = signal[i];
  }
  dsp_detail::DftPlan(buf, spectrum, FFTW_FORWARD).execute();
  const std::size_t half = n / 2;
  const std::size_t last_doubled = (n % 2 == 0) ? half - 1 : half;
  for (std::size_t k = 1; k <= last_doubled; ++k) spectrum[k] *= 2.0;
  for (std::size_t k = last_doubled + 1 + (n % 2 == 0 ? 1 : 0); k < n; ++k) spectrum[k] = 0.0;
  dsp_detail::DftPlan(spectrum, buf, FFTW_BACKWARD).execute();
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& v : buf) v *= scale;
  return buf;
}

/// Instantaneous phase in (-pi, pi].
inline std::vector<double> analytic_phase(std::span<const double> signal) {
  const auto z = analytic_signal(signal);
  std::vector<double> phase(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    phase[i] = wrap_phase(std::arg(z[i]));
  }
  return phase;
}

/// Removes 2*pi jumps between consecutive samples.
inline std::vector<double> unwrap_phase(std::span<const double> phase) {
  std::vector<double> out(phase.begin(), phase.end());
  long long cycles = 0;
  for (std::size_t i = 1; i < out.size(); ++i) {
    const double step = phase[i] - phase[i - 1];
    if (step > std::numbers::pi) {
      --cycles;
    } else if (step < -std::numbers::pi) {
      ++cycles;
    }
    out[i] = phase[i] + 2.0 * std::numbers::pi * static_cast<double>(cycles);
  }
  return out;
}

/// Maps any angle into (-pi, pi].
inline double wrap_to_pi(double phi) {
  const double r = std::remainder(phi, 2.0 * std::numbers::pi);
  return r <= -std::numbers::pi ? r + 2.0 * std::numbers::pi : r;
}

/// Per-channel instantaneous phase of a band-filtered recording.
struct PhaseSeries {
  std::string subject_id;
  Condition condition = Condition::kEyesOpen;
  BandDefinition band;
  double sample_rate = 0.0;
  std::vector<std::string> channel_labels;
  std::vector<std::vector<double>> phases;

  std::size_t n_channels() const { return phases.size(); }
  std::size_t n_samples() const { return phases.empty() ? 0 : phases.front().size(); }
};

/// Filters every channel over the whole continuous record and extracts its
/// phase. Phase is computed before epoching so short windows do not carry
/// Hilbert edge effects of their own.
inline PhaseSeries band_phase(const Recording& recording, const BandDefinition& band,
                              int order = 4) {
  const FilterSpec spec = design_bandpass(band, recording.sample_rate, order);
  PhaseSeries out;
  out.subject_id = recording.subject_id;
  out.condition = recording.condition;
  out.band = band;
  out.sample_rate = recording.sample_rate;
  out.channel_labels = recording.channel_labels;
  out.phases.resize(recording.n_channels());
  parallel_for(recording.n_channels(), [&](std::size_t c) {
    out.phases[c] = analytic_phase(zero_phase_filter(recording.data[c], spec));
  });
  return out;
}

}  // namespace eegfp
