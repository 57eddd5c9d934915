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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eegfp/dsp.hpp"
#include "eegfp/errors.hpp"

namespace eegfp {

enum class Method { kPLI, kPLV };

inline std::string_view method_name(Method m) { return m == Method::kPLI ? "PLI" : "PLV"; }

inline Method parse_method(std::string_view s) {
  if (s == "PLI" || s == "pli") return Method::kPLI;
  if (s == "PLV" || s == "plv") return Method::kPLV;
  throw UsageError("unknown method '" + std::string(s) + "' (expected PLI or PLV)");
}

/// Epoch lengths in seconds.
struct WindowGrid {
  std::vector<double> lengths_s;

  /// 0.5 s to 12 s in 0.5 s steps (24 lengths).
  static WindowGrid standard() {
    WindowGrid g;
    for (int k = 1; k <= 24; ++k) g.lengths_s.push_back(0.5 * k);
    return g;
  }

  /// Throws unless every length is positive, strictly increasing and a whole
  /// number of samples at `sample_rate`.
  void validate(double sample_rate) const {
    if (lengths_s.empty()) throw UsageError("window grid is empty");
    for (std::size_t i = 0; i < lengths_s.size(); ++i) {
      const double w = lengths_s[i];
      if (!(w > 0.0)) throw UsageError("window lengths must be positive");
      if (i > 0 && !(w > lengths_s[i - 1])) {
        throw UsageError("window lengths must be strictly increasing");
      }
      const double samples = w * sample_rate;
      if (std::abs(samples - std::round(samples)) > 1e-9 * std::max(1.0, samples)) {
        throw UsageError("window " + std::to_string(w) +
                         " s is not a whole number of samples");
      }
    }
  }
};

inline std::size_t window_samples(double window_s, double sample_rate) {
  return static_cast<std::size_t>(std::llround(window_s * sample_rate));
}

struct EpochProvenance {
  std::string subject_id;
  Condition condition = Condition::kEyesOpen;
  BandDefinition band;
};

struct PhaseEpoch {
  std::vector<std::vector<double>> phases;  // channels x window_samples
  std::size_t epoch_index = 0;
  double window_s = 0.0;
  EpochProvenance provenance;

  std::size_t n_channels() const { return phases.size(); }
  std::size_t n_samples() const { return phases.empty() ? 0 : phases.front().size(); }
};

/// Number of whole, non-overlapping epochs of `window` samples in `total`.
inline std::size_t epoch_count(std::size_t total, std::size_t window) {
  return window == 0 ? 0 : total / window;
}

inline std::size_t checked_window_samples(const PhaseSeries& series, double window_s) {
  const std::size_t w = window_samples(window_s, series.sample_rate);
  if (w < 2) {
    throw UsageError("window " + std::to_string(window_s) + " s is shorter than 2 samples");
  }
  if (w > series.n_samples()) {
    throw DataError("window of " + std::to_string(w) + " samples exceeds the " +
                    std::to_string(series.n_samples()) + "-sample record");
  }
  return w;
}

/// Contiguous non-overlapping epochs from sample 0; the trailing remainder is
/// discarded.
inline std::vector<PhaseEpoch> segment_epochs(const PhaseSeries& series, double window_s) {
  const std::size_t w = checked_window_samples(series, window_s);
  const std::size_t count = epoch_count(series.n_samples(), w);
  std::vector<PhaseEpoch> epochs(count);
  for (std::size_t e = 0; e < count; ++e) {
    auto& ep = epochs[e];
    ep.epoch_index = e;
    ep.window_s = window_s;
    ep.provenance = {series.subject_id, series.condition, series.band};
    ep.phases.reserve(series.n_channels());
    for (const auto& ch : series.phases) {
      const auto first = ch.begin() + static_cast<std::ptrdiff_t>(e * w);
      ep.phases.emplace_back(first, first + static_cast<std::ptrdiff_t>(w));
    }
  }
  return epochs;
}

namespace connectivity_detail {

inline void check_pair(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw UsageError("phase sequences differ in length (" + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw UsageError("phase sequences are empty");
}

inline int sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace connectivity_detail

/// Phase lag index: |mean_t sign(sin(phi_i - phi_j))| with sign(0) = 0.
inline double pli(std::span<const double> phase_i, std::span<const double> phase_j) {
  connectivity_detail::check_pair(phase_i, phase_j);
  long long sum = 0;
  for (std::size_t t = 0; t < phase_i.size(); ++t) {
    sum += connectivity_detail::sign(std::sin(phase_i[t] - phase_j[t]));
  }
  return static_cast<double>(std::llabs(sum)) / static_cast<double>(phase_i.size());
}

/// Phase locking value: |mean_t exp(i (phi_i - phi_j))|, clamped to [0, 1].
inline double plv(std::span<const double> phase_i, std::span<const double> phase_j) {
  connectivity_detail::check_pair(phase_i, phase_j);
  if (phase_i.size() == 1) return 1.0;
  double re = 0.0, im = 0.0;
  for (std::size_t t = 0; t < phase_i.size(); ++t) {
    const double d = phase_i[t] - phase_j[t];
    re += std::cos(d);
    im += std::sin(d);
  }
  const double v = std::hypot(re, im) / static_cast<double>(phase_i.size());
  return std::min(v, 1.0);
}

inline double pairwise(Method m, std::span<const double> a, std::span<const double> b) {
  return m == Method::kPLI ? pli(a, b) : plv(a, b);
}

/// Full symmetric C x C matrix, row-major.
struct ConnectivityMatrix {
  Method method = Method::kPLV;
  std::size_t size = 0;
  std::vector<double> values;
  /// Channels whose phase is constant over the epoch (e.g. flat input).
  std::vector<std::size_t> degenerate_channels;

  double at(std::size_t i, std::size_t j) const { return values[i * size + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * size + j]; }
};

inline bool is_constant(std::span<const double> x) {
  return std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end();
}

inline ConnectivityMatrix connectivity_matrix(const PhaseEpoch& epoch, Method method) {
  const std::size_t c = epoch.n_channels();
  ConnectivityMatrix m;
  m.method = method;
  m.size = c;
  m.values.assign(c * c, 0.0);
  for (std::size_t i = 0; i < c; ++i) {
    if (is_constant(epoch.phases[i])) m.degenerate_channels.push_back(i);
    m.at(i, i) = method == Method::kPLV ? 1.0 : 0.0;
    for (std::size_t j = i + 1; j < c; ++j) {
      const double v = pairwise(method, epoch.phases[i], epoch.phases[j]);
      m.at(i, j) = v;
      m.at(j, i) = v;
    }
  }
  return m;
}

inline std::size_t feature_length(std::size_t channels) {
  return channels * (channels - 1) / 2;
}

struct FeatureVector {
  std::vector<double> values;
  Method method = Method::kPLV;
  double window_s = 0.0;
  EpochProvenance provenance;
};

/// Strict upper triangle in row-major order: (0,1), (0,2), ..., (1,2), ...
inline std::vector<double> upper_triangle(const ConnectivityMatrix& m) {
  std::vector<double> out;
  out.reserve(feature_length(m.size));
  for (std::size_t i = 0; i < m.size; ++i) {
    for (std::size_t j = i + 1; j < m.size; ++j) out.push_back(m.at(i, j));
  }
  return out;
}

inline FeatureVector feature_vector(const PhaseEpoch& epoch, Method method) {
  return {upper_triangle(connectivity_matrix(epoch, method)), method, epoch.window_s,
          epoch.provenance};
}

/// Per-channel unit phasors (cos phi, sin phi) of a whole phase series. The
/// batch feature path works on these so that each sample pair costs a few
/// multiplications instead of trigonometric calls.
struct UnitPhasors {
  std::vector<std::vector<double>> cos;
  std::vector<std::vector<double>> sin;

  explicit UnitPhasors(const PhaseSeries& series) {
    cos.resize(series.n_channels());
    sin.resize(series.n_channels());
    for (std::size_t c = 0; c < series.n_channels(); ++c) {
      const auto& p = series.phases[c];
      cos[c].resize(p.size());
      sin[c].resize(p.size());
      for (std::size_t t = 0; t < p.size(); ++t) {
        cos[c][t] = std::cos(p[t]);
        sin[c][t] = std::sin(p[t]);
      }
    }
  }
};

/// All epoch feature vectors of one (series, method, window), row-major
/// n_epochs x dim.
struct FeatureTable {
  Method method = Method::kPLV;
  double window_s = 0.0;
  std::size_t window_samples = 0;
  std::size_t dim = 0;
  std::vector<double> values;
  std::vector<std::size_t> degenerate_channels;

  std::size_t n_epochs() const { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const double> row(std::size_t e) const {
    return {values.data() + e * dim, dim};
  }

  friend bool operator==(const FeatureTable&, const FeatureTable&) = default;
};

/// Batch equivalent of segment_epochs + connectivity_matrix + upper_triangle.
///
/// sin(a - b) = sin a cos b - cos a sin b; its sign is taken by comparing the
/// two products, so identical phases give exactly zero.
inline FeatureTable epoch_features(const PhaseSeries& series, const UnitPhasors& phasors,
                                   Method method, double window_s) {
  const std::size_t w = checked_window_samples(series, window_s);
  const std::size_t channels = series.n_channels();
  const std::size_t count = epoch_count(series.n_samples(), w);
  FeatureTable table;
  table.method = method;
  table.window_s = window_s;
  table.window_samples = w;
  table.dim = feature_length(channels);
  table.values.resize(count * table.dim);

  std::vector<bool> degenerate(channels, false);
  for (std::size_t e = 0; e < count; ++e) {
    const std::size_t begin = e * w;
    for (std::size_t c = 0; c < channels; ++c) {
      if (is_constant(std::span(series.phases[c]).subspan(begin, w))) degenerate[c] = true;
    }
    double* out = table.values.data() + e * table.dim;
    for (std::size_t i = 0; i < channels; ++i) {
      const double* ci = phasors.cos[i].data() + begin;
      const double* si = phasors.sin[i].data() + begin;
      for (std::size_t j = i + 1; j < channels; ++j) {
        const double* cj = phasors.cos[j].data() + begin;
        const double* sj = phasors.sin[j].data() + begin;
        if (method == Method::kPLI) {
          long long sum = 0;
          for (std::size_t t = 0; t < w; ++t) {
            const double a = si[t] * cj[t];
            const double b = ci[t] * sj[t];
            sum += (a > b) - (a < b);
          }
          *out++ = static_cast<double>(std::llabs(sum)) / static_cast<double>(w);
        } else {
          double re = 0.0, im = 0.0;
          for (std::size_t t = 0; t < w; ++t) {
            re += ci[t] * cj[t] + si[t] * sj[t];
            im += si[t] * cj[t] - ci[t] * sj[t];
          }
          *out++ = std::min(std::hypot(re, im) / static_cast<double>(w), 1.0);
        }
      }
    }
  }
  for (std::size_t c = 0; c < channels; ++c) {
    if (degenerate[c]) table.degenerate_channels.push_back(c);
  }
  return table;
}

inline FeatureTable epoch_features(const PhaseSeries& series, Method method, double window_s) {
  return epoch_features(series, UnitPhasors(series), method, window_s);
}

}  // namespace eegfp
