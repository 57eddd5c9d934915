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

// Dataset-independent acceptance checks, shared by `eegfp selftest` and the
// acceptance binary. Each check builds its own inputs and compares against an
// oracle that does not go through the code path under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "eegfp/biometric.hpp"
#include "eegfp/connectivity.hpp"
#include "eegfp/dsp.hpp"
#include "eegfp/edf.hpp"
#include "eegfp/pipeline.hpp"
#include "eegfp/random.hpp"
#include "eegfp/synthkit.hpp"

namespace eegfp::selftest {

struct Outcome {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
};

/// "PASS  9  title: detail"; status is PASS, FAIL or SKIP.
inline std::string format_line(std::string_view status, int id, std::string_view title,
                               std::string_view detail) {
  char head[32];
  std::snprintf(head, sizeof(head), "%-4s %2d  ", std::string(status).c_str(), id);
  return head + std::string(title) + (detail.empty() ? "" : ": " + std::string(detail));
}

inline std::string format_line(const Outcome& o) {
  return format_line(o.passed ? "PASS" : "FAIL", o.id, o.title, o.detail);
}

namespace detail {

constexpr double kPi = std::numbers::pi;

inline std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

/// Collects the first few failure messages of a check.
class Failures {
 public:
  void add(std::string msg) {
    if (count_++ < 3) messages_ += (messages_.empty() ? "" : "; ") + msg;
  }
  bool any() const { return count_ > 0; }
  std::string summary() const {
    return std::to_string(count_) + " failure(s): " + messages_;
  }

 private:
  std::size_t count_ = 0;
  std::string messages_;
};

inline Outcome finish(int id, std::string title, const Failures& f, std::string ok_detail) {
  return {id, std::move(title), !f.any(), f.any() ? f.summary() : std::move(ok_detail)};
}

// FAR / FRR counted straight from the definition at one threshold.
inline std::pair<double, double> rates_at(const ScoreSet& s, double theta) {
  std::size_t fa = 0, fr = 0;
  for (double v : s.impostor) fa += v >= theta;
  for (double v : s.genuine) fr += v < theta;
  return {static_cast<double>(fa) / static_cast<double>(s.impostor.size()),
          static_cast<double>(fr) / static_cast<double>(s.genuine.size())};
}

// Operating points at every distinct score and above the largest one.
inline std::vector<std::pair<double, double>> operating_points(const ScoreSet& s) {
  std::set<double> values(s.genuine.begin(), s.genuine.end());
  values.insert(s.impostor.begin(), s.impostor.end());
  std::vector<std::pair<double, double>> pts;
  for (double v : values) pts.push_back(rates_at(s, v));
  pts.push_back(rates_at(s, std::numeric_limits<double>::infinity()));
  return pts;
}

inline double min_max_rate(const ScoreSet& s) {
  double best = 1.0;
  for (auto [fa, fr] : operating_points(s)) best = std::min(best, std::max(fa, fr));
  return best;
}

// Intersection of the (FAR, FRR) polyline with the diagonal FAR = FRR.
inline double diagonal_crossing(const ScoreSet& s) {
  const auto pts = operating_points(s);
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const auto [x0, y0] = pts[k];
    const auto [x1, y1] = pts[k + 1];
    if (x0 == y0) return x0;
    if ((x0 - y0) * (x1 - y1) <= 0) {
      const double t = (x0 - y0) / ((x0 - y0) - (x1 - y1));
      return x0 + t * (x1 - x0);
    }
  }
  return pts.back().first;
}

inline double pair_count_auc(const ScoreSet& s) {
  std::size_t twice = 0;
  for (double g : s.genuine) {
    for (double i : s.impostor) twice += g > i ? 2 : g == i ? 1 : 0;
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(s.genuine.size() * s.impostor.size()));
}

// Squared magnitude of the forward-backward Butterworth band-pass, from the
// analog prototype at the pre-warped frequency.
inline double butterworth_power(double f, const BandDefinition& band, double rate, int order) {
  auto warp = [rate](double hz) { return 2.0 * rate * std::tan(kPi * hz / rate); };
  const double w = warp(f), w1 = warp(band.low_hz), w2 = warp(band.high_hz);
  const double x = (w * w - w1 * w2) / (w * (w2 - w1));
  return 1.0 / (1.0 + std::pow(x, 2 * order));
}

inline std::vector<double> tone(double f, double phase, std::size_t n, double rate) {
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) {
    x[t] = std::cos(2.0 * kPi * f * static_cast<double>(t) / rate + phase);
  }
  return x;
}

inline double central_peak(const std::vector<double>& x) {
  double m = 0.0;
  for (std::size_t i = x.size() / 10; i < x.size() * 9 / 10; ++i) m = std::max(m, std::abs(x[i]));
  return m;
}

inline int xcorr_peak_lag(const std::vector<double>& x, const std::vector<double>& y, int span,
                          std::size_t margin) {
  int best_lag = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int lag = -span; lag <= span; ++lag) {
    double acc = 0.0;
    for (std::size_t t = margin; t + margin < x.size(); ++t) {
      acc += x[t] * y[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(t) + lag)];
    }
    if (acc > best) {
      best = acc;
      best_lag = lag;
    }
  }
  return best_lag;
}

// Least-squares slope of the unwrapped phase over the central 80 %, rad/s.
inline double central_slope(const std::vector<double>& phase, double rate) {
  const auto u = unwrap_phase(phase);
  const std::size_t lo = u.size() / 10, hi = u.size() - u.size() / 10;
  double st = 0, sp = 0, stt = 0, stp = 0;
  const double n = static_cast<double>(hi - lo);
  for (std::size_t i = lo; i < hi; ++i) {
    const double t = static_cast<double>(i) / rate;
    st += t;
    sp += u[i];
    stt += t * t;
    stp += t * u[i];
  }
  return (n * stp - st * sp) / (n * stt - st * st);
}

inline EdfFile random_edf(SplitMix64& g) {
  EdfFile f;
  f.header.patient_id = "X " + std::to_string(g.below(100000));
  f.header.recording_id = "Startdate X X X run" + std::to_string(g.below(100));
  f.header.start_date = "01.01.26";
  f.header.start_time = "12.00.00";
  f.header.record_duration_s = 0.25 * static_cast<double>(1 + g.below(8));
  const std::size_t ns = 1 + g.below(6);
  const std::size_t records = 1 + g.below(5);
  for (std::size_t i = 0; i < ns; ++i) {
    SignalSpec s;
    s.label = "EEG " + std::to_string(i);
    s.physical_dimension = "uV";
    s.physical_min = -static_cast<double>(1 + g.below(8000)) / 8.0;
    s.physical_max = static_cast<double>(1 + g.below(8000)) / 4.0;
    s.digital_min = -32768 + static_cast<std::int32_t>(g.below(1000));
    s.digital_max = 32767 - static_cast<std::int32_t>(g.below(1000));
    s.samples_per_record = static_cast<std::int64_t>(1 + g.below(32));
    f.signals.push_back(s);
    std::vector<std::int16_t> row(records * static_cast<std::size_t>(s.samples_per_record));
    for (auto& v : row) v = static_cast<std::int16_t>(g() & 0xFFFF);
    f.digital.push_back(std::move(row));
  }
  f.header.n_signals = static_cast<std::int64_t>(ns);
  f.header.header_bytes = static_cast<std::int64_t>(256 * (ns + 1));
  f.header.n_data_records = static_cast<std::int64_t>(records);
  return f;
}

/// Temporary directory removed on scope exit.
class ScratchDir {
 public:
  ScratchDir() {
    SplitMix64 g(static_cast<std::uint64_t>(
        std::chrono::steady_clock::now().time_since_epoch().count()));
    path_ = std::filesystem::temp_directory_path() / ("eegfp_selftest_" + hex64(g()));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace detail

/// PLI/PLV against closed-form values and Monte-Carlo bounds over 1000 seeds.
inline Outcome phase_metric_oracles() {
  using detail::kPi;
  detail::Failures fail;
  constexpr std::uint64_t kSeeds = 1000;
  std::size_t pli_small = 0, plv_small = 0;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    SplitMix64 g(mix_seed(seed, 0x8));
    // Constant nonzero lag in (0, pi): both metrics are exactly one.
    const double lag = kPi * (0.01 + 0.98 * g.uniform01());
    const std::size_t n = 64 + g.below(2000);
    std::vector<double> a(n), b(n), alt(n), zero(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      b[t] = g.uniform_phase();
      a[t] = b[t] + lag;
      alt[t] = t % 2 ? kPi / 2 : -kPi / 2;
    }
    if (pli(a, b) != 1.0) fail.add("constant-lag PLI != 1 at seed " + std::to_string(seed));
    if (std::abs(plv(a, b) - 1.0) > 1e-12) fail.add("constant-lag PLV != 1 at seed " + std::to_string(seed));
    // Zero lag separates the two metrics.
    if (pli(b, b) != 0.0) fail.add("zero-lag PLI != 0 at seed " + std::to_string(seed));
    if (plv(b, b) != 1.0) fail.add("zero-lag PLV != 1 at seed " + std::to_string(seed));
    if (n % 2 == 0 && plv(alt, zero) > 1e-12) fail.add("alternating PLV != 0");

    const auto u = synth::uniform_phase_pair(10000, seed);
    pli_small += pli(u[0], u[1]) <= 0.03;
    plv_small += plv(u[0], u[1]) <= 0.03;

    // ch1 trails ch0 by pi/4, ch2 is independent; n = 1920.
    PhaseEpoch e;
    e.phases.assign(3, std::vector<double>(1920));
    for (std::size_t t = 0; t < 1920; ++t) {
      const double base = wrap_to_pi(2.0 * kPi * 25.0 * static_cast<double>(t) / 160.0);
      e.phases[0][t] = base;
      e.phases[1][t] = wrap_to_pi(base - kPi / 4);
      e.phases[2][t] = g.uniform_phase();
    }
    const auto m = connectivity_matrix(e, Method::kPLV);
    if (std::abs(m.at(0, 1) - 1.0) > 0.02) fail.add("lagged-pair PLV " + detail::fmt("%.4f", m.at(0, 1)));
    if (m.at(0, 2) > 0.1) fail.add("independent-channel PLV " + detail::fmt("%.4f", m.at(0, 2)));
    if (m.at(0, 0) != 1.0 || connectivity_matrix(e, Method::kPLI).at(2, 2) != 0.0) {
      fail.add("matrix diagonal not exact");
    }
  }
  if (plv(synth::uniform_phase_pair(1, 3)[0], synth::uniform_phase_pair(1, 3)[1]) != 1.0) {
    fail.add("PLV of a single sample != 1");
  }
  const double need = 0.99 * static_cast<double>(kSeeds);
  if (static_cast<double>(pli_small) < need) fail.add("uniform PLI <= 0.03 for only " + std::to_string(pli_small));
  if (static_cast<double>(plv_small) < need) fail.add("uniform PLV <= 0.03 for only " + std::to_string(plv_small));
  return detail::finish(8, "PLI/PLV analytic and Monte-Carlo oracles", fail,
                        "1000 seeds; uniform-phase bound held for PLI " + std::to_string(pli_small) +
                            ", PLV " + std::to_string(plv_small));
}

/// EER, ROC and AUC against brute-force enumeration on every pair of score
/// multisets of size 1..6 over a 4-value alphabet.
inline Outcome eer_auc_enumeration() {
  detail::Failures fail;
  const std::vector<double> alphabet{0.2, 0.4, 0.6, 0.8};
  std::vector<std::vector<double>> sets;
  std::vector<double> cur;
  auto grow = [&](auto&& self, std::size_t from, std::size_t left) -> void {
    if (left == 0) {
      sets.push_back(cur);
      return;
    }
    for (std::size_t a = from; a < alphabet.size(); ++a) {
      cur.push_back(alphabet[a]);
      self(self, a, left - 1);
      cur.pop_back();
    }
  };
  for (std::size_t k = 1; k <= 6; ++k) grow(grow, 0, k);

  std::size_t checked = 0, tie_free = 0;
  double worst_step_gap = 0.0;
  for (const auto& g : sets) {
    for (const auto& im : sets) {
      ScoreSet s;
      s.genuine = g;
      s.impostor = im;
      ++checked;
      const RocCurve curve = roc(s);
      for (const auto& p : curve.points) {
        const auto [fa, fr] = detail::rates_at(s, p.threshold);
        if (p.far != fa || p.frr != fr) {
          fail.add("ROC point differs from direct count");
          break;
        }
      }
      const double e = eer(curve);
      const double step = 1.0 / static_cast<double>(std::max(g.size(), im.size()));
      const double crossing = detail::diagonal_crossing(s);
      if (std::abs(e - crossing) > 1e-12) {
        fail.add("EER " + detail::fmt("%.6f", e) + " vs crossing " + detail::fmt("%.6f", crossing));
      }
      const bool shared = std::any_of(g.begin(), g.end(), [&](double v) {
        return std::find(im.begin(), im.end(), v) != im.end();
      });
      if (!shared) {
        ++tie_free;
        const double gap = std::abs(e - detail::min_max_rate(s));
        worst_step_gap = std::max(worst_step_gap, gap / step);
        if (gap > step + 1e-12) fail.add("EER off min-max by more than one step");
      }
      if (auc(s) != detail::pair_count_auc(s)) fail.add("AUC differs from pair count");
    }
  }
  return detail::finish(9, "EER/AUC brute-force enumeration", fail,
                        std::to_string(checked) + " score-set pairs; " + std::to_string(tie_free) +
                            " without cross-class ties within " +
                            detail::fmt("%.3g", worst_step_gap) + " grid steps of min-max");
}

/// Zero-phase band-pass and Hilbert phase against the analytic design.
inline Outcome zero_phase_filter_checks() {
  using detail::kPi;
  detail::Failures fail;
  constexpr double kRate = 160.0;
  double worst_attenuation_db = std::numeric_limits<double>::infinity();
  for (const auto band : {BandDefinition::high_beta(), BandDefinition::gamma()}) {
    const FilterSpec spec = design_bandpass(band, kRate, 4);
    if (!spec.is_stable()) fail.add(std::string(band_name(band.name)) + " filter unstable");
    for (double f = band.low_hz + 0.5; f < band.high_hz; f += 0.5) {
      const auto x = detail::tone(f, 0.7, 4800, kRate);
      const auto y = zero_phase_filter(x, spec);
      const int lag = detail::xcorr_peak_lag(x, y, static_cast<int>(kRate / f / 2), 500);
      if (lag != 0) fail.add("lag " + std::to_string(lag) + " at " + detail::fmt("%g Hz", f));
    }
    // Stop-band tones where the design promises at least 40 dB.
    for (double f = 1.0; f < kRate / 2; f += 1.0) {
      const double power = detail::butterworth_power(f, band, kRate, 4);
      if (power > 1e-2) continue;
      const double designed = std::norm(spec.response(f));
      if (std::abs(designed - power) > 1e-9) fail.add("design deviates from Butterworth oracle");
      const double out = detail::central_peak(zero_phase_filter(detail::tone(f, 0.0, 9600, kRate), spec));
      worst_attenuation_db = std::min(worst_attenuation_db, -20.0 * std::log10(out));
      if (out > 1e-2) fail.add("only " + detail::fmt("%.1f dB", -20 * std::log10(out)) + " at " + detail::fmt("%g Hz", f));
    }
  }
  for (double f : {10.0, 25.0, 37.0}) {
    const double slope = detail::central_slope(analytic_phase(detail::tone(f, 0.3, 960, kRate)), kRate);
    const double rel = std::abs(slope - 2 * kPi * f) / (2 * kPi * f);
    if (rel >= 0.005) fail.add("phase slope error " + detail::fmt("%.4f", rel) + " at " + detail::fmt("%g Hz", f));
  }
  return detail::finish(10, "zero-phase filter and analytic phase", fail,
                        "in-band lag 0 at every tone; worst stop-band attenuation " +
                            detail::fmt("%.1f dB", worst_attenuation_db));
}

/// EDF serialize/parse round trip and exact scaling endpoints.
inline Outcome edf_round_trip() {
  detail::Failures fail;
  SplitMix64 g(11);
  constexpr int kFiles = 300;
  for (int i = 0; i < kFiles; ++i) {
    const EdfFile f = detail::random_edf(g);
    const auto bytes = serialize_edf(f);
    const EdfFile back = parse_edf(bytes);
    if (back.digital != f.digital) fail.add("samples changed in round trip");
    if (serialize_edf(back) != bytes) fail.add("re-serialized bytes differ");
    for (std::size_t s = 0; s < f.signals.size(); ++s) {
      const SignalSpec& spec = back.signals[s];
      if (spec.physical_min != f.signals[s].physical_min || spec.physical_max != f.signals[s].physical_max ||
          spec.digital_min != f.signals[s].digital_min || spec.digital_max != f.signals[s].digital_max) {
        fail.add("signal header changed in round trip");
      }
      if (digital_to_physical(spec.digital_min, spec) != spec.physical_min ||
          digital_to_physical(spec.digital_max, spec) != spec.physical_max) {
        fail.add("scaling endpoint not exact");
      }
    }
  }
  return detail::finish(11, "EDF round trip and scaling endpoints", fail,
                        std::to_string(kFiles) + " random files bit-exact");
}

/// Synthetic cohort through the full pipeline: EDF files, band-pass, phase,
/// features and scoring. Every curve's EER must fall with window length.
inline Outcome synthetic_biometric(const synth::CohortSpec& spec = {}) {
  detail::Failures fail;
  detail::ScratchDir scratch;
  synth::write_cohort_dataset(spec, scratch.path() / "data");
  SweepConfig cfg;
  cfg.dataset_root = scratch.path() / "data";
  cfg.output_dir = scratch.path() / "out";
  cfg.use_cache = false;
  cfg.bands = {BandName::kHighBeta};
  cfg.catalog.expected_sample_rate = spec.sample_rate;
  cfg.catalog.expected_channels = spec.channels;
  const auto rows = run_sweep(cfg);
  std::string detail_text;
  for (Condition c : cfg.conditions) {
    for (Method m : cfg.methods) {
      std::vector<double> w, e;
      for (const auto& r : rows) {
        if (r.condition == c && r.method == m) {
          w.push_back(r.window_s);
          e.push_back(r.eer);
        }
      }
      const double rho = spearman(w, e);
      const std::string name = std::string(condition_name(c)) + "/" + std::string(method_name(m));
      detail_text += (detail_text.empty() ? "" : ", ") + name + " rho=" + detail::fmt("%.3f", rho) +
                     " (EER " + detail::fmt("%.3f", e.front()) + "->" + detail::fmt("%.3f", e.back()) + ")";
      if (rho > -0.9) fail.add(name + " rho " + detail::fmt("%.3f", rho));
      if (!(e.back() < e.front())) fail.add(name + " EER does not fall");
    }
  }
  return detail::finish(12, "synthetic end-to-end EER trend", fail, detail_text);
}

/// Runs checks 8-12 in order. An exception inside a check is a failure of
/// that check; `on_result` sees each outcome as soon as it is known.
inline std::vector<Outcome> run_all(const std::function<void(const Outcome&)>& on_result = {}) {
  struct Entry {
    int id;
    const char* title;
    Outcome (*run)();
  };
  static constexpr Entry kChecks[] = {
      {8, "PLI/PLV analytic and Monte-Carlo oracles", &phase_metric_oracles},
      {9, "EER/AUC brute-force enumeration", &eer_auc_enumeration},
      {10, "zero-phase filter and analytic phase", &zero_phase_filter_checks},
      {11, "EDF round trip and scaling endpoints", &edf_round_trip},
      {12, "synthetic end-to-end EER trend", [] { return synthetic_biometric(); }},
  };
  std::vector<Outcome> out;
  for (const auto& c : kChecks) {
    try {
      out.push_back(c.run());
    } catch (const std::exception& e) {
      out.push_back({c.id, c.title, false, std::string("exception: ") + e.what()});
    }
    if (on_result) on_result(out.back());
  }
  return out;
}

}  // namespace eegfp::selftest
