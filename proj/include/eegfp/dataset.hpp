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
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "eegfp/edf.hpp"
#include "eegfp/errors.hpp"

namespace eegfp {

enum class Condition { kEyesOpen, kEyesClosed };

inline std::string_view condition_name(Condition c) {
  return c == Condition::kEyesOpen ? "EO" : "EC";
}

inline Condition parse_condition(std::string_view s) {
  if (s == "EO" || s == "eo" || s == "EyesOpen") return Condition::kEyesOpen;
  if (s == "EC" || s == "ec" || s == "EyesClosed") return Condition::kEyesClosed;
  throw UsageError("unknown condition '" + std::string(s) + "' (expected EO or EC)");
}

/// One subject/condition recording: EEG channels only, physical units (uV),
/// shared sample rate.
struct Recording {
  std::string subject_id;
  Condition condition = Condition::kEyesOpen;
  double sample_rate = 0.0;
  std::vector<std::string> channel_labels;
  std::vector<std::vector<double>> data;
  std::size_t clamped_samples = 0;

  std::size_t n_channels() const { return data.size(); }
  std::size_t n_samples() const { return data.empty() ? 0 : data.front().size(); }
};

inline double signal_rate(const EdfHeader& h, const SignalSpec& s) {
  return static_cast<double>(s.samples_per_record) / h.record_duration_s;
}

/// Drops annotation streams, checks that the remaining channels share one
/// sample rate, and converts them to physical units.
inline Recording make_recording(const EdfFile& file, std::string subject_id,
                                Condition condition) {
  Recording rec;
  rec.subject_id = std::move(subject_id);
  rec.condition = condition;

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < file.signals.size(); ++i) {
    if (!file.signals[i].is_annotation()) keep.push_back(i);
  }
  if (keep.empty()) throw DataError("recording has no data channels");

  const double rate = signal_rate(file.header, file.signals[keep.front()]);
  std::vector<std::vector<std::int16_t>> digital;
  std::vector<SignalSpec> specs;
  for (std::size_t i : keep) {
    const double r = signal_rate(file.header, file.signals[i]);
    if (std::abs(r - rate) > 1e-9 * rate) {
      throw DataError("channel '" + file.signals[i].label + "' sampled at " +
                      std::to_string(r) + " Hz, others at " + std::to_string(rate));
    }
    rec.channel_labels.push_back(file.signals[i].label);
    digital.push_back(file.digital[i]);
    specs.push_back(file.signals[i]);
  }
  auto physical = to_physical(digital, specs);
  for (const auto& row : physical.data) {
    for (double v : row) {
      if (!std::isfinite(v)) throw DataError("non-finite sample in recording");
    }
  }
  rec.sample_rate = rate;
  rec.data = std::move(physical.data);
  rec.clamped_samples = physical.clamped;
  return rec;
}

inline Recording load_recording(const std::filesystem::path& path,
                                std::string subject_id, Condition condition) {
  return make_recording(read_edf(path), std::move(subject_id), condition);
}

/// Encodes a recording as 16-bit EDF with one-second data records, mapping
/// [physical_min, physical_max] onto the full int16 range. With
/// `annotation_samples` > 0 an empty "EDF Annotations" stream is appended,
/// as EDF+ writers do.
inline EdfFile recording_to_edf(const Recording& rec, double physical_min,
                                double physical_max, std::int64_t annotation_samples = 0) {
  const double spr_real = rec.sample_rate;
  const auto spr = static_cast<std::int64_t>(std::llround(spr_real));
  if (spr < 1 || std::abs(spr_real - static_cast<double>(spr)) > 1e-9) {
    throw UsageError("recording_to_edf needs an integral sample rate");
  }
  if (rec.n_samples() % static_cast<std::size_t>(spr) != 0) {
    throw UsageError("recording length is not a whole number of seconds");
  }
  EdfFile file;
  file.header.patient_id = rec.subject_id;
  file.header.recording_id = std::string("Startdate X X X ") + std::string(condition_name(rec.condition));
  file.header.start_date = "01.01.26";
  file.header.start_time = "00.00.00";
  file.header.record_duration_s = 1.0;
  constexpr std::int32_t kDigMin = -32768;
  constexpr std::int32_t kDigMax = 32767;
  for (std::size_t c = 0; c < rec.n_channels(); ++c) {
    SignalSpec s;
    s.label = rec.channel_labels.at(c);
    s.physical_dimension = "uV";
    s.physical_min = physical_min;
    s.physical_max = physical_max;
    s.digital_min = kDigMin;
    s.digital_max = kDigMax;
    s.samples_per_record = spr;
    file.signals.push_back(s);
    std::vector<std::int16_t> row(rec.n_samples());
    const double scale = static_cast<double>(kDigMax - kDigMin) / (physical_max - physical_min);
    for (std::size_t k = 0; k < row.size(); ++k) {
      const double d = std::round((rec.data[c][k] - physical_min) * scale) + kDigMin;
      row[k] = static_cast<std::int16_t>(
          std::clamp(d, static_cast<double>(kDigMin), static_cast<double>(kDigMax)));
    }
    file.digital.push_back(std::move(row));
  }
  if (annotation_samples > 0) {
    SignalSpec s;
    s.label = std::string(kEdfAnnotationsLabel);
    s.physical_min = -1;
    s.physical_max = 1;
    s.digital_min = kDigMin;
    s.digital_max = kDigMax;
    s.samples_per_record = annotation_samples;
    file.signals.push_back(s);
    file.digital.emplace_back(
        rec.n_samples() / static_cast<std::size_t>(spr) * static_cast<std::size_t>(annotation_samples), 0);
  }
  file.header.n_signals = static_cast<std::int64_t>(file.signals.size());
  file.header.header_bytes = static_cast<std::int64_t>(256 * (file.signals.size() + 1));
  file.header.n_data_records = static_cast<std::int64_t>(rec.n_samples() / static_cast<std::size_t>(spr));
  return file;
}

struct CatalogEntry {
  std::string subject_id;
  Condition condition = Condition::kEyesOpen;
  std::filesystem::path path;

  friend bool operator==(const CatalogEntry&, const CatalogEntry&) = default;
};

struct Exclusion {
  std::filesystem::path path;
  std::string reason;

  friend bool operator==(const Exclusion&, const Exclusion&) = default;
};

struct DatasetCatalog {
  std::vector<CatalogEntry> entries;
  std::vector<Exclusion> excluded;

  std::vector<std::string> subjects() const {
    std::vector<std::string> out;
    for (const auto& e : entries) out.push_back(e.subject_id);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  const CatalogEntry* find(std::string_view subject, Condition c) const {
    for (const auto& e : entries) {
      if (e.subject_id == subject && e.condition == c) return &e;
    }
    return nullptr;
  }
};

struct CatalogOptions {
  double expected_sample_rate = 160.0;
  std::size_t expected_channels = 64;
};

/// Maps a run number onto a resting-state condition: R01 is the eyes-open
/// baseline, R02 eyes-closed. Task runs map to nothing.
inline std::optional<Condition> baseline_condition(int run) {
  if (run == 1) return Condition::kEyesOpen;
  if (run == 2) return Condition::kEyesClosed;
  return std::nullopt;
}

/// Why a recording cannot enter the experiment, or nullopt if it is usable.
inline std::optional<std::string> validate_recording(const EdfFile& file,
                                                     const CatalogOptions& opt) {
  std::size_t channels = 0;
  std::optional<double> rate;
  for (const auto& s : file.signals) {
    if (s.is_annotation()) continue;
    ++channels;
    const double r = signal_rate(file.header, s);
    if (!rate) {
      rate = r;
    } else if (std::abs(r - *rate) > 1e-9 * *rate) {
      return "mixed sample rates";
    }
  }
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return std::string(buf);
  };
  if (!rate || std::abs(*rate - opt.expected_sample_rate) > 1e-9) {
    return "sample_rate != " + fmt(opt.expected_sample_rate) +
           (rate ? " (" + fmt(*rate) + ")" : std::string());
  }
  if (channels != opt.expected_channels) {
    return "channel_count != " + std::to_string(opt.expected_channels) + " (" +
           std::to_string(channels) + ")";
  }
  return std::nullopt;
}

/// Scans `<root>/S###/S###R##.edf` for the two resting-state baseline runs.
/// Every candidate file is parsed; files that fail to parse or validate go to
/// `excluded` with a reason. Entries are sorted by (subject, condition).
inline DatasetCatalog catalog_dataset(const std::filesystem::path& root,
                                      const CatalogOptions& opt = {}) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw DataError("dataset root '" + root.string() + "' is not a directory");
  }
  if (fs::is_empty(root, ec)) {
    throw DataError("dataset root '" + root.string() + "' is empty");
  }

  static const std::regex subject_dir(R"(S(\d{3}))");
  static const std::regex run_file(R"((S\d{3})R(\d{2})\.edf)");

  std::vector<fs::path> candidates;
  for (const auto& dir : fs::directory_iterator(root)) {
    const std::string name = dir.path().filename().string();
    if (!dir.is_directory() || !std::regex_match(name, subject_dir)) continue;
    for (const auto& f : fs::directory_iterator(dir.path())) {
      std::smatch m;
      const std::string fname = f.path().filename().string();
      if (!f.is_regular_file() || !std::regex_match(fname, m, run_file)) continue;
      if (m[1].str() != name) continue;
      if (!baseline_condition(std::stoi(m[2].str()))) continue;
      candidates.push_back(f.path());
    }
  }
  std::sort(candidates.begin(), candidates.end());

  DatasetCatalog cat;
  for (const auto& path : candidates) {
    const std::string fname = path.filename().string();
    const std::string subject = fname.substr(0, 4);
    const Condition cond = *baseline_condition(std::stoi(fname.substr(5, 2)));
    try {
      const EdfFile file = read_edf(path);
      if (auto reason = validate_recording(file, opt)) {
        cat.excluded.push_back({path, *reason});
        continue;
      }
    } catch (const DataError& e) {
      cat.excluded.push_back({path, e.what()});
      continue;
    }
    cat.entries.push_back({subject, cond, path});
  }
  std::sort(cat.entries.begin(), cat.entries.end(),
            [](const CatalogEntry& a, const CatalogEntry& b) {
              return std::tie(a.subject_id, a.condition) < std::tie(b.subject_id, b.condition);
            });
  return cat;
}

}  // namespace eegfp
