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
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "eegfp/errors.hpp"

namespace eegfp {

// Global header field widths, in file order.
namespace edf_layout {
inline constexpr std::size_t kVersion = 8;
inline constexpr std::size_t kPatientId = 80;
inline constexpr std::size_t kRecordingId = 80;
inline constexpr std::size_t kStartDate = 8;
inline constexpr std::size_t kStartTime = 8;
inline constexpr std::size_t kHeaderBytes = 8;
inline constexpr std::size_t kReserved = 44;
inline constexpr std::size_t kNumRecords = 8;
inline constexpr std::size_t kRecordDuration = 8;
inline constexpr std::size_t kNumSignals = 4;
inline constexpr std::size_t kGlobalHeader = 256;
inline constexpr std::size_t kSignalHeader = 256;

// Per-signal field widths. Each field is stored for all signals before the
// next field begins.
inline constexpr std::size_t kLabel = 16;
inline constexpr std::size_t kTransducer = 80;
inline constexpr std::size_t kDimension = 8;
inline constexpr std::size_t kPhysMin = 8;
inline constexpr std::size_t kPhysMax = 8;
inline constexpr std::size_t kDigMin = 8;
inline constexpr std::size_t kDigMax = 8;
inline constexpr std::size_t kPrefiltering = 80;
inline constexpr std::size_t kSamplesPerRecord = 8;
inline constexpr std::size_t kSignalReserved = 32;

inline constexpr std::size_t kBytesPerSample = 2;
}  // namespace edf_layout

inline constexpr std::string_view kEdfAnnotationsLabel = "EDF Annotations";

struct EdfHeader {
  std::string version = "0";
  std::string patient_id;
  std::string recording_id;
  std::string start_date;
  std::string start_time;
  std::int64_t header_bytes = 0;
  std::string reserved;
  std::int64_t n_data_records = 0;
  double record_duration_s = 1.0;
  std::int64_t n_signals = 0;
};

struct SignalSpec {
  std::string label;
  std::string transducer;
  std::string physical_dimension;
  double physical_min = 0.0;
  double physical_max = 0.0;
  std::int32_t digital_min = 0;
  std::int32_t digital_max = 0;
  std::string prefiltering;
  std::int64_t samples_per_record = 0;
  std::string reserved;

  double gain() const {
    return (physical_max - physical_min) /
           static_cast<double>(digital_max - digital_min);
  }
  bool is_annotation() const { return label == kEdfAnnotationsLabel; }
};

/// A decoded EDF file: header, signal headers and the deinterleaved raw
/// digital samples (one row per signal).
struct EdfFile {
  EdfHeader header;
  std::vector<SignalSpec> signals;
  std::vector<std::vector<std::int16_t>> digital;
  std::vector<std::string> warnings;
};

enum class EdfErrorKind {
  kTruncated,
  kHeaderSizeMismatch,
  kBadNumber,
  kInvalidField,
};

class EdfError : public DataError {
 public:
  EdfError(EdfErrorKind kind, std::size_t offset, const std::string& what)
      : DataError("EDF " + std::string(kind_name(kind)) + " at byte " +
                  std::to_string(offset) + ": " + what),
        kind_(kind),
        offset_(offset) {}

  EdfErrorKind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

  static const char* kind_name(EdfErrorKind kind) {
    switch (kind) {
      case EdfErrorKind::kTruncated:
        return "truncated file";
      case EdfErrorKind::kHeaderSizeMismatch:
        return "header size mismatch";
      case EdfErrorKind::kBadNumber:
        return "non-numeric field";
      case EdfErrorKind::kInvalidField:
        return "invalid field";
    }
    return "error";
  }

 private:
  EdfErrorKind kind_;
  std::size_t offset_;
};

namespace edf_detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(' ');
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(' ');
  return s.substr(first, last - first + 1);
}

// Sequential reader over the header bytes that tracks the byte offset of
// every field for error reporting.
class FieldReader {
 public:
  explicit FieldReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return offset_; }

  std::string text(std::size_t width, std::string_view name) {
    require(width, name);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + offset_),
                  width);
    offset_ += width;
    return std::string(trim(s));
  }

  template <typename T>
  T number(std::size_t width, std::string_view name) {
    const std::size_t at = offset_;
    const std::string s = text(width, name);
    T value{};
    if (s.empty()) {
      throw EdfError(EdfErrorKind::kBadNumber, at,
                     std::string(name) + " is blank");
    }
    const char* first = s.data();
    const char* last = s.data() + s.size();
    // from_chars rejects a leading '+', which some writers emit.
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
      throw EdfError(EdfErrorKind::kBadNumber, at,
                     std::string(name) + " '" + s + "' is not a number");
    }
    return value;
  }

 private:
  void require(std::size_t width, std::string_view name) const {
    if (offset_ + width > bytes_.size()) {
      throw EdfError(EdfErrorKind::kTruncated, bytes_.size(),
                     "file ends inside " + std::string(name));
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t offset_ = 0;
};

inline void put_text(std::vector<std::uint8_t>& out, std::string_view s,
                     std::size_t width, std::string_view name) {
  if (s.size() > width) {
    throw UsageError("EDF field " + std::string(name) + " '" + std::string(s) +
                     "' exceeds " + std::to_string(width) + " characters");
  }
  out.insert(out.end(), s.begin(), s.end());
  out.insert(out.end(), width - s.size(), static_cast<std::uint8_t>(' '));
}

inline std::string format_integer(std::int64_t v) { return std::to_string(v); }

// Shortest decimal that parses back to exactly v, if it fits the field;
// otherwise the closest %g rendering that fits.
inline std::string format_real(double v, std::size_t width) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, ptr);
  if (ec == std::errc() && s.size() <= width) return s;
  for (int precision = static_cast<int>(width); precision > 0; --precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::string_view(buf).size() <= width) return buf;
  }
  return s.substr(0, width);
}

}  // namespace edf_detail

/// Decodes a complete EDF/EDF+ file image.
///
/// Numeric header fields are trimmed of spaces and parsed strictly. A record
/// count of -1 (writer did not finalize) is replaced by the number of whole
/// records present. Bytes after the last whole record are ignored and
/// reported in `warnings`.
inline EdfFile parse_edf(std::span<const std::uint8_t> bytes) {
  namespace L = edf_layout;
  EdfFile file;
  EdfHeader& h = file.header;
  edf_detail::FieldReader r(bytes);

  h.version = r.text(L::kVersion, "version");
  h.patient_id = r.text(L::kPatientId, "patient id");
  h.recording_id = r.text(L::kRecordingId, "recording id");
  h.start_date = r.text(L::kStartDate, "start date");
  h.start_time = r.text(L::kStartTime, "start time");
  const std::size_t header_bytes_at = r.offset();
  h.header_bytes = r.number<std::int64_t>(L::kHeaderBytes, "header bytes");
  h.reserved = r.text(L::kReserved, "reserved");
  const std::size_t n_records_at = r.offset();
  h.n_data_records = r.number<std::int64_t>(L::kNumRecords, "number of records");
  const std::size_t duration_at = r.offset();
  h.record_duration_s = r.number<double>(L::kRecordDuration, "record duration");
  const std::size_t n_signals_at = r.offset();
  h.n_signals = r.number<std::int64_t>(L::kNumSignals, "number of signals");

  if (h.n_signals < 1) {
    throw EdfError(EdfErrorKind::kInvalidField, n_signals_at,
                   "number of signals must be positive");
  }
  const std::int64_t expected_header =
      static_cast<std::int64_t>(L::kGlobalHeader + L::kSignalHeader * h.n_signals);
  if (h.header_bytes != expected_header) {
    throw EdfError(EdfErrorKind::kHeaderSizeMismatch, header_bytes_at,
                   "header declares " + std::to_string(h.header_bytes) +
                       " bytes but " + std::to_string(h.n_signals) +
                       " signals require " + std::to_string(expected_header));
  }
  if (!(h.record_duration_s > 0.0) || !std::isfinite(h.record_duration_s)) {
    throw EdfError(EdfErrorKind::kInvalidField, duration_at,
                   "record duration must be positive");
  }
  if (h.n_data_records < 1 && h.n_data_records != -1) {
    throw EdfError(EdfErrorKind::kInvalidField, n_records_at,
                   "number of records must be positive or -1");
  }

  const auto ns = static_cast<std::size_t>(h.n_signals);
  file.signals.resize(ns);
  auto& sig = file.signals;
  std::vector<std::size_t> field_at(ns);

  for (auto& s : sig) s.label = r.text(L::kLabel, "label");
  for (auto& s : sig) s.transducer = r.text(L::kTransducer, "transducer");
  for (auto& s : sig) s.physical_dimension = r.text(L::kDimension, "physical dimension");
  for (auto& s : sig) s.physical_min = r.number<double>(L::kPhysMin, "physical minimum");
  for (std::size_t i = 0; i < ns; ++i) {
    field_at[i] = r.offset();
    sig[i].physical_max = r.number<double>(L::kPhysMax, "physical maximum");
  }
  for (auto& s : sig) s.digital_min = r.number<std::int32_t>(L::kDigMin, "digital minimum");
  for (std::size_t i = 0; i < ns; ++i) {
    const std::size_t at = r.offset();
    sig[i].digital_max = r.number<std::int32_t>(L::kDigMax, "digital maximum");
    if (sig[i].digital_min >= sig[i].digital_max) {
      throw EdfError(EdfErrorKind::kInvalidField, at,
                     "signal " + std::to_string(i) +
                         ": digital minimum must be below digital maximum");
    }
    if (sig[i].physical_min == sig[i].physical_max && !sig[i].is_annotation()) {
      throw EdfError(EdfErrorKind::kInvalidField, field_at[i],
                     "signal " + std::to_string(i) +
                         ": physical minimum equals physical maximum");
    }
  }
  for (auto& s : sig) s.prefiltering = r.text(L::kPrefiltering, "prefiltering");
  for (std::size_t i = 0; i < ns; ++i) {
    const std::size_t at = r.offset();
    sig[i].samples_per_record =
        r.number<std::int64_t>(L::kSamplesPerRecord, "samples per record");
    if (sig[i].samples_per_record < 1) {
      throw EdfError(EdfErrorKind::kInvalidField, at,
                     "signal " + std::to_string(i) +
                         ": samples per record must be positive");
    }
  }
  for (auto& s : sig) s.reserved = r.text(L::kSignalReserved, "signal reserved");

  std::size_t record_bytes = 0;
  for (const auto& s : sig) {
    record_bytes += static_cast<std::size_t>(s.samples_per_record) * L::kBytesPerSample;
  }
  const std::size_t data_start = static_cast<std::size_t>(h.header_bytes);
  const std::size_t available = bytes.size() - data_start;
  if (h.n_data_records == -1) {
    h.n_data_records = static_cast<std::int64_t>(available / record_bytes);
    if (h.n_data_records < 1) {
      throw EdfError(EdfErrorKind::kTruncated, bytes.size(),
                     "record count unknown and no complete data record present");
    }
    file.warnings.push_back("record count -1 replaced by " +
                            std::to_string(h.n_data_records) + " from file size");
  }
  const auto n_records = static_cast<std::size_t>(h.n_data_records);
  const std::size_t data_bytes = n_records * record_bytes;
  if (available < data_bytes) {
    throw EdfError(EdfErrorKind::kTruncated, bytes.size(),
                   "expected " + std::to_string(data_start + data_bytes) +
                       " bytes for " + std::to_string(n_records) + " records");
  }
  if (available > data_bytes) {
    file.warnings.push_back(std::to_string(available - data_bytes) +
                            " trailing bytes after the last data record ignored");
  }

  file.digital.resize(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    file.digital[i].resize(n_records * static_cast<std::size_t>(sig[i].samples_per_record));
  }
  const std::uint8_t* p = bytes.data() + data_start;
  for (std::size_t rec = 0; rec < n_records; ++rec) {
    for (std::size_t i = 0; i < ns; ++i) {
      const auto spr = static_cast<std::size_t>(sig[i].samples_per_record);
      std::int16_t* dst = file.digital[i].data() + rec * spr;
      for (std::size_t k = 0; k < spr; ++k, p += 2) {
        dst[k] = static_cast<std::int16_t>(
            static_cast<std::uint16_t>(p[0]) | (static_cast<std::uint16_t>(p[1]) << 8));
      }
    }
  }
  return file;
}

/// Encodes an EdfFile. header_bytes, n_signals and n_data_records are derived
/// from the signal list and sample rows; every row must hold a whole number
/// of records.
inline std::vector<std::uint8_t> serialize_edf(const EdfFile& file) {
  namespace L = edf_layout;
  using edf_detail::format_integer;
  using edf_detail::format_real;
  using edf_detail::put_text;

  const auto& sig = file.signals;
  const std::size_t ns = sig.size();
  if (ns == 0 || file.digital.size() != ns) {
    throw UsageError("EDF serialization needs one sample row per signal");
  }
  const std::size_t n_records =
      file.digital[0].size() / static_cast<std::size_t>(sig[0].samples_per_record);
  for (std::size_t i = 0; i < ns; ++i) {
    if (sig[i].samples_per_record < 1 ||
        file.digital[i].size() !=
            n_records * static_cast<std::size_t>(sig[i].samples_per_record)) {
      throw UsageError("signal " + std::to_string(i) +
                       " does not hold a whole number of data records");
    }
  }

  const auto& h = file.header;
  std::vector<std::uint8_t> out;
  out.reserve(L::kGlobalHeader * (ns + 1));
  put_text(out, h.version, L::kVersion, "version");
  put_text(out, h.patient_id, L::kPatientId, "patient id");
  put_text(out, h.recording_id, L::kRecordingId, "recording id");
  put_text(out, h.start_date, L::kStartDate, "start date");
  put_text(out, h.start_time, L::kStartTime, "start time");
  put_text(out, format_integer(static_cast<std::int64_t>(L::kGlobalHeader + L::kSignalHeader * ns)),
           L::kHeaderBytes, "header bytes");
  put_text(out, h.reserved, L::kReserved, "reserved");
  put_text(out, format_integer(static_cast<std::int64_t>(n_records)), L::kNumRecords,
           "number of records");
  put_text(out, format_real(h.record_duration_s, L::kRecordDuration), L::kRecordDuration,
           "record duration");
  put_text(out, format_integer(static_cast<std::int64_t>(ns)), L::kNumSignals,
           "number of signals");

  for (const auto& s : sig) put_text(out, s.label, L::kLabel, "label");
  for (const auto& s : sig) put_text(out, s.transducer, L::kTransducer, "transducer");
  for (const auto& s : sig) put_text(out, s.physical_dimension, L::kDimension, "dimension");
  for (const auto& s : sig) put_text(out, format_real(s.physical_min, L::kPhysMin), L::kPhysMin, "physical minimum");
  for (const auto& s : sig) put_text(out, format_real(s.physical_max, L::kPhysMax), L::kPhysMax, "physical maximum");
  for (const auto& s : sig) put_text(out, format_integer(s.digital_min), L::kDigMin, "digital minimum");
  for (const auto& s : sig) put_text(out, format_integer(s.digital_max), L::kDigMax, "digital maximum");
  for (const auto& s : sig) put_text(out, s.prefiltering, L::kPrefiltering, "prefiltering");
  for (const auto& s : sig) put_text(out, format_integer(s.samples_per_record), L::kSamplesPerRecord, "samples per record");
  for (const auto& s : sig) put_text(out, s.reserved, L::kSignalReserved, "signal reserved");

  for (std::size_t rec = 0; rec < n_records; ++rec) {
    for (std::size_t i = 0; i < ns; ++i) {
      const auto spr = static_cast<std::size_t>(sig[i].samples_per_record);
      const std::int16_t* src = file.digital[i].data() + rec * spr;
      for (std::size_t k = 0; k < spr; ++k) {
        const auto u = static_cast<std::uint16_t>(src[k]);
        out.push_back(static_cast<std::uint8_t>(u & 0xFF));
        out.push_back(static_cast<std::uint8_t>(u >> 8));
      }
    }
  }
  return out;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw DataError("read error on " + path.string());
  return bytes;
}

inline EdfFile read_edf(const std::filesystem::path& path) {
  return parse_edf(read_file_bytes(path));
}

inline void write_edf(const std::filesystem::path& path, const EdfFile& file) {
  const auto bytes = serialize_edf(file);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed on " + path.string());
}

/// Physical-unit samples, one row per signal, plus the number of digital
/// values that fell outside [digital_min, digital_max] and were clamped.
struct PhysicalSamples {
  std::vector<std::vector<double>> data;
  std::size_t clamped = 0;
};

/// Maps one digital value onto the physical scale. std::lerp keeps both
/// endpoints exact and the map monotone.
inline double digital_to_physical(std::int32_t digital, const SignalSpec& spec) {
  const double t = static_cast<double>(digital - spec.digital_min) /
                   static_cast<double>(spec.digital_max - spec.digital_min);
  return std::lerp(spec.physical_min, spec.physical_max, t);
}

inline PhysicalSamples to_physical(
    std::span<const std::vector<std::int16_t>> digital,
    std::span<const SignalSpec> specs) {
  if (digital.size() != specs.size()) {
    throw UsageError("to_physical: " + std::to_string(digital.size()) +
                     " sample rows for " + std::to_string(specs.size()) + " signals");
  }
  PhysicalSamples out;
  out.data.resize(digital.size());
  for (std::size_t i = 0; i < digital.size(); ++i) {
    const SignalSpec& s = specs[i];
    if (s.digital_max <= s.digital_min) {
      throw DataError("signal '" + s.label + "' has zero digital range");
    }
    const double g = s.gain();
    if (!std::isfinite(g) || g == 0.0) {
      throw DataError("signal '" + s.label + "' has a degenerate gain");
    }
    auto& row = out.data[i];
    row.resize(digital[i].size());
    for (std::size_t k = 0; k < row.size(); ++k) {
      std::int32_t d = digital[i][k];
      if (d < s.digital_min || d > s.digital_max) {
        d = std::clamp(d, s.digital_min, s.digital_max);
        ++out.clamped;
      }
      row[k] = digital_to_physical(d, s);
    }
  }
  return out;
}

}  // namespace eegfp
