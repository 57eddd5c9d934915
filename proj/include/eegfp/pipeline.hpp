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
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <utility>
#include <vector>

#include "eegfp/biometric.hpp"
#include "eegfp/connectivity.hpp"
#include "eegfp/dataset.hpp"
#include "eegfp/dsp.hpp"
#include "eegfp/errors.hpp"
#include "eegfp/parallel.hpp"
#include "eegfp/random.hpp"

namespace eegfp {

inline constexpr std::string_view kCacheDirEnv = "EEGFP_CACHE_DIR";
inline constexpr std::string_view kResultsHeader =
    "condition,band,method,window_s,eer,auc,one_minus_auc,n_subjects,"
    "n_epochs_per_subject,n_genuine,n_impostor,impostor_sampling";

struct SweepConfig {
  std::filesystem::path dataset_root;
  std::vector<Condition> conditions{Condition::kEyesOpen, Condition::kEyesClosed};
  std::vector<BandName> bands{BandName::kHighBeta, BandName::kGamma};
  std::vector<Method> methods{Method::kPLI, Method::kPLV};
  WindowGrid window_grid = WindowGrid::standard();
  std::optional<std::size_t> impostor_cap = 1'000'000;  // nullopt: exhaustive
  std::vector<std::string> subject_filter;              // empty: all subjects
  std::filesystem::path output_dir = "results";
  std::uint64_t seed = 42;
  int filter_order = 4;
  std::optional<std::filesystem::path> cache_dir;
  bool use_cache = true;
  CatalogOptions catalog;
  std::size_t threads = 0;

  std::size_t cell_count() const {
    return conditions.size() * bands.size() * methods.size() * window_grid.lengths_s.size();
  }

  /// Cache directory: $EEGFP_CACHE_DIR, else `cache_dir`, else
  /// <output_dir>/feature_cache.
  std::filesystem::path resolved_cache_dir() const {
    if (const char* env = std::getenv(std::string(kCacheDirEnv).c_str()); env && *env) {
      return env;
    }
    return cache_dir ? *cache_dir : output_dir / "feature_cache";
  }

  void validate() const {
    if (cell_count() == 0) {
      throw UsageError("configuration selects no (condition, band, method, window) cells");
    }
    window_grid.validate(catalog.expected_sample_rate);
    if (filter_order < 1) throw UsageError("filter_order must be positive");
    if (impostor_cap && *impostor_cap == 0) throw UsageError("impostor_cap must be positive");
  }
};

namespace pipeline_detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T v{};
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), last, v);
  if (ec != std::errc() || ptr != last) {
    throw UsageError("config key '" + key + "': '" + value + "' is not a valid number");
  }
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw UsageError("config key '" + key + "': '" + value + "' is not a boolean");
}

template <typename T>
void sort_unique(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace pipeline_detail

/// Parses the flat `key = value` config format. Blank lines and lines
/// starting with '#' are ignored; every key is optional.
///
///   dataset_root, output_dir, cache_dir      paths
///   conditions = EO, EC                      subset of {EO, EC}
///   bands = beta, gamma                      subset of {beta, gamma}
///   methods = PLI, PLV                       subset of {PLI, PLV}
///   windows = default | 0.5, 1, ...          seconds
///   impostor_cap = 1000000 | exhaustive
///   subjects = S001, S002                    empty: all
///   seed, filter_order, threads              integers
///   use_cache                                true | false
///   sample_rate, channels                    catalog validation targets
inline SweepConfig parse_config(std::istream& in) {
  using namespace pipeline_detail;
  SweepConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key == "dataset_root") {
      cfg.dataset_root = value;
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else if (key == "cache_dir") {
      cfg.cache_dir = value.empty() ? std::nullopt : std::optional<std::filesystem::path>(value);
    } else if (key == "conditions") {
      cfg.conditions.clear();
      for (const auto& v : split_list(value)) cfg.conditions.push_back(parse_condition(v));
      sort_unique(cfg.conditions);
    } else if (key == "bands") {
      cfg.bands.clear();
      for (const auto& v : split_list(value)) cfg.bands.push_back(parse_band(v));
      sort_unique(cfg.bands);
    } else if (key == "methods") {
      cfg.methods.clear();
      for (const auto& v : split_list(value)) cfg.methods.push_back(parse_method(v));
      sort_unique(cfg.methods);
    } else if (key == "windows") {
      if (value == "default" || value.empty()) {
        cfg.window_grid = WindowGrid::standard();
      } else {
        cfg.window_grid.lengths_s.clear();
        for (const auto& v : split_list(value)) {
          cfg.window_grid.lengths_s.push_back(parse_number<double>(key, v));
        }
        sort_unique(cfg.window_grid.lengths_s);
      }
    } else if (key == "impostor_cap") {
      if (value == "exhaustive" || value == "none") {
        cfg.impostor_cap.reset();
      } else {
        cfg.impostor_cap = parse_number<std::size_t>(key, value);
      }
    } else if (key == "subjects") {
      cfg.subject_filter = split_list(value);
      sort_unique(cfg.subject_filter);
    } else if (key == "seed") {
      cfg.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "filter_order") {
      cfg.filter_order = parse_number<int>(key, value);
    } else if (key == "threads") {
      cfg.threads = parse_number<std::size_t>(key, value);
    } else if (key == "use_cache") {
      cfg.use_cache = parse_bool(key, value);
    } else if (key == "sample_rate") {
      cfg.catalog.expected_sample_rate = parse_number<double>(key, value);
    } else if (key == "channels") {
      cfg.catalog.expected_channels = parse_number<std::size_t>(key, value);
    } else {
      throw UsageError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

inline SweepConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  return parse_config(in);
}

/// One (condition, band, method, window) configuration.
struct Cell {
  Condition condition = Condition::kEyesOpen;
  BandName band = BandName::kGamma;
  Method method = Method::kPLV;
  double window_s = 0.0;
};

inline std::string format_g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline std::string cell_label(const Cell& c) {
  return std::string(condition_name(c.condition)) + ":" + std::string(band_name(c.band)) + ":" +
         std::string(method_name(c.method)) + ":" + format_g6(c.window_s);
}

/// Parses "EO:gamma:PLV:12" (',' also accepted as separator).
inline Cell parse_cell(std::string_view text) {
  std::string s(text);
  std::replace(s.begin(), s.end(), ':', ',');
  const auto parts = pipeline_detail::split_list(s);
  if (parts.size() != 4) {
    throw UsageError("cell must look like CONDITION:BAND:METHOD:WINDOW_S, got '" +
                     std::string(text) + "'");
  }
  return {parse_condition(parts[0]), parse_band(parts[1]), parse_method(parts[2]),
          pipeline_detail::parse_number<double>("cell window", parts[3])};
}

inline bool config_contains(const SweepConfig& cfg, const Cell& c) {
  auto has = [](const auto& v, auto x) { return std::find(v.begin(), v.end(), x) != v.end(); };
  const bool window = std::any_of(cfg.window_grid.lengths_s.begin(), cfg.window_grid.lengths_s.end(),
                                  [&](double w) { return std::abs(w - c.window_s) < 1e-9; });
  return window && has(cfg.conditions, c.condition) && has(cfg.bands, c.band) &&
         has(cfg.methods, c.method);
}

struct ResultRow {
  Condition condition = Condition::kEyesOpen;
  BandName band = BandName::kGamma;
  Method method = Method::kPLV;
  double window_s = 0.0;
  double eer = 0.0;
  double auc = 0.0;
  double one_minus_auc = 0.0;
  std::size_t n_subjects = 0;
  std::size_t n_epochs_per_subject = 0;
  std::size_t n_genuine = 0;
  std::size_t n_impostor = 0;
  std::string impostor_sampling;

  Cell cell() const { return {condition, band, method, window_s}; }
};

inline std::string format_row(const ResultRow& r) {
  return std::string(condition_name(r.condition)) + "," + std::string(band_name(r.band)) + "," +
         std::string(method_name(r.method)) + "," + format_g6(r.window_s) + "," + format_g6(r.eer) +
         "," + format_g6(r.auc) + "," + format_g6(r.one_minus_auc) + "," +
         std::to_string(r.n_subjects) + "," + std::to_string(r.n_epochs_per_subject) + "," +
         std::to_string(r.n_genuine) + "," + std::to_string(r.n_impostor) + "," +
         r.impostor_sampling;
}

/// Writes <output_dir>/results.csv and returns its path.
inline std::filesystem::path write_results(const std::vector<ResultRow>& rows,
                                           const std::filesystem::path& output_dir) {
  if (rows.empty()) throw UsageError("no result rows to write");
  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  const auto path = output_dir / "results.csv";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << kResultsHeader << '\n';
  for (const auto& r : rows) out << format_row(r) << '\n';
  out.flush();
  if (!out) throw DataError("write failed on " + path.string());
  return path;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::span<const std::uint8_t> bytes,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  return fnv1a(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()), h);
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// On-disk store of FeatureTables, one binary file per
/// (subject, condition, band, method, window) plus a text manifest mapping
/// each key to the hash of the inputs that produced it.
///
/// File layout (little-endian):
///   "EEGFPFT1"  u64 hash  u32 method  u32 window_samples  f64 window_s
///   u64 n_epochs  u64 dim  f64[n_epochs * dim]  u64 n_degenerate  u64[n_degenerate]
///
/// load() serves an entry only if both the manifest and the file header carry
/// the expected hash. store() may run concurrently for distinct keys; the
/// manifest is rewritten by flush() from the owning thread.
class FeatureCache {
 public:
  static_assert(std::endian::native == std::endian::little,
                "feature cache files are written in host byte order");

  explicit FeatureCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::ifstream in(manifest_path());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line.front() == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) continue;
      manifest_[line.substr(0, tab)] = line.substr(tab + 1);
    }
  }

  const std::filesystem::path& dir() const { return dir_; }

  static std::string key(std::string_view subject, Condition c, BandName b, Method m,
                         std::size_t window_samples) {
    char w[16];
    std::snprintf(w, sizeof(w), "w%05zu", window_samples);
    return std::string(subject) + "/" + std::string(condition_name(c)) + "_" +
           std::string(band_name(b)) + "_" + std::string(method_name(m)) + "_" + w;
  }

  std::optional<FeatureTable> load(const std::string& key, std::uint64_t hash) const {
    {
      std::lock_guard lock(mutex_);
      const auto it = manifest_.find(key);
      if (it == manifest_.end() || it->second != hex64(hash)) {
        ++misses_;
        return std::nullopt;
      }
    }
    std::ifstream in(file_path(key), std::ios::binary);
    FeatureTable t;
    char magic[8];
    std::uint64_t stored_hash = 0, n_epochs = 0, dim = 0, n_degenerate = 0;
    std::uint32_t method = 0, window_samples = 0;
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0 || !read(in, stored_hash) ||
        stored_hash != hash || !read(in, method) || !read(in, window_samples) ||
        !read(in, t.window_s) || !read(in, n_epochs) || !read(in, dim) || method > 1) {
      ++misses_;
      return std::nullopt;
    }
    t.method = static_cast<Method>(method);
    t.window_samples = window_samples;
    t.dim = dim;
    t.values.resize(n_epochs * dim);
    if (!in.read(reinterpret_cast<char*>(t.values.data()),
                 static_cast<std::streamsize>(t.values.size() * sizeof(double))) ||
        !read(in, n_degenerate)) {
      ++misses_;
      return std::nullopt;
    }
    t.degenerate_channels.resize(n_degenerate);
    for (auto& c : t.degenerate_channels) {
      std::uint64_t v = 0;
      if (!read(in, v)) {
        ++misses_;
        return std::nullopt;
      }
      c = v;
    }
    ++hits_;
    return t;
  }

  void store(const std::string& key, std::uint64_t hash, const FeatureTable& t) {
    const auto path = file_path(key);
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw DataError("cannot write cache file " + tmp);
      out.write(kMagic, 8);
      write(out, hash);
      write(out, static_cast<std::uint32_t>(t.method));
      write(out, static_cast<std::uint32_t>(t.window_samples));
      write(out, t.window_s);
      write(out, static_cast<std::uint64_t>(t.n_epochs()));
      write(out, static_cast<std::uint64_t>(t.dim));
      out.write(reinterpret_cast<const char*>(t.values.data()),
                static_cast<std::streamsize>(t.values.size() * sizeof(double)));
      write(out, static_cast<std::uint64_t>(t.degenerate_channels.size()));
      for (auto c : t.degenerate_channels) write(out, static_cast<std::uint64_t>(c));
      if (!out) throw DataError("write failed on cache file " + tmp);
    }
    std::filesystem::rename(tmp, path);
    std::lock_guard lock(mutex_);
    manifest_[key] = hex64(hash);
    dirty_ = true;
  }

  void flush() {
    std::lock_guard lock(mutex_);
    if (!dirty_) return;
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    const auto tmp = manifest_path().string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << "# eegfp feature cache manifest v1\n";
      for (const auto& [k, h] : manifest_) out << k << '\t' << h << '\n';
      if (!out) throw DataError("cannot write cache manifest " + tmp);
    }
    std::filesystem::rename(tmp, manifest_path());
    dirty_ = false;
  }

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

 private:
  static constexpr char kMagic[8] = {'E', 'E', 'G', 'F', 'P', 'F', 'T', '1'};

  template <typename T>
  static bool read(std::istream& in, T& v) {
    return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof(T)));
  }
  template <typename T>
  static void write(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }

  std::filesystem::path manifest_path() const { return dir_ / "manifest.tsv"; }
  std::filesystem::path file_path(const std::string& key) const { return dir_ / (key + ".feat"); }

  std::filesystem::path dir_;
  std::map<std::string, std::string> manifest_;
  mutable std::mutex mutex_;
  mutable std::atomic<std::size_t> hits_{0};
  mutable std::atomic<std::size_t> misses_{0};
  bool dirty_ = false;
};

using LogSink = std::function<void(const std::string&)>;

/// Runs configuration cells against a catalogued dataset. Phases are
/// computed once per (subject, condition, band) and re-segmented for every
/// window and method; feature tables go through the cache when enabled.
class SweepRunner {
 public:
  SweepRunner(SweepConfig config, LogSink log = {})
      : config_(std::move(config)), log_(std::move(log)) {
    config_.validate();
    if (config_.threads > 0) worker_threads() = config_.threads;
    catalog_ = catalog_dataset(config_.dataset_root, config_.catalog);
    for (const auto& ex : catalog_.excluded) {
      note("excluded " + ex.path.string() + ": " + ex.reason);
    }
    if (catalog_.entries.empty()) {
      throw DataError("no usable recordings under " + config_.dataset_root.string());
    }
    if (config_.use_cache) cache_.emplace(config_.resolved_cache_dir());
  }

  const SweepConfig& config() const { return config_; }
  const DatasetCatalog& catalog() const { return catalog_; }
  const FeatureCache* cache() const { return cache_ ? &*cache_ : nullptr; }

  /// Every cell of the configuration, in canonical order.
  std::vector<ResultRow> run() {
    std::vector<ResultRow> rows;
    for (Condition c : config_.conditions) {
      for (BandName b : config_.bands) {
        for_each_feature_set(c, b, config_.methods, config_.window_grid.lengths_s,
                             [&](Method m, double w, const SubjectTables& tables) {
                               const Cell cell{c, b, m, w};
                               rows.push_back(score_cell(cell, tables).second);
                               note("done " + cell_label(cell));
                             });
      }
    }
    std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
      return std::tie(a.condition, a.band, a.method, a.window_s) <
             std::tie(b.condition, b.band, b.method, b.window_s);
    });
    if (cache_) cache_->flush();
    return rows;
  }

  /// Score set and result row for a single cell of the configuration.
  std::pair<ScoreSet, ResultRow> run_cell(const Cell& cell) {
    if (!config_contains(config_, cell)) {
      throw UsageError("cell not in config: " + cell_label(cell));
    }
    std::optional<std::pair<ScoreSet, ResultRow>> out;
    for_each_feature_set(cell.condition, cell.band, {cell.method}, {cell.window_s},
                         [&](Method, double, const SubjectTables& tables) {
                           out = score_cell(cell, tables);
                         });
    if (cache_) cache_->flush();
    return std::move(*out);
  }

  /// Computes (or refreshes) cached feature tables without scoring.
  std::size_t populate(const std::vector<Condition>& conditions, const std::vector<BandName>& bands,
                       const std::vector<Method>& methods, const std::vector<double>& windows) {
    std::size_t tables_seen = 0;
    for (Condition c : conditions) {
      for (BandName b : bands) {
        for_each_feature_set(c, b, methods, windows,
                             [&](Method, double, const SubjectTables& t) {
                               tables_seen += t.tables.size();
                             });
      }
    }
    if (cache_) cache_->flush();
    return tables_seen;
  }

  struct SubjectTables {
    std::vector<std::string> subjects;
    std::vector<FeatureTable> tables;
  };

 private:
  void note(const std::string& msg) const {
    if (log_) log_(msg);
  }

  std::vector<const CatalogEntry*> subjects_for(Condition c) const {
    std::vector<const CatalogEntry*> out;
    for (const auto& e : catalog_.entries) {
      if (e.condition != c) continue;
      const auto& f = config_.subject_filter;
      if (!f.empty() && !std::binary_search(f.begin(), f.end(), e.subject_id)) continue;
      out.push_back(&e);
    }
    return out;
  }

  std::uint64_t feature_hash(std::uint64_t file_hash, const CatalogEntry& e, BandName band,
                             Method m, std::size_t window_samples) const {
    const BandDefinition bd = BandDefinition::of(band);
    std::ostringstream s;
    s << "eegfp-features-v1|edf=" << hex64(file_hash) << "|subject=" << e.subject_id
      << "|condition=" << condition_name(e.condition) << "|band=" << format_g6(bd.low_hz) << "-"
      << format_g6(bd.high_hz) << "|order=" << config_.filter_order
      << "|method=" << method_name(m) << "|window_samples=" << window_samples;
    return fnv1a(s.str());
  }

  template <typename Fn>
  void for_each_feature_set(Condition cond, BandName band, const std::vector<Method>& methods,
                            const std::vector<double>& windows, Fn&& fn) {
    const auto entries = subjects_for(cond);
    const std::size_t n = entries.size();
    const BandDefinition bd = BandDefinition::of(band);
    std::vector<std::optional<std::uint64_t>> file_hash(n);
    std::vector<std::optional<PhaseSeries>> phases(n);
    std::vector<std::string> failure(n);
    std::mutex phase_mutex;

    parallel_for(n, [&](std::size_t s) {
      try {
        file_hash[s] = fnv1a(read_file_bytes(entries[s]->path));
      } catch (const DataError& e) {
        failure[s] = e.what();
      }
    });

    auto ensure_phases = [&](std::size_t s) -> const PhaseSeries& {
      if (!phases[s]) {
        const Recording rec =
            load_recording(entries[s]->path, entries[s]->subject_id, entries[s]->condition);
        phases[s] = band_phase(rec, bd, config_.filter_order);
      }
      return *phases[s];
    };

    for (Method m : methods) {
      // tables[w][s]
      std::vector<std::vector<std::optional<FeatureTable>>> tables(
          windows.size(), std::vector<std::optional<FeatureTable>>(n));
      parallel_for(n, [&](std::size_t s) {
        if (!failure[s].empty()) return;
        std::optional<UnitPhasors> phasors;
        for (std::size_t wi = 0; wi < windows.size(); ++wi) {
          const std::size_t ws = window_samples(windows[wi], config_.catalog.expected_sample_rate);
          const std::string key =
              FeatureCache::key(entries[s]->subject_id, cond, band, m, ws);
          const std::uint64_t hash = feature_hash(*file_hash[s], *entries[s], band, m, ws);
          try {
            if (cache_) {
              if (auto hit = cache_->load(key, hash)) {
                tables[wi][s] = std::move(*hit);
                continue;
              }
            }
            const PhaseSeries& series = ensure_phases(s);
            if (!phasors) phasors.emplace(series);
            tables[wi][s] = epoch_features(series, *phasors, m, windows[wi]);
            if (cache_) cache_->store(key, hash, *tables[wi][s]);
          } catch (const DataError& e) {
            std::lock_guard lock(phase_mutex);
            note(entries[s]->subject_id + " " + cell_label({cond, band, m, windows[wi]}) +
                 " skipped: " + e.what());
            if (!phases[s]) {
              failure[s] = e.what();
              return;
            }
          }
        }
      });
      for (std::size_t s = 0; s < n; ++s) {
        if (!failure[s].empty()) {
          note("subject " + entries[s]->subject_id + " excluded: " + failure[s]);
        }
      }
      for (std::size_t wi = 0; wi < windows.size(); ++wi) {
        SubjectTables st;
        for (std::size_t s = 0; s < n; ++s) {
          if (!tables[wi][s]) continue;
          if (!tables[wi][s]->degenerate_channels.empty()) {
            note("subject " + entries[s]->subject_id + ": " +
                 std::to_string(tables[wi][s]->degenerate_channels.size()) +
                 " channel(s) with constant phase in " +
                 cell_label({cond, band, m, windows[wi]}));
          }
          st.subjects.push_back(entries[s]->subject_id);
          st.tables.push_back(std::move(*tables[wi][s]));
        }
        fn(m, windows[wi], st);
      }
    }
  }

  std::pair<ScoreSet, ResultRow> score_cell(const Cell& cell, const SubjectTables& st) const {
    const ImpostorPolicy policy =
        config_.impostor_cap
            ? ImpostorPolicy::capped(*config_.impostor_cap, mix_seed(config_.seed, fnv1a(cell_label(cell))))
            : ImpostorPolicy::all();
    ScoreSet scores = build_score_sets(st.tables, policy);
    const PerformancePoint perf = evaluate(scores);
    ResultRow row;
    row.condition = cell.condition;
    row.band = cell.band;
    row.method = cell.method;
    row.window_s = cell.window_s;
    row.eer = perf.eer;
    row.auc = perf.auc;
    row.one_minus_auc = 1.0 - perf.auc;
    row.n_subjects = st.tables.size();
    std::size_t min_epochs = st.tables.empty() ? 0 : st.tables.front().n_epochs();
    for (const auto& t : st.tables) min_epochs = std::min(min_epochs, t.n_epochs());
    row.n_epochs_per_subject = min_epochs;
    row.n_genuine = perf.n_genuine;
    row.n_impostor = perf.n_impostor;
    row.impostor_sampling = scores.subsampled
                                ? "subsampled:seed=" + std::to_string(config_.seed) +
                                      ":cap=" + std::to_string(*config_.impostor_cap)
                                : std::string("exhaustive");
    return {std::move(scores), row};
  }

  SweepConfig config_;
  LogSink log_;
  DatasetCatalog catalog_;
  std::optional<FeatureCache> cache_;
};

inline std::vector<ResultRow> run_sweep(const SweepConfig& config, LogSink log = {}) {
  return SweepRunner(config, std::move(log)).run();
}

/// Evaluates one cell and writes its genuine/impostor score dump to
/// <output_dir>/scores_<COND>_<band>_<METHOD>_<window>.csv.
inline std::filesystem::path report_distributions(const SweepConfig& config, const Cell& cell,
                                                  LogSink log = {}) {
  if (!config_contains(config, cell)) {
    throw UsageError("cell not in config: " + cell_label(cell));
  }
  SweepRunner runner(config, std::move(log));
  const auto [scores, row] = runner.run_cell(cell);
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  const auto path = config.output_dir /
                    ("scores_" + std::string(condition_name(cell.condition)) + "_" +
                     std::string(band_name(cell.band)) + "_" + std::string(method_name(cell.method)) +
                     "_" + format_g6(cell.window_s) + ".csv");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  write_score_dump(out, scores);
  if (!out) throw DataError("write failed on " + path.string());
  return path;
}

}  // namespace eegfp
