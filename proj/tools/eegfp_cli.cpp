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


// eegfp: command-line front end.
//
//   eegfp scan <root>
//   eegfp features <root> --condition EO --band gamma --method PLV --window 12
//   eegfp sweep <root> [--config sweep.cfg]
//   eegfp report <cell> [--config sweep.cfg] [--root <dir>]
//   eegfp selftest
//
// Exit status: 0 ok, 1 usage error, 2 data error (or a failed self-test).
// $EEGFP_CACHE_DIR overrides the feature cache location.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "eegfp/eegfp.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kData = 2;

struct Common {
  std::string config_path;
  std::string output_dir;
  std::size_t threads = 0;
  bool quiet = false;
  bool no_cache = false;
};

eegfp::SweepConfig load(const Common& c, const std::string& root) {
  eegfp::SweepConfig cfg = c.config_path.empty() ? eegfp::SweepConfig{} : eegfp::load_config(c.config_path);
  if (!root.empty()) cfg.dataset_root = root;
  if (!c.output_dir.empty()) cfg.output_dir = c.output_dir;
  if (c.threads > 0) cfg.threads = c.threads;
  if (c.no_cache) cfg.use_cache = false;
  if (cfg.dataset_root.empty()) throw eegfp::UsageError("no dataset root given");
  return cfg;
}

eegfp::LogSink logger(const Common& c) {
  if (c.quiet) return {};
  return [](const std::string& msg) { std::cerr << msg << '\n'; };
}

void add_common(CLI::App* cmd, Common& c, bool with_config) {
  if (with_config) cmd->add_option("-c,--config", c.config_path, "Sweep config file (key = value)");
  cmd->add_option("-o,--output", c.output_dir, "Output directory (overrides config)");
  cmd->add_option("-j,--threads", c.threads, "Worker threads (default: all cores)");
  cmd->add_flag("-q,--quiet", c.quiet, "No progress messages on stderr");
}

int cmd_scan(const std::string& root, const eegfp::CatalogOptions& opts) {
  const auto cat = eegfp::catalog_dataset(root, opts);
  std::printf("subject\tcondition\tpath\n");
  for (const auto& e : cat.entries) {
    std::printf("%s\t%s\t%s\n", e.subject_id.c_str(),
                std::string(eegfp::condition_name(e.condition)).c_str(), e.path.string().c_str());
  }
  for (const auto& x : cat.excluded) {
    std::printf("# excluded\t%s\t%s\n", x.path.string().c_str(), x.reason.c_str());
  }
  std::fprintf(stderr, "%zu subjects, %zu recordings, %zu excluded\n", cat.subjects().size(),
               cat.entries.size(), cat.excluded.size());
  return cat.entries.empty() ? kData : kOk;
}

int cmd_selftest() {
  bool ok = true;
  eegfp::selftest::run_all([&](const eegfp::selftest::Outcome& o) {
    ok = ok && o.passed;
    std::cout << eegfp::selftest::format_line(o) << std::endl;
  });
  return ok ? kOk : kData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG phase-synchronization biometric pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "eegfp 0.1.0");

  Common common;
  std::string root;

  auto* scan = app.add_subcommand("scan", "Catalogue a dataset tree and report exclusions");
  eegfp::CatalogOptions catalog_opts;
  scan->add_option("root", root, "Dataset root with S###/S###R##.edf files")->required();
  scan->add_option("--sample-rate", catalog_opts.expected_sample_rate, "Required sample rate (Hz)");
  scan->add_option("--channels", catalog_opts.expected_channels, "Required EEG channel count");

  auto* features = app.add_subcommand("features", "Compute feature tables into the cache");
  std::vector<std::string> conditions, bands, methods;
  std::vector<double> windows;
  features->add_option("root", root, "Dataset root")->required();
  features->add_option("--condition", conditions, "EO and/or EC")->required();
  features->add_option("--band", bands, "beta and/or gamma")->required();
  features->add_option("--method", methods, "PLI and/or PLV")->required();
  features->add_option("--window", windows, "Window lengths in seconds")->required();
  add_common(features, common, true);

  auto* sweep = app.add_subcommand("sweep", "Run every configured cell and write results.csv");
  sweep->add_option("root", root, "Dataset root (overrides config)");
  add_common(sweep, common, true);
  sweep->add_flag("--no-cache", common.no_cache, "Do not read or write the feature cache");

  auto* report = app.add_subcommand("report", "Write the genuine/impostor score dump of one cell");
  std::string cell_text;
  report->add_option("cell", cell_text, "CONDITION:BAND:METHOD:WINDOW, e.g. EO:gamma:PLV:12")->required();
  report->add_option("--root", root, "Dataset root (overrides config)");
  add_common(report, common, true);

  auto* selftest = app.add_subcommand("selftest", "Dataset-free property checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*scan) return cmd_scan(root, catalog_opts);
    if (*selftest) return cmd_selftest();

    eegfp::SweepConfig cfg = load(common, root);
    if (*features) {
      std::vector<eegfp::Condition> cs;
      std::vector<eegfp::BandName> bs;
      std::vector<eegfp::Method> ms;
      for (const auto& s : conditions) cs.push_back(eegfp::parse_condition(s));
      for (const auto& s : bands) bs.push_back(eegfp::parse_band(s));
      for (const auto& s : methods) ms.push_back(eegfp::parse_method(s));
      std::sort(windows.begin(), windows.end());
      windows.erase(std::unique(windows.begin(), windows.end()), windows.end());
      eegfp::WindowGrid{windows}.validate(cfg.catalog.expected_sample_rate);
      cfg.use_cache = true;
      eegfp::SweepRunner runner(cfg, logger(common));
      const std::size_t n = runner.populate(cs, bs, ms, windows);
      std::printf("%zu feature tables in %s (%zu cached, %zu computed)\n", n,
                  cfg.resolved_cache_dir().string().c_str(), runner.cache()->hits(),
                  runner.cache()->misses());
      return kOk;
    }
    if (*sweep) {
      const auto rows = eegfp::run_sweep(cfg, logger(common));
      const auto path = eegfp::write_results(rows, cfg.output_dir);
      std::printf("%s\n", path.string().c_str());
      return kOk;
    }
    if (*report) {
      const auto path = eegfp::report_distributions(cfg, eegfp::parse_cell(cell_text), logger(common));
      std::printf("%s\n", path.string().c_str());
      return kOk;
    }
  } catch (const eegfp::UsageError& e) {
    std::cerr << "eegfp: " << e.what() << '\n';
    return kUsage;
  } catch (const eegfp::DataError& e) {
    std::cerr << "eegfp: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "eegfp: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
