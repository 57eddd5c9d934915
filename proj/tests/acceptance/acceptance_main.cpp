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


// Acceptance gate. Prints one PASS / FAIL / SKIP line per criterion.
//
//   eegfp_acceptance selftest   criteria 8-12, no data needed
//   eegfp_acceptance dataset    criteria 1-7 on the PhysioNet EEG Motor
//                               Movement/Imagery recordings found under
//                               $EEGFP_DATASET; exits 77 (skipped) without it
//
// Exit status: 0 all pass, 1 any failure, 77 skipped.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "eegfp/eegfp.hpp"

namespace {

using eegfp::selftest::format_line;

constexpr int kSkipped = 77;
constexpr const char* kDatasetEnv = "EEGFP_DATASET";

struct Criterion {
  int id;
  const char* title;
};

constexpr Criterion kDatasetCriteria[] = {
    {1, "EER 0.018 +/- 0.010 at EO/gamma/PLV/10.5 s"},
    {2, "EER 0.035 +/- 0.015 at EC/beta/PLV/10.5 s"},
    {3, "worst curve EER >= 0.40 at 0.5 s"},
    {4, "Spearman rho <= -0.9 for all 8 EER-vs-window curves"},
    {5, "PLV curves improve < 0.01 beyond 10.5 s"},
    {6, "best 12 s cell: AUC >= 0.99 and one_minus_auc <= 0.01"},
    {7, "full 192-cell sweep under 2 h and byte-deterministic"},
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

int run_selftest() {
  bool ok = true;
  eegfp::selftest::run_all([&](const eegfp::selftest::Outcome& o) {
    ok = ok && o.passed;
    std::cout << format_line(o) << std::endl;
  });
  return ok ? 0 : 1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

using Curve = std::vector<const eegfp::ResultRow*>;

int run_dataset() {
  const char* root = std::getenv(kDatasetEnv);
  if (root == nullptr || !std::filesystem::is_directory(root)) {
    const std::string why = std::string("$") + kDatasetEnv + " not set to a dataset directory";
    for (const auto& c : kDatasetCriteria) std::cout << format_line("SKIP", c.id, c.title, why) << '\n';
    return kSkipped;
  }

  const auto work = std::filesystem::temp_directory_path() / "eegfp_acceptance";
  std::filesystem::remove_all(work);
  auto config_for = [&](const std::string& name) {
    eegfp::SweepConfig cfg;
    cfg.dataset_root = root;
    cfg.output_dir = work / name;
    cfg.use_cache = false;
    return cfg;
  };
  auto log = [](const std::string& msg) { std::cerr << msg << '\n'; };

  std::vector<eegfp::ResultRow> rows;
  std::string first_bytes, second_bytes;
  double seconds = 0.0;
  try {
    const auto start = std::chrono::steady_clock::now();
    const auto cfg = config_for("run1");
    rows = eegfp::run_sweep(cfg, log);
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    first_bytes = slurp(eegfp::write_results(rows, cfg.output_dir));
    const auto again = config_for("run2");
    second_bytes = slurp(eegfp::write_results(eegfp::run_sweep(again, log), again.output_dir));
  } catch (const std::exception& e) {
    for (const auto& c : kDatasetCriteria) {
      std::cout << format_line("FAIL", c.id, c.title, std::string("sweep failed: ") + e.what()) << '\n';
    }
    return 1;
  }

  std::map<std::string, Curve> curves;
  for (const auto& r : rows) {
    curves[std::string(eegfp::condition_name(r.condition)) + "/" +
           std::string(eegfp::band_name(r.band)) + "/" + std::string(eegfp::method_name(r.method))]
        .push_back(&r);
  }
  auto find = [&](eegfp::Condition c, eegfp::BandName b, eegfp::Method m,
                  double w) -> const eegfp::ResultRow* {
    for (const auto& r : rows) {
      if (r.condition == c && r.band == b && r.method == m && std::abs(r.window_s - w) < 1e-9) return &r;
    }
    return nullptr;
  };

  bool all = true;
  auto report = [&](const Criterion& c, bool pass, const std::string& detail) {
    all = all && pass;
    std::cout << format_line(pass ? "PASS" : "FAIL", c.id, c.title, detail) << '\n';
  };
  auto headline = [&](const Criterion& c, const eegfp::ResultRow* r, double target, double tol) {
    if (r == nullptr) return report(c, false, "cell missing from results");
    report(c, std::abs(r->eer - target) <= tol, "EER " + fmt("%.4f", r->eer));
  };
  using eegfp::BandName;
  using eegfp::Condition;
  using eegfp::Method;
  headline(kDatasetCriteria[0], find(Condition::kEyesOpen, BandName::kGamma, Method::kPLV, 10.5), 0.018, 0.010);
  headline(kDatasetCriteria[1], find(Condition::kEyesClosed, BandName::kHighBeta, Method::kPLV, 10.5), 0.035, 0.015);

  double worst_short = 0.0;
  std::string rho_detail, plateau_detail;
  bool trend = curves.size() == 8, plateau = true;
  for (const auto& [name, curve] : curves) {
    std::vector<double> w, e;
    for (const auto* r : curve) {
      w.push_back(r->window_s);
      e.push_back(r->eer);
    }
    worst_short = std::max(worst_short, e.front());
    const double rho = eegfp::spearman(w, e);
    trend = trend && w.size() == 24 && rho <= -0.9;
    rho_detail += (rho_detail.empty() ? "" : " ") + name + "=" + fmt("%.3f", rho);
    if (curve.front()->method == Method::kPLV) {
      double at = 0.0, best_after = 1.0;
      for (const auto* r : curve) {
        if (std::abs(r->window_s - 10.5) < 1e-9) at = r->eer;
        if (r->window_s > 10.5) best_after = std::min(best_after, r->eer);
      }
      const double gain = at - best_after;
      plateau = plateau && gain < 0.01;
      plateau_detail += (plateau_detail.empty() ? "" : " ") + name + "=" + fmt("%.4f", gain);
    }
  }
  report(kDatasetCriteria[2], worst_short >= 0.40, "worst EER at 0.5 s " + fmt("%.4f", worst_short));
  report(kDatasetCriteria[3], trend, rho_detail);
  report(kDatasetCriteria[4], plateau, plateau_detail);

  const eegfp::ResultRow* best = nullptr;
  for (const auto& r : rows) {
    if (std::abs(r.window_s - 12.0) < 1e-9 && (best == nullptr || r.eer < best->eer)) best = &r;
  }
  if (best == nullptr) {
    report(kDatasetCriteria[5], false, "no 12 s cells");
  } else {
    report(kDatasetCriteria[5], best->auc >= 0.99 && best->one_minus_auc <= 0.01,
           eegfp::cell_label(best->cell()) + " AUC " + fmt("%.4f", best->auc) + ", 1-AUC " +
               fmt("%.4f", best->one_minus_auc));
  }
  report(kDatasetCriteria[6], rows.size() == 192 && seconds < 7200.0 && first_bytes == second_bytes,
         std::to_string(rows.size()) + " cells in " + fmt("%.0f s", seconds) + " on " +
             std::to_string(std::thread::hardware_concurrency()) + " threads; runs " +
             (first_bytes == second_bytes ? "identical" : "differ"));
  std::filesystem::remove_all(work);
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string suite = argc > 1 ? argv[1] : "";
  try {
    if (suite == "selftest") return run_selftest();
    if (suite == "dataset") return run_dataset();
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << '\n';
    return 1;
  }
  std::cerr << "usage: eegfp_acceptance selftest|dataset\n";
  return 2;
}
