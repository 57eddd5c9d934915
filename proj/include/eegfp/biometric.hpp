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
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <system_error>
#include <unordered_set>
#include <utility>
#include <vector>

#include "eegfp/connectivity.hpp"
#include "eegfp/errors.hpp"
#include "eegfp/parallel.hpp"
#include "eegfp/random.hpp"

namespace eegfp {

/// 1 / (1 + Euclidean distance).
inline double similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw UsageError("feature vectors differ in length (" + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()) + ")");
  }
  double sq = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    sq += d * d;
  }
  return 1.0 / (1.0 + std::sqrt(sq));
}

/// How impostor pairs are chosen. With a cap, a configuration whose
/// cross-subject pair count exceeds it is sampled without replacement from a
/// SplitMix64 stream seeded by `seed`.
struct ImpostorPolicy {
  bool exhaustive = false;
  std::size_t cap = 1'000'000;
  std::uint64_t seed = 0;

  static ImpostorPolicy all() { return {true, 0, 0}; }
  static ImpostorPolicy capped(std::size_t cap, std::uint64_t seed) { return {false, cap, seed}; }
};

struct ScoreSet {
  std::vector<double> genuine;
  std::vector<double> impostor;
  /// True when impostor scores are a random subset of all cross-subject pairs.
  bool subsampled = false;
  std::uint64_t seed = 0;
  std::size_t impostor_population = 0;
};

inline std::size_t pairs_of(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

/// Genuine scores: every unordered pair of distinct epochs of one subject.
/// Impostor scores: unordered epoch pairs from two different subjects.
/// Within each list scores are ordered by (subject, epoch) pair index.
inline ScoreSet build_score_sets(std::span<const FeatureTable> subjects,
                                 const ImpostorPolicy& policy) {
  if (subjects.size() < 2) {
    throw DataError("score sets need at least 2 subjects, got " +
                    std::to_string(subjects.size()));
  }
  // Flattened epoch index -> (subject, row).
  std::vector<std::pair<std::uint32_t, std::uint32_t>> epochs;
  std::size_t dim = 0;
  for (std::size_t s = 0; s < subjects.size(); ++s) {
    if (subjects[s].n_epochs() > 0) {
      if (dim != 0 && subjects[s].dim != dim) {
        throw DataError("subjects have feature vectors of different length");
      }
      dim = subjects[s].dim;
    }
    for (std::size_t e = 0; e < subjects[s].n_epochs(); ++e) {
      epochs.emplace_back(static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(e));
    }
  }
  auto row = [&](std::size_t flat) {
    const auto [s, e] = epochs[flat];
    return subjects[s].row(e);
  };

  std::vector<std::pair<std::size_t, std::size_t>> genuine_pairs;
  std::size_t genuine_total = 0;
  for (const auto& t : subjects) genuine_total += pairs_of(t.n_epochs());
  if (genuine_total == 0) throw DataError("no subject has two or more epochs");
  genuine_pairs.reserve(genuine_total);
  {
    std::size_t base = 0;
    for (const auto& t : subjects) {
      for (std::size_t a = 0; a < t.n_epochs(); ++a) {
        for (std::size_t b = a + 1; b < t.n_epochs(); ++b) {
          genuine_pairs.emplace_back(base + a, base + b);
        }
      }
      base += t.n_epochs();
    }
  }

  const std::size_t n = epochs.size();
  const std::size_t impostor_total = pairs_of(n) - genuine_total;
  if (impostor_total == 0) throw DataError("no cross-subject epoch pairs");

  ScoreSet out;
  out.impostor_population = impostor_total;
  std::vector<std::pair<std::size_t, std::size_t>> impostor_pairs;
  if (policy.exhaustive || impostor_total <= policy.cap) {
    impostor_pairs.reserve(impostor_total);
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (epochs[p].first != epochs[q].first) impostor_pairs.emplace_back(p, q);
      }
    }
  } else {
    out.subsampled = true;
    out.seed = policy.seed;
    SplitMix64 rng(policy.seed);
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(policy.cap * 2);
    std::vector<std::uint64_t> keys;
    keys.reserve(policy.cap);
    while (keys.size() < policy.cap) {
      std::size_t p = rng.below(n);
      std::size_t q = rng.below(n);
      if (epochs[p].first == epochs[q].first) continue;
      if (p > q) std::swap(p, q);
      const std::uint64_t key = static_cast<std::uint64_t>(p) * n + q;
      if (seen.insert(key).second) keys.push_back(key);
    }
    std::sort(keys.begin(), keys.end());
    impostor_pairs.reserve(keys.size());
    for (auto k : keys) impostor_pairs.emplace_back(k / n, k % n);
  }

  auto score_all = [&](const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                       std::vector<double>& scores) {
    scores.resize(pairs.size());
    constexpr std::size_t kChunk = 4096;
    parallel_for((pairs.size() + kChunk - 1) / kChunk, [&](std::size_t c) {
      const std::size_t end = std::min(pairs.size(), (c + 1) * kChunk);
      for (std::size_t i = c * kChunk; i < end; ++i) {
        scores[i] = similarity(row(pairs[i].first), row(pairs[i].second));
      }
    });
  };
  score_all(genuine_pairs, out.genuine);
  score_all(impostor_pairs, out.impostor);
  return out;
}

struct RocPoint {
  double threshold = 0.0;
  double far = 0.0;
  double frr = 0.0;
};

/// Operating points ordered by increasing threshold. A score is accepted when
/// score >= threshold.
struct RocCurve {
  std::vector<RocPoint> points;
};

inline void require_scores(const ScoreSet& s) {
  if (s.genuine.empty() || s.impostor.empty()) {
    throw DataError("score set needs both genuine and impostor scores");
  }
}

inline RocCurve roc(const ScoreSet& scores) {
  require_scores(scores);
  std::vector<double> g = scores.genuine;
  std::vector<double> im = scores.impostor;
  std::sort(g.begin(), g.end());
  std::sort(im.begin(), im.end());
  std::vector<double> thresholds;
  thresholds.reserve(g.size() + im.size() + 2);
  std::merge(g.begin(), g.end(), im.begin(), im.end(), std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  thresholds.insert(thresholds.begin(), thresholds.front() - 1.0);
  thresholds.push_back(thresholds.back() + 1.0);

  const double ng = static_cast<double>(g.size());
  const double ni = static_cast<double>(im.size());
  RocCurve curve;
  curve.points.reserve(thresholds.size());
  std::size_t g_below = 0, i_below = 0;
  for (double t : thresholds) {
    while (g_below < g.size() && g[g_below] < t) ++g_below;
    while (i_below < im.size() && im[i_below] < t) ++i_below;
    curve.points.push_back({t, static_cast<double>(im.size() - i_below) / ni,
                            static_cast<double>(g_below) / ng});
  }
  return curve;
}

/// Rate at which FAR and FRR cross. Between the last point with FAR > FRR
/// and the first with FAR <= FRR the curve is interpolated linearly.
inline double eer(const RocCurve& curve) {
  const auto& pts = curve.points;
  if (pts.empty()) throw DataError("empty ROC curve");
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double d1 = pts[k].far - pts[k].frr;
    if (d1 > 0.0) continue;
    if (d1 == 0.0 || k == 0) return std::clamp(pts[k].far, 0.0, 1.0);
    const double d0 = pts[k - 1].far - pts[k - 1].frr;
    const double t = d0 / (d0 - d1);
    return std::clamp(pts[k - 1].far + t * (pts[k].far - pts[k - 1].far), 0.0, 1.0);
  }
  return std::clamp(pts.back().far, 0.0, 1.0);
}

/// Probability that a genuine score beats an impostor score, ties counted as
/// one half (Mann-Whitney form of the ROC area).
inline double auc(const ScoreSet& scores) {
  require_scores(scores);
  std::vector<double> g = scores.genuine;
  std::vector<double> im = scores.impostor;
  std::sort(g.begin(), g.end());
  std::sort(im.begin(), im.end());
  // Twice the U statistic, kept integral.
  std::uint64_t twice_u = 0;
  std::size_t less = 0, less_or_equal = 0;
  for (double v : g) {
    while (less < im.size() && im[less] < v) ++less;
    if (less_or_equal < less) less_or_equal = less;
    while (less_or_equal < im.size() && im[less_or_equal] <= v) ++less_or_equal;
    twice_u += 2 * less + (less_or_equal - less);
  }
  return static_cast<double>(twice_u) /
         (2.0 * static_cast<double>(g.size()) * static_cast<double>(im.size()));
}

struct PerformancePoint {
  double eer = 0.0;
  double auc = 0.0;
  std::size_t n_genuine = 0;
  std::size_t n_impostor = 0;
};

inline PerformancePoint evaluate(const ScoreSet& scores) {
  return {eer(roc(scores)), auc(scores), scores.genuine.size(), scores.impostor.size()};
}

/// Ranks starting at 1; tied values share the mean of their ranks.
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = (static_cast<double>(i + j) / 2.0) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

/// Spearman rank correlation: Pearson correlation of the average ranks.
/// Returns 0 when either input is constant.
inline double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw UsageError("spearman needs two series of equal length >= 2");
  }
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mean = (static_cast<double>(x.size()) + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

/// Score dump: header line `label,score`, then one `genuine,<score>` or
/// `impostor,<score>` line per score, genuine first, 17 significant digits.
inline void write_score_dump(std::ostream& out, const ScoreSet& scores) {
  char buf[40];
  out << "label,score\n";
  for (double s : scores.genuine) {
    std::snprintf(buf, sizeof(buf), "%.17g", s);
    out << "genuine," << buf << '\n';
  }
  for (double s : scores.impostor) {
    std::snprintf(buf, sizeof(buf), "%.17g", s);
    out << "impostor," << buf << '\n';
  }
}

inline ScoreSet read_score_dump(std::istream& in) {
  ScoreSet out;
  std::string line;
  if (!std::getline(in, line) || line != "label,score") {
    throw DataError("score dump must start with 'label,score'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw DataError("score dump line " + std::to_string(line_no) + " has no comma");
    }
    const std::string label = line.substr(0, comma);
    double v = 0.0;
    const char* last = line.data() + line.size();
    const auto [ptr, ec] = std::from_chars(line.data() + comma + 1, last, v);
    if (ec != std::errc() || ptr != last) {
      throw DataError("score dump line " + std::to_string(line_no) + " has a bad score");
    }
    if (label == "genuine") {
      out.genuine.push_back(v);
    } else if (label == "impostor") {
      out.impostor.push_back(v);
    } else {
      throw DataError("score dump line " + std::to_string(line_no) + " has unknown label '" +
                      label + "'");
    }
  }
  return out;
}

}  // namespace eegfp
