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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <vector>

#include "eegfp/biometric.hpp"
#include "eegfp/random.hpp"

namespace eegfp {
namespace {

ScoreSet scores(std::vector<double> g, std::vector<double> i) {
  ScoreSet s;
  s.genuine = std::move(g);
  s.impostor = std::move(i);
  return s;
}

// Counting FAR / FRR straight from the definition.
std::pair<double, double> rates_at(const ScoreSet& s, double theta) {
  double fa = 0, fr = 0;
  for (double v : s.impostor) fa += v >= theta;
  for (double v : s.genuine) fr += v < theta;
  return {fa / static_cast<double>(s.impostor.size()), fr / static_cast<double>(s.genuine.size())};
}

// Every distinct operating point: one threshold per score value plus one above all.
std::vector<std::pair<double, double>> enumerate_points(const ScoreSet& s) {
  std::set<double> values(s.genuine.begin(), s.genuine.end());
  values.insert(s.impostor.begin(), s.impostor.end());
  std::vector<std::pair<double, double>> pts;
  for (double v : values) pts.push_back(rates_at(s, v));
  pts.push_back(rates_at(s, std::numeric_limits<double>::infinity()));
  return pts;
}

double min_max_rate(const ScoreSet& s) {
  double best = 1.0;
  for (auto [fa, fr] : enumerate_points(s)) best = std::min(best, std::max(fa, fr));
  return best;
}

// Where the (FAR, FRR) polyline meets the diagonal, by segment intersection.
double diagonal_crossing(const ScoreSet& s) {
  const auto pts = enumerate_points(s);
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

double pair_count_auc(const ScoreSet& s) {
  double sum = 0;
  for (double g : s.genuine) {
    for (double i : s.impostor) sum += g > i ? 1.0 : g == i ? 0.5 : 0.0;
  }
  return sum / static_cast<double>(s.genuine.size() * s.impostor.size());
}

double trapezoid_auc(const ScoreSet& s) {
  // TPR = 1 - FRR against FAR, walked from FAR = 1 down to 0.
  const auto pts = enumerate_points(s);
  double area = 0.0;
  double x0 = 1.0, y0 = 1.0;
  for (auto [fa, fr] : pts) {
    const double y = 1.0 - fr;
    area += (x0 - fa) * (y0 + y) / 2.0;
    x0 = fa;
    y0 = y;
  }
  return area;
}

std::vector<double> uniform_scores(SplitMix64& g, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = g.uniform01();
  return v;
}

FeatureTable table(std::vector<double> values, std::size_t dim) {
  FeatureTable t;
  t.dim = dim;
  t.values = std::move(values);
  return t;
}

TEST(Similarity, Examples) {
  const std::vector<double> a{0.0, 0.0}, b{3.0, 4.0}, c{1.0, 0.0, 0.0}, d{0.0, 1.0, 0.0};
  EXPECT_EQ(similarity(a, a), 1.0);
  EXPECT_EQ(similarity(a, b), 1.0 / 6.0);
  EXPECT_NEAR(similarity(c, d), 0.414214, 1e-6);
  EXPECT_THROW(similarity(a, c), UsageError);
}

TEST(Similarity, SymmetricAndInUnitInterval) {
  SplitMix64 g(2);
  for (int trial = 0; trial < 500; ++trial) {
    const auto a = uniform_scores(g, 30), b = uniform_scores(g, 30);
    EXPECT_EQ(similarity(a, b), similarity(b, a));
    EXPECT_GT(similarity(a, b), 0.0);
    EXPECT_LE(similarity(a, b), 1.0);
  }
}

TEST(ScoreSets, PairCounts) {
  auto cohort = [](std::size_t subjects, std::size_t epochs) {
    std::vector<FeatureTable> t;
    SplitMix64 g(subjects * 100 + epochs);
    for (std::size_t s = 0; s < subjects; ++s) t.push_back(table(uniform_scores(g, epochs * 3), 3));
    return build_score_sets(t, ImpostorPolicy::all());
  };
  const auto a = cohort(2, 2);
  EXPECT_EQ(a.genuine.size(), 2u);
  EXPECT_EQ(a.impostor.size(), 4u);
  const auto b = cohort(3, 3);
  EXPECT_EQ(b.genuine.size(), 9u);
  EXPECT_EQ(b.impostor.size(), 27u);
  const auto c = cohort(109, 5);
  EXPECT_EQ(c.genuine.size(), 1090u);
  // C(545, 2) - 1090 = C(109, 2) * 25.
  EXPECT_EQ(c.impostor.size(), 147150u);
  EXPECT_FALSE(c.subsampled);
  for (double v : c.impostor) {
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(ScoreSets, PairsFollowTheProtocol) {
  // Subject 0 rows {0}, {1}; subject 1 rows {10}, {13}.
  std::vector<FeatureTable> t{table({0.0, 1.0}, 1), table({10.0, 13.0}, 1)};
  const auto s = build_score_sets(t, ImpostorPolicy::all());
  EXPECT_EQ(s.genuine, (std::vector<double>{0.5, 0.25}));
  EXPECT_EQ(s.impostor, (std::vector<double>{1.0 / 11, 1.0 / 14, 1.0 / 10, 1.0 / 13}));
}

TEST(ScoreSets, Errors) {
  std::vector<FeatureTable> one{table({0.0, 1.0}, 1)};
  EXPECT_THROW(build_score_sets(one, ImpostorPolicy::all()), DataError);
  std::vector<FeatureTable> singles{table({0.0}, 1), table({1.0}, 1)};
  EXPECT_THROW(build_score_sets(singles, ImpostorPolicy::all()), DataError);
  // A one-epoch subject only contributes impostor pairs.
  std::vector<FeatureTable> mixed{table({0.0, 1.0}, 1), table({5.0}, 1)};
  const auto s = build_score_sets(mixed, ImpostorPolicy::all());
  EXPECT_EQ(s.genuine.size(), 1u);
  EXPECT_EQ(s.impostor.size(), 2u);
}

TEST(ScoreSets, SubsamplingIsSeededAndDistinct) {
  std::vector<FeatureTable> t;
  SplitMix64 g(8);
  for (int s = 0; s < 20; ++s) t.push_back(table(uniform_scores(g, 10 * 2), 2));
  const auto a = build_score_sets(t, ImpostorPolicy::capped(500, 99));
  const auto b = build_score_sets(t, ImpostorPolicy::capped(500, 99));
  const auto c = build_score_sets(t, ImpostorPolicy::capped(500, 100));
  EXPECT_TRUE(a.subsampled);
  EXPECT_EQ(a.impostor.size(), 500u);
  EXPECT_EQ(a.impostor_population, 19000u);
  EXPECT_EQ(a.impostor, b.impostor);
  EXPECT_NE(a.impostor, c.impostor);
  EXPECT_EQ(build_score_sets(t, ImpostorPolicy::capped(1'000'000, 1)).impostor,
            build_score_sets(t, ImpostorPolicy::all()).impostor);
}

TEST(Roc, SeparatedSetsReachZeroError) {
  const auto s = scores({0.9, 0.8}, {0.2, 0.1});
  const auto c = roc(s);
  EXPECT_TRUE(std::any_of(c.points.begin(), c.points.end(),
                          [](const RocPoint& p) { return p.far == 0 && p.frr == 0; }));
  EXPECT_EQ(eer(c), 0.0);
  EXPECT_EQ(auc(s), 1.0);
}

TEST(Roc, IndistinguishableSingletons) {
  const auto s = scores({0.5}, {0.5});
  EXPECT_EQ(eer(roc(s)), 0.5);
  EXPECT_EQ(auc(s), 0.5);
}

TEST(Roc, MatchesEnumerationOnThreeByThree) {
  const auto s = scores({0.8, 0.6, 0.4}, {0.7, 0.3, 0.2});
  const auto c = roc(s);
  // Six distinct scores give seven intervals plus the lower sentinel.
  ASSERT_EQ(c.points.size(), 8u);
  EXPECT_EQ(c.points.front().far, 1.0);
  EXPECT_EQ(c.points.front().frr, 0.0);
  EXPECT_EQ(c.points.back().far, 0.0);
  EXPECT_EQ(c.points.back().frr, 1.0);
  for (const auto& p : c.points) {
    const auto [fa, fr] = rates_at(s, p.threshold);
    EXPECT_EQ(p.far, fa);
    EXPECT_EQ(p.frr, fr);
  }
  EXPECT_DOUBLE_EQ(eer(c), min_max_rate(s));
  EXPECT_DOUBLE_EQ(eer(c), 1.0 / 3.0);
}

TEST(Roc, ThresholdsAscendAndRatesAreMonotone) {
  SplitMix64 g(3);
  const auto s = scores(uniform_scores(g, 200), uniform_scores(g, 300));
  const auto c = roc(s);
  for (std::size_t k = 1; k < c.points.size(); ++k) {
    EXPECT_LT(c.points[k - 1].threshold, c.points[k].threshold);
    EXPECT_GE(c.points[k - 1].far, c.points[k].far);
    EXPECT_LE(c.points[k - 1].frr, c.points[k].frr);
  }
}

TEST(Roc, EmptyListsAreRejected) {
  EXPECT_THROW(roc(scores({}, {0.5})), DataError);
  EXPECT_THROW(auc(scores({0.5}, {})), DataError);
}

TEST(Eer, SameDistributionIsNearChance) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SplitMix64 g(seed);
    const auto s = scores(uniform_scores(g, 10000), uniform_scores(g, 10000));
    EXPECT_NEAR(eer(roc(s)), 0.5, 0.02);
  }
}

TEST(Eer, CrossingAgreesWithMinMaxWithoutTies) {
  SplitMix64 g(4);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t ng = 1 + g.below(60), ni = 1 + g.below(60);
    std::vector<double> gen(ng), imp(ni);
    for (auto& v : gen) v = g.uniform01() + 0.3;
    for (auto& v : imp) v = g.uniform01();
    const auto s = scores(gen, imp);
    const double step = 1.0 / static_cast<double>(std::max(ng, ni));
    EXPECT_LE(std::abs(eer(roc(s)) - min_max_rate(s)), step + 1e-12);
  }
}

TEST(Eer, ExhaustiveSmallSetsMatchTheGeometricCrossing) {
  // All multisets of sizes 1..4 per class over a 3-letter alphabet; the
  // acceptance self-test covers sizes up to 6 over 4 letters.
  std::vector<std::vector<double>> sets;
  const std::vector<double> alphabet{0.2, 0.5, 0.8};
  std::vector<double> cur;
  auto rec = [&](auto&& self, std::size_t from, std::size_t left) -> void {
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
  for (std::size_t k = 1; k <= 4; ++k) rec(rec, 0, k);
  for (const auto& gen : sets) {
    for (const auto& imp : sets) {
      const auto s = scores(gen, imp);
      ASSERT_NEAR(eer(roc(s)), diagonal_crossing(s), 1e-12);
      ASSERT_EQ(auc(s), pair_count_auc(s));
    }
  }
}

TEST(Eer, TiesAcrossClassesBreakTheMinMaxReading) {
  // Both rates jump together; the crossing lies mid-segment.
  const auto s = scores(std::vector<double>(6, 0.5), std::vector<double>(6, 0.5));
  EXPECT_EQ(eer(roc(s)), 0.5);
  EXPECT_EQ(min_max_rate(s), 1.0);
}

TEST(Auc, Examples) {
  EXPECT_EQ(auc(scores({0.8, 0.6}, {0.7, 0.5})), 0.75);
  EXPECT_EQ(auc(scores({0.3, 0.1, 0.7}, {0.7, 0.1, 0.3})), 0.5);
  EXPECT_EQ(auc(scores({0.1}, {0.9})), 0.0);
}

TEST(Auc, RankStatisticEqualsTrapezoidArea) {
  SplitMix64 g(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t ng = 1 + g.below(1000), ni = 1 + g.below(1000);
    std::vector<double> gen(ng), imp(ni);
    // Coarse values so that ties occur.
    for (auto& v : gen) v = static_cast<double>(g.below(50) + 10) / 100.0;
    for (auto& v : imp) v = static_cast<double>(g.below(50)) / 100.0;
    const auto s = scores(gen, imp);
    EXPECT_NEAR(auc(s), trapezoid_auc(s), 1e-9);
    if (trial < 20) {
      EXPECT_NEAR(auc(s), pair_count_auc(s), 1e-12);
    }
  }
}

TEST(Evaluation, InvariantUnderMonotoneTransforms) {
  SplitMix64 g(6);
  for (int trial = 0; trial < 50; ++trial) {
    auto gen = uniform_scores(g, 400), imp = uniform_scores(g, 500);
    for (auto& v : gen) v = v * 0.8 + 0.2;
    const auto base = evaluate(scores(gen, imp));
    for (auto f : {+[](double x) { return std::log(x); }, +[](double x) { return x * x * x * 8.0; },
                   +[](double x) { return -1.0 / x; }}) {
      auto tg = gen, ti = imp;
      for (auto& v : tg) v = f(v);
      for (auto& v : ti) v = f(v);
      const auto t = evaluate(scores(tg, ti));
      EXPECT_EQ(t.eer, base.eer);
      EXPECT_EQ(t.auc, base.auc);
    }
  }
}

TEST(Evaluation, SubsampledImpostorsTrackExhaustive) {
  // 210 subjects x 10 epochs: 2.2 million impostor pairs, above the default cap.
  SplitMix64 g(7);
  std::vector<FeatureTable> subjects;
  const std::size_t dim = 4;
  for (int s = 0; s < 210; ++s) {
    std::vector<double> centre(dim);
    for (auto& c : centre) c = g.normal();
    std::vector<double> values;
    for (int e = 0; e < 10; ++e) {
      for (std::size_t k = 0; k < dim; ++k) values.push_back(centre[k] + 0.8 * g.normal());
    }
    subjects.push_back(table(values, dim));
  }
  const auto full = build_score_sets(subjects, ImpostorPolicy::all());
  ASSERT_GT(full.impostor.size(), 1'000'000u);
  const double exact = eer(roc(full));
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto sub = build_score_sets(subjects, ImpostorPolicy::capped(1'000'000, seed));
    EXPECT_TRUE(sub.subsampled);
    EXPECT_EQ(sub.impostor.size(), 1'000'000u);
    EXPECT_EQ(sub.impostor_population, full.impostor.size());
    EXPECT_LT(std::abs(eer(roc(sub)) - exact), 0.005);
  }
}

TEST(Spearman, MatchesClosedFormWithoutTies) {
  SplitMix64 g(10);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + g.below(40);
    const auto x = uniform_scores(g, n), y = uniform_scores(g, n);
    // 1 - 6 sum d^2 / (n (n^2 - 1)) with ranks by counting.
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double rx = 1, ry = 1;
      for (std::size_t j = 0; j < n; ++j) {
        rx += x[j] < x[i];
        ry += y[j] < y[i];
      }
      d2 += (rx - ry) * (rx - ry);
    }
    const double nn = static_cast<double>(n);
    EXPECT_NEAR(spearman(x, y), 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0)), 1e-12);
  }
}

TEST(Spearman, TiesAndDegenerateInput) {
  const std::vector<double> w{1, 2, 3, 4};
  EXPECT_NEAR(spearman(w, std::vector<double>{4, 3, 2, 1}), -1.0, 1e-15);
  // Ranks of {3, 1, 1, 0} are {4, 2.5, 2.5, 1}.
  EXPECT_NEAR(spearman(w, std::vector<double>{3, 1, 1, 0}), -0.9486832980505138, 1e-12);
  EXPECT_EQ(spearman(w, std::vector<double>{2, 2, 2, 2}), 0.0);
  EXPECT_THROW(spearman(w, std::vector<double>{1, 2}), UsageError);
}

TEST(ScoreDump, RoundTripsExactly) {
  SplitMix64 g(9);
  const auto s = scores(uniform_scores(g, 50), uniform_scores(g, 70));
  std::stringstream buf;
  write_score_dump(buf, s);
  const auto back = read_score_dump(buf);
  EXPECT_EQ(back.genuine, s.genuine);
  EXPECT_EQ(back.impostor, s.impostor);
}

TEST(ScoreDump, RejectsMalformedInput) {
  std::stringstream no_header("genuine,0.5\n");
  EXPECT_THROW(read_score_dump(no_header), DataError);
  std::stringstream bad_label("label,score\nfoo,0.5\n");
  EXPECT_THROW(read_score_dump(bad_label), DataError);
  std::stringstream bad_value("label,score\ngenuine,0.5x\n");
  EXPECT_THROW(read_score_dump(bad_value), DataError);
}

}  // namespace
}  // namespace eegfp
