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

#include <fstream>

#include "eegfp/dataset.hpp"
#include "test_util.hpp"

namespace eegfp {
namespace {

using testing::TempDir;
using testing::write_subject_file;

TEST(CatalogDataset, MapsBaselineRunsToConditions) {
  TempDir dir("catalog");
  write_subject_file(dir.path(), "S001", 1);
  write_subject_file(dir.path(), "S001", 2);
  const auto cat = catalog_dataset(dir.path());
  ASSERT_EQ(cat.entries.size(), 2u);
  EXPECT_EQ(cat.entries[0].subject_id, "S001");
  EXPECT_EQ(cat.entries[0].condition, Condition::kEyesOpen);
  EXPECT_EQ(cat.entries[1].condition, Condition::kEyesClosed);
  EXPECT_TRUE(cat.excluded.empty());
}

TEST(CatalogDataset, IgnoresTaskRuns) {
  TempDir dir("catalog");
  write_subject_file(dir.path(), "S001", 4);
  const auto cat = catalog_dataset(dir.path());
  EXPECT_TRUE(cat.entries.empty());
  EXPECT_TRUE(cat.excluded.empty());
}

TEST(CatalogDataset, ExcludesWrongSampleRate) {
  TempDir dir("catalog");
  write_subject_file(dir.path(), "S001", 1);
  const auto bad = write_subject_file(dir.path(), "S002", 1, 64, 128.0);
  const auto cat = catalog_dataset(dir.path());
  ASSERT_EQ(cat.entries.size(), 1u);
  ASSERT_EQ(cat.excluded.size(), 1u);
  EXPECT_EQ(cat.excluded[0].path, bad);
  EXPECT_EQ(cat.excluded[0].reason.rfind("sample_rate != 160", 0), 0u) << cat.excluded[0].reason;
}

TEST(CatalogDataset, ExcludesWrongChannelCount) {
  TempDir dir("catalog");
  write_subject_file(dir.path(), "S003", 2, 32);
  const auto cat = catalog_dataset(dir.path());
  EXPECT_TRUE(cat.entries.empty());
  ASSERT_EQ(cat.excluded.size(), 1u);
  EXPECT_EQ(cat.excluded[0].reason.rfind("channel_count != 64", 0), 0u);
}

TEST(CatalogDataset, UnreadableFileIsExcludedNotFatal) {
  TempDir dir("catalog");
  write_subject_file(dir.path(), "S001", 1);
  std::filesystem::create_directories(dir.path() / "S002");
  std::ofstream(dir.path() / "S002" / "S002R01.edf") << "not an edf file";
  const auto cat = catalog_dataset(dir.path());
  EXPECT_EQ(cat.entries.size(), 1u);
  ASSERT_EQ(cat.excluded.size(), 1u);
  EXPECT_NE(cat.excluded[0].reason.find("truncated"), std::string::npos);
}

TEST(CatalogDataset, EmptyDirectoryIsAnError) {
  TempDir dir("catalog");
  EXPECT_THROW(catalog_dataset(dir.path()), DataError);
  EXPECT_THROW(catalog_dataset(dir.path() / "missing"), DataError);
}

TEST(CatalogDataset, ScansAreDeterministicAndSorted) {
  TempDir dir("catalog");
  for (const char* s : {"S010", "S002", "S007"}) {
    write_subject_file(dir.path(), s, 2);
    write_subject_file(dir.path(), s, 1);
  }
  const auto a = catalog_dataset(dir.path());
  const auto b = catalog_dataset(dir.path());
  EXPECT_EQ(a.entries, b.entries);
  ASSERT_EQ(a.entries.size(), 6u);
  EXPECT_EQ(a.subjects(), (std::vector<std::string>{"S002", "S007", "S010"}));
  EXPECT_TRUE(std::is_sorted(a.entries.begin(), a.entries.end(),
                             [](const CatalogEntry& x, const CatalogEntry& y) {
                               return std::tie(x.subject_id, x.condition) <
                                      std::tie(y.subject_id, y.condition);
                             }));
}

TEST(CatalogDataset, IgnoresMisplacedFiles) {
  TempDir dir("catalog");
  write_subject_file(dir.path(), "S001", 1);
  // File name does not match its subject directory.
  std::filesystem::create_directories(dir.path() / "S005");
  std::filesystem::copy_file(dir.path() / "S001" / "S001R01.edf", dir.path() / "S005" / "S001R02.edf");
  const auto cat = catalog_dataset(dir.path());
  EXPECT_EQ(cat.entries.size(), 1u);
}

}  // namespace
}  // namespace eegfp
