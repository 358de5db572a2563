//
// Copyright 2026 The DropEscape Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dropescape/data_io.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"

namespace dropescape {
namespace {

std::string WriteTemp(const std::string& name, const std::string& text) {
  const std::filesystem::path path =
      std::filesystem::path(::testing::TempDir()) / name;
  std::ofstream(path) << text;
  return path.string();
}

std::vector<RealVector> RowsOf(const Dataset& d) {
  std::vector<RealVector> rows;
  for (size_t i = 0; i < d.size(); ++i) {
    rows.emplace_back(d.row(i).begin(), d.row(i).end());
  }
  return rows;
}

TEST(ParseCsvTest, SingleRow) {
  const Dataset d = *ParseCsv("a,b,y\n1,0,1\n");
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(RowsOf(d)[0], (RealVector{1, 0}));
  EXPECT_EQ(d.label(0), 1.0);
  EXPECT_EQ(d.norm_bound(), 1.0);
}

TEST(ParseCsvTest, ErrorsCarryLineNumbers) {
  const absl::StatusOr<Dataset> bad = ParseCsv("a,b,y\n1,notanumber,0\n");
  ASSERT_FALSE(bad.ok());
  EXPECT_NE(bad.status().message().find("line 2"), std::string::npos)
      << bad.status();
  const absl::StatusOr<Dataset> ragged = ParseCsv("a,b,y\n1,2,3\n1,2\n");
  ASSERT_FALSE(ragged.ok());
  EXPECT_NE(ragged.status().message().find("line 3"), std::string::npos);
  EXPECT_FALSE(ParseCsv("").ok());
  EXPECT_FALSE(ParseCsv("a,b,y\n").ok());
}

TEST(ParseCsvTest, ToleratesWhitespaceAndCrlf) {
  const Dataset d = *ParseCsv("a,y\r\n 2 , -1\r\n\r\n3,1\r\n");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.row(1)[0], 3.0);
  EXPECT_EQ(d.label(0), -1.0);
}

TEST(ParseSvmlightTest, SparseDensify) {
  const Dataset d = *ParseSvmlight("-1 2:3\n");
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(RowsOf(d)[0], (RealVector{0, 3}));
  EXPECT_EQ(d.label(0), -1.0);
}

TEST(ParseSvmlightTest, CommentsAndWidth) {
  const Dataset d = *ParseSvmlight("# header\n1 1:0.5 4:2 # tail\n-1 2:1\n");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.dim(), 4u);
  EXPECT_EQ(RowsOf(d)[0], (RealVector{0.5, 0, 0, 2}));
  EXPECT_EQ(RowsOf(d)[1], (RealVector{0, 1, 0, 0}));
}

TEST(ParseSvmlightTest, Errors) {
  EXPECT_FALSE(ParseSvmlight("").ok());
  const absl::StatusOr<Dataset> zero = ParseSvmlight("1 1:1\n1 0:2\n");
  ASSERT_FALSE(zero.ok());
  EXPECT_NE(zero.status().message().find("line 2"), std::string::npos);
  EXPECT_FALSE(ParseSvmlight("1 a:b\n").ok());
}

TEST(LoadDatasetTest, ReadsFilesAndReportsMissing) {
  const std::string csv = WriteTemp("load.csv", "x,y\n3,1\n4,0\n");
  const Dataset d = *LoadDataset(csv, DataFormat::kCsv);
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.norm_bound(), 4.0);
  const std::string svm = WriteTemp("load.svm", "1 1:1\n");
  EXPECT_EQ(LoadDataset(svm, DataFormat::kSvmlight)->size(), 1u);
  EXPECT_FALSE(LoadDataset("/nonexistent/file.csv", DataFormat::kCsv).ok());
  EXPECT_EQ(*ParseDataFormat("svmlight"), DataFormat::kSvmlight);
  EXPECT_FALSE(ParseDataFormat("json").ok());
}

TEST(SyntheticTest, ShapesLabelsAndDeterminism) {
  const Dataset a = *SyntheticSeparableLogistic(50, 6, 3);
  EXPECT_EQ(a.size(), 50u);
  EXPECT_EQ(a.dim(), 6u);
  for (double y : a.labels()) EXPECT_TRUE(y == 1.0 || y == -1.0);
  EXPECT_EQ(RowsOf(a), RowsOf(*SyntheticSeparableLogistic(50, 6, 3)));
  EXPECT_NE(RowsOf(a), RowsOf(*SyntheticSeparableLogistic(50, 6, 4)));
  const Dataset r = *SyntheticLinearRegression(30, 4, 0.1, 5);
  EXPECT_EQ(r.size(), 30u);
  EXPECT_EQ(r.dim(), 4u);
}

TEST(RandomRemovalTest, Contracts) {
  const Dataset d = *SyntheticLinearRegression(10, 3, 0.1, 6);
  EXPECT_EQ(RowsOf(*RandomRemoval(d, 0.0, 1)), RowsOf(d));
  const Dataset half = *RandomRemoval(d, 0.5, 2);
  EXPECT_EQ(half.size(), 5u);
  EXPECT_EQ(RowsOf(half), RowsOf(*RandomRemoval(d, 0.5, 2)));
  EXPECT_EQ(RandomRemoval(d, 0.31, 2)->size(), 7u);  // ceil(6.9)
  const std::vector<RealVector> all = RowsOf(d);
  for (const RealVector& r : RowsOf(half)) {
    EXPECT_NE(std::find(all.begin(), all.end(), r), all.end());
  }
  EXPECT_FALSE(RandomRemoval(d, 1.0, 1).ok());
  EXPECT_FALSE(RandomRemoval(d, -0.1, 1).ok());
}

TEST(RandomRemovalTest, SubsetsVaryWithSeed) {
  const Dataset d = *SyntheticLinearRegression(40, 2, 0.1, 7);
  EXPECT_NE(RowsOf(*RandomRemoval(d, 0.5, 1)), RowsOf(*RandomRemoval(d, 0.5, 2)));
}

TEST(AdversarialRemovalTest, Examples) {
  const Dataset d = *Dataset::Create({{0.1, 5}, {0.9, 5}, {0.5, 5}}, {1, 1, 1});
  const RealVector e1 = {1, 0};
  const Dataset out = *AdversarialRemoval(d, 0.34, e1);
  EXPECT_EQ(RowsOf(out), (std::vector<RealVector>{{0.9, 5}, {0.5, 5}}));
  EXPECT_EQ(RowsOf(*AdversarialRemoval(d, 0.0, e1)), RowsOf(d));

  const Dataset ties = *Dataset::Create({{1}, {-1}, {1}, {-1}}, {1, 2, 3, 4});
  const Dataset tout = *AdversarialRemoval(ties, 0.5, RealVector{1});
  EXPECT_EQ(RealVector(tout.labels().begin(), tout.labels().end()),
            (RealVector{3, 4}));
  EXPECT_FALSE(AdversarialRemoval(d, 0.5, RealVector{1}).ok());
}

TEST(AdversarialRemovalTest, ComposesAdditively) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset d = *SyntheticLinearRegression(23, 3, 0.1, 100 + seed);
    const RealVector theta = {0.3, -0.7, 1.1};
    const Dataset once = *AdversarialRemoval(d, 0.2, theta);
    const Dataset twice = *AdversarialRemoval(once, 0.3, theta);
    const size_t removed = d.size() - twice.size();
    const Dataset single =
        *AdversarialRemoval(d, (removed + 0.5) / d.size(), theta);
    EXPECT_EQ(RowsOf(twice), RowsOf(single));
  }
}

TEST(LoadDataSourceTest, MapsZeroOneLabelsForLogistic) {
  DataSource src;
  src.path = WriteTemp("labels.csv", "x,y\n1,0\n2,1\n");
  src.format = DataFormat::kCsv;
  const Dataset logistic = *LoadDataSource(src, true);
  EXPECT_EQ(logistic.label(0), -1.0);
  EXPECT_EQ(logistic.label(1), 1.0);
  EXPECT_EQ(LoadDataSource(src, false)->label(0), 0.0);

  DataSource synth;
  synth.n = 30;
  synth.p = 4;
  EXPECT_EQ(LoadDataSource(synth, true)->size(), 30u);
  synth.synthetic = "nonsense";
  EXPECT_FALSE(LoadDataSource(synth, true).ok());
}

}  // namespace
}  // namespace dropescape
