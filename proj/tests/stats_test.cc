// Copyright 2026 The tdil Authors.
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


#include "tdil/stats.h"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "tdil/common.h"
#include "tdil/hash.h"

namespace tdil {
namespace {

TEST(RanksTest, TiesShareMeanPosition) {
  const std::vector<double> v = {10.0, 20.0, 10.0, 5.0, 20.0, 20.0};
  EXPECT_EQ(AverageRanks(v), (std::vector<double>{2.5, 5.0, 2.5, 1.0, 5.0, 5.0}));
}

TEST(SpearmanTest, PerfectAndReversedOrder) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> y = {2, 4, 8, 16, 32};
  EXPECT_DOUBLE_EQ(Spearman(x, y).rho, 1.0);
  const std::vector<double> r = {5, 4, 3, 2, 1};
  EXPECT_DOUBLE_EQ(Spearman(x, r).rho, -1.0);
}

TEST(SpearmanTest, MatchesTextbookFormulaWithoutTies) {
  // rho = 1 - 6 sum d^2 / (n (n^2 - 1)).
  const std::vector<double> x = {86, 97, 99, 100, 101, 103, 106, 110, 112, 113};
  const std::vector<double> y = {2, 20, 28, 27, 50, 29, 7, 17, 6, 12};
  const std::vector<double> rx = AverageRanks(x), ry = AverageRanks(y);
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  const double n = double(x.size());
  EXPECT_NEAR(Spearman(x, y).rho, 1.0 - 6.0 * d2 / (n * (n * n - 1.0)), 1e-14);
  EXPECT_NEAR(Spearman(x, y).rho, -29.0 / 165.0, 1e-14);
}

TEST(SpearmanTest, DegenerateAndErrors) {
  const std::vector<double> x = {1, 2, 3};
  const std::vector<double> c = {4, 4, 4};
  const RankCorrelation r = Spearman(x, c);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.rho, 0.0);
  EXPECT_THROW(Spearman(x, std::vector<double>{1, 2}), Error);
  EXPECT_THROW(Spearman(std::vector<double>{1}, std::vector<double>{1}), Error);
  const std::vector<double> nan = {1, std::nan(""), 3};
  EXPECT_THROW(Spearman(x, nan), Error);
}

TEST(MedianTest, OddEvenAndInfinite) {
  EXPECT_EQ(Median({3, 1, 2}), 2.0);
  EXPECT_EQ(Median({4, 1, 3, 2}), 2.5);
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(Median({1, inf, inf}), inf);
  EXPECT_EQ(Median({1, 2, inf}), 2.0);
  EXPECT_THROW(Median({}), Error);
}

TEST(HashTest, KnownDigests) {
  EXPECT_EQ(Sha1Hex("abc"), "a9993e364706816aba3e25717850c26c9cd0d89d");
  EXPECT_EQ(GitBlobHash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(GitBlobHash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(SeedTest, StreamsAreDistinctAndStable) {
  EXPECT_EQ(DeriveSeed(0, 0), DeriveSeed(0, 0));
  EXPECT_NE(DeriveSeed(0, 0), DeriveSeed(0, 1));
  EXPECT_NE(DeriveSeed(0, 1), DeriveSeed(1, 0));
}

}  // namespace
}  // namespace tdil
