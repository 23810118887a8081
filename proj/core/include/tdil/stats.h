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

#ifndef TDIL_STATS_H_
#define TDIL_STATS_H_

#include <span>
#include <vector>

namespace tdil {

// 1-based ranks; tied values share the mean of their positions.
std::vector<double> AverageRanks(std::span<const double> values);

struct RankCorrelation {
  double rho = 0.0;
  // Set when either series is constant; rho is then reported as 0.
  bool degenerate = false;
};

// Spearman's rho as the Pearson correlation of average ranks. Throws Error
// when the series differ in length or have fewer than two entries.
RankCorrelation Spearman(std::span<const double> x, std::span<const double> y);

// Median of a nonempty list (mean of the middle pair for even sizes).
double Median(std::vector<double> values);

}  // namespace tdil

#endif  // TDIL_STATS_H_
