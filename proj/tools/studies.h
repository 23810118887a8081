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

#ifndef TDIL_TOOLS_STUDIES_H_
#define TDIL_TOOLS_STUDIES_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tdil/trainer.h"

namespace tdil::cli {

enum class RewardVariant { kIrl, kL2, kTdil };

// "irl", "l2" or "tdil".
const char* VariantName(RewardVariant v);

// Shared settings of the grid-world reward comparison.
struct GridStudy {
  std::string map_path;
  std::string route_path;
  std::int64_t budget = 30000;
  std::int64_t eval_interval = 250;
  DiscriminatorBackend backend = DiscriminatorBackend::kTable;
  // 0 picks the hardware concurrency.
  int jobs = 0;
};

// Learning rate of the table backend in grid studies.
inline constexpr double kTableLearningRate = 0.05;

TrainConfig StudyConfig(const GridStudy& study);
TrainConfig WithVariant(TrainConfig config, RewardVariant variant);

// One run per seed, spread over `jobs` worker threads. Runs are independent,
// so results do not depend on the job count. With a nonempty `out_dir`, seed
// n writes to <out_dir>/seed-<n>.
std::vector<RunResult> RunSeeds(const TrainConfig& config, const Task& task,
                                std::span<const std::uint64_t> seeds,
                                int jobs, const std::string& out_dir = "");

struct SeedSummary {
  std::uint64_t seed = 0;
  std::optional<std::int64_t> convergence;
  double final_steps = 0.0;
  double final_success = 0.0;
};

SeedSummary Summarize(std::uint64_t seed, const RunResult& run);
std::vector<SeedSummary> Summarize(std::span<const std::uint64_t> seeds,
                                   std::span<const RunResult> runs);

// Median first-convergence step; runs that never converged count as
// +infinity.
double MedianConvergence(std::span<const SeedSummary> summaries);

struct Probe {
  bool success = false;
  bool entered_trap = false;
  int steps = 0;
};

// One greedy episode from `start`.
Probe ProbeFrom(const Environment& env, const SoftQAgent& agent, State start);

// Per-cell reward map: the TDIL reward for entering a cell, and the best
// IRL or L2 reward over the actions available in a cell.
std::vector<double> RewardHeatmap(const RewardModel& model,
                                  const Environment& env,
                                  RewardVariant variant);
// One row per grid row, top row first, space-separated values.
std::string FormatHeatmap(const Environment& env, std::span<const double> values);

// Applies only the behavior-cloning update, `updates` times.
SoftQAgent TrainBehaviorCloning(const Task& task, const AgentConfig& config,
                                int updates);

struct DiscStudyRow {
  std::string env;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  OfflineTrainingResult result;
};

// Offline discriminator fits for every (environment, alpha, seed).
std::vector<DiscStudyRow> RunDiscStudy(
    std::span<const std::pair<std::string, const Environment*>> envs,
    std::span<const double> alphas, std::span<const std::uint64_t> seeds,
    const OfflineTrainingConfig& base, int jobs);

std::vector<std::uint64_t> SeedRange(int n);

}  // namespace tdil::cli

#endif  // TDIL_TOOLS_STUDIES_H_
