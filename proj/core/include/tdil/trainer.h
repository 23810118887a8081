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

#ifndef TDIL_TRAINER_H_
#define TDIL_TRAINER_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tdil/agent.h"
#include "tdil/config.h"
#include "tdil/discriminator.h"
#include "tdil/env.h"
#include "tdil/rewards.h"
#include "tdil/stats.h"

namespace tdil {

// An environment together with its expert demonstration.
struct Task {
  Environment env;
  ExpertDemo demo;
};

// Builds the environment and demo described by `config`. Relative paths are
// resolved against `base_dir` when it is nonempty.
Task LoadTask(const EnvConfig& config, const std::string& base_dir = "");

struct EvalResult {
  double mean_gt_return = 0.0;
  double mean_steps = 0.0;
  double success_rate = 0.0;
  std::vector<Trajectory> trajectories;
};

using Policy = std::function<Action(State)>;

// Runs `policy` once from each start. Episodes that do not reach the goal
// count `cap` steps and a failure.
EvalResult EvaluatePolicy(const Policy& policy, const Environment& env,
                          std::span<const State> starts, int cap = 50);
// Greedy rollouts of `agent` from `n_episodes` starts drawn from the start
// distribution.
EvalResult Evaluate(const SoftQAgent& agent, const Environment& env,
                    int n_episodes, Rng& rng, int cap = 50);
// Greedy rollouts from every state of the start support.
EvalResult EvaluateExhaustive(const SoftQAgent& agent, const Environment& env,
                              int cap = 50);

// Mean over `starts` of the shortest number of actions to the goal.
double MeanShortestPath(const Environment& env, std::span<const State> starts);

struct CheckpointRecord {
  std::int64_t env_steps = 0;
  std::string agent_snapshot;          // content hash
  std::string discriminator_snapshot;  // content hash, empty without one
  double raw_return = 0.0;
  double relative_return = 0.0;
  // Evaluation only; never read by any update.
  double gt_return = 0.0;
  double steps_per_episode = 0.0;
  double success_rate = 0.0;
};

struct MetricRow {
  std::int64_t env_steps = 0;
  double td_loss = 0.0;
  double disc_loss = 0.0;
  double bc_loss = 0.0;
  double raw_return = 0.0;
  double relative_return = 0.0;
  double gt_return = 0.0;
  double steps_per_episode = 0.0;
  double success_rate = 0.0;
  double acc_positive = 0.0;
  double acc_contrastive = 0.0;
  double acc_reversed = 0.0;
};

struct RunResult {
  std::vector<CheckpointRecord> registry;
  std::vector<MetricRow> metrics;
  std::unique_ptr<SoftQAgent> agent;
  std::unique_ptr<TransitionDiscriminator> discriminator;
  // Convergence bar in steps per episode for the evaluation starts.
  double convergence_bar = 0.0;
  std::int64_t env_steps = 0;
};

// A failure inside the training loop. The registry up to the failure is
// kept.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, std::int64_t iteration,
                std::vector<CheckpointRecord> partial)
      : Error("iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration),
        partial_(std::move(partial)) {}
  std::int64_t iteration() const { return iteration_; }
  const std::vector<CheckpointRecord>& partial_registry() const {
    return partial_;
  }

 private:
  std::int64_t iteration_;
  std::vector<CheckpointRecord> partial_;
};

// Optional outputs of a run. With a nonempty directory, snapshots go to
// <dir>/snapshots/<hash>.bin, the registry manifest to <dir>/registry.jsonl
// and the metric log to <dir>/metrics.csv.
struct RunOutputs {
  std::string directory;
};

// Each iteration: act (sampling; uniform during the warm-up steps), store,
// update the discriminator (and the GAIL discriminator when the reward reads
// it), soft-update the target, compute rewards with the target for an agent
// batch and an expert batch, update critic, actor, then behavior cloning;
// evaluate every eval_interval steps.
RunResult RunTraining(const TrainConfig& config, const Task& task,
                      const RunOutputs& outputs = {});

// First evaluation at which steps per episode fell below `bar`.
std::optional<std::int64_t> FirstConvergence(std::span<const MetricRow> rows,
                                             double bar);

// Record with the highest relative return; ties go to the latest record.
const CheckpointRecord& BlindSelect(std::span<const CheckpointRecord> registry);
// Record with the highest gt return; ties go to the latest record.
const CheckpointRecord& OracleSelect(std::span<const CheckpointRecord> registry);

// Spearman rho between relative and gt returns over the registry. Throws
// Error with fewer than three records.
RankCorrelation CorrelationReport(std::span<const CheckpointRecord> registry);

std::string FormatMetricsCsv(std::span<const MetricRow> rows);
std::vector<MetricRow> ParseMetricsCsv(std::string_view text);
std::string FormatRegistryLine(const CheckpointRecord& record);
std::vector<CheckpointRecord> ParseRegistry(std::string_view jsonl);

struct RunManifest {
  std::string config_text;
  std::vector<std::uint64_t> seeds;
  std::string map_hash;
  std::string demo_hash;
  std::string output_directory;
  std::string command_line;
  std::string evaluation_mode = "greedy";
};

std::string FormatManifest(const RunManifest& manifest);
RunManifest ParseManifest(std::string_view json);

}  // namespace tdil

#endif  // TDIL_TRAINER_H_
