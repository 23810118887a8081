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

#ifndef TDIL_CONFIG_H_
#define TDIL_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tdil/agent.h"
#include "tdil/discriminator.h"
#include "tdil/rewards.h"

namespace tdil {

struct EnvConfig {
  // "grid" or "chain".
  std::string kind = "grid";
  std::string map_path;
  // Route file; for the chain an empty path means "advance to the end".
  std::string route_path;
  // Trajectory file, used instead of the route when set.
  std::string demo_path;
  int chain_length = 12;
  double goal_reward = 1.0;
};

struct GailConfig {
  std::vector<int> hidden = {64, 64};
  AdamConfig adam;
  std::size_t batch = 32;
};

struct ScheduleConfig {
  std::int64_t total_env_steps = 50000;
  std::int64_t eval_interval = 1000;
  // 0 means one greedy rollout from every state of the start support.
  int eval_episodes = 0;
  // Snapshot files are written every this many steps when an output
  // directory is given; must be a multiple of eval_interval.
  std::int64_t checkpoint_interval = 1000;
  int episode_cap = 50;
  // Uniform-random actions for the first this many env steps.
  std::int64_t random_steps = 5000;
  std::size_t replay_capacity = 200000;
  std::size_t agent_batch = 32;
  std::size_t expert_batch = 8;
  int agent_updates_per_step = 1;
  int disc_updates_per_step = 1;
  // Train the transition discriminator even when the reward does not read
  // it, so raw and relative returns are logged for every run.
  bool always_train_discriminator = false;
  // Stop after the first evaluation meeting the convergence bar.
  bool stop_at_convergence = false;
  double convergence_ratio = 1.25;
};

struct TrainConfig {
  EnvConfig env;
  RewardConfig reward;
  DiscriminatorConfig disc;
  GailConfig gail;
  AgentConfig agent;
  ScheduleConfig schedule;
  std::uint64_t seed = 0;

  // Throws Error naming the offending key.
  void Validate() const;
};

// Flat "key = value" text with "[section]" headers; '#' starts a comment.
// Keys before the first header belong to section "".
struct ConfigEntry {
  std::string value;
  int line = 0;
};
using ConfigSections = std::map<std::string, std::map<std::string, ConfigEntry>>;
ConfigSections ParseConfigSections(std::string_view text);

// Unknown sections or keys and malformed values raise ParseError. Missing
// keys keep their defaults.
TrainConfig ParseTrainConfig(std::string_view text);
// Every key with its current value; ParseTrainConfig(FormatTrainConfig(c))
// reproduces c.
std::string FormatTrainConfig(const TrainConfig& config);

// Shortest decimal text that parses back to the same double.
std::string FormatDouble(double v);

}  // namespace tdil

#endif  // TDIL_CONFIG_H_
