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

#ifndef TDIL_REWARDS_H_
#define TDIL_REWARDS_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tdil/discriminator.h"
#include "tdil/env.h"
#include "tdil/nn.h"

namespace tdil {

// kAggregate: beta * R_IRL + (1 - beta) * R_TDIL. kL2: distance baseline.
enum class RewardKind { kAggregate, kL2 };
enum class IrlMode { kIndicator, kLearned };
enum class TdilBackend { kLearnedTarget, kOracle, kOracleMultistep };

struct RewardConfig {
  RewardKind kind = RewardKind::kAggregate;
  double beta = 0.0;
  IrlMode irl_mode = IrlMode::kIndicator;
  double l2_scale = 1.0;
  TdilBackend tdil_backend = TdilBackend::kLearnedTarget;
  // kOracleMultistep: weights[k - 1] scales the count reachable within k.
  int k_max = 1;
  std::vector<double> multistep_weights = {1.0};
  // Divide R_TDIL by the number of unique expert states.
  bool normalize_tdil = false;

  // Throws Error on out-of-range values.
  void Validate() const;
};

// State-action discriminator separating expert from agent pairs.
class GailDiscriminator {
 public:
  GailDiscriminator(const Environment& env, std::vector<int> hidden,
                    AdamConfig adam, std::uint64_t seed);

  double Predict(State s, Action a) const;
  // One BCE step, expert pairs labeled 1 and agent pairs 0, each side
  // averaged separately. Returns the loss before the step.
  double TrainStep(std::span<const std::pair<State, Action>> expert,
                   std::span<const std::pair<State, Action>> agent);

  const DenseNet& net() const { return net_; }
  std::span<const double> params() const { return net_.params(); }

 private:
  Eigen::MatrixXd Inputs(std::span<const std::pair<State, Action>> pairs) const;

  int num_states_;
  int num_actions_;
  int feature_dim_;
  std::vector<double> features_;
  DenseNet net_;
  Adam adam_;
};

// Sum over unique expert states s_e of D_target(t.next, s_e).
double RTdil(const Transition& t, const ExpertDemo& demo,
             const TransitionDiscriminator& d);
// Same with the exact one-step oracle in place of the discriminator.
double RTdilOracle(const Transition& t, const ExpertDemo& demo,
                   const Environment& env);
// sum_k weights[k-1] * #{unique s_e reachable from t.next within k actions}.
double RTdilMultistep(const Transition& t, const ExpertDemo& demo,
                      const Environment& env, std::span<const double> weights);
double RTdilMultistep(const Transition& t, const ExpertDemo& demo,
                      const ReachabilityOracle& oracle,
                      std::span<const double> weights);

double RIrlIndicator(State s, Action a, const ExpertDemo& demo);
// -log(1 - D(s, a)) with D clamped to [eps, 1 - eps].
double RIrlLearned(const GailDiscriminator& g, State s, Action a);

// exp(-scale * min_i || [f(s), onehot(a)] - [f(s_i), onehot(a_i)] ||) over
// the demo's (state, action) pairs.
double RL2(const Environment& env, State s, Action a, const ExpertDemo& demo,
           double scale);

// beta * r_irl + (1 - beta) * r_tdil.
inline double RAgg(double r_irl, double r_tdil, double beta) {
  return beta * r_irl + (1.0 - beta) * r_tdil;
}

using TransitionReward = std::function<double(const Transition&)>;

double RawReturn(const Trajectory& traj, const TransitionReward& reward);
// RawReturn(agent) / RawReturn(expert); throws Error when the expert sum is
// zero.
double RelativeReturn(const Trajectory& agent, const Trajectory& expert,
                      const TransitionReward& reward);

// Resolves a RewardConfig against its inputs. Discriminators are borrowed and
// must outlive the model.
class RewardModel {
 public:
  RewardModel(const Environment& env, const ExpertDemo& demo,
              RewardConfig config);

  void set_discriminator(const TransitionDiscriminator* d) { disc_ = d; }
  void set_gail(const GailDiscriminator* g) { gail_ = g; }

  const RewardConfig& config() const { return config_; }
  bool needs_discriminator() const;
  bool needs_gail() const;

  double Tdil(const Transition& t) const;
  double Irl(const Transition& t) const;
  double L2(const Transition& t) const;
  // The configured training reward.
  double Reward(const Transition& t) const;
  // Batched Reward(); R_TDIL is evaluated once per distinct next state.
  std::vector<double> Rewards(std::span<const Transition> batch) const;
  // R_TDIL for each state used as the next state.
  std::vector<double> TdilForNextStates(std::span<const State> next) const;

 private:
  double TdilWeight() const;
  double IrlWeight() const;

  const Environment* env_;
  const ExpertDemo* demo_;
  RewardConfig config_;
  const TransitionDiscriminator* disc_ = nullptr;
  const GailDiscriminator* gail_ = nullptr;
  std::optional<ReachabilityOracle> oracle_;
};

// CSV with header "step,r_tdil,r_irl,r_agg,gt_reward", one row per
// transition of `traj`. The gt column is for reporting only.
std::string FormatRewardTrace(const RewardModel& model, const Environment& env,
                              const Trajectory& traj);

}  // namespace tdil

#endif  // TDIL_REWARDS_H_
