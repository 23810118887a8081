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

#include "tdil/rewards.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace tdil {
namespace {

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double Clamp(double p) {
  return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon);
}

}  // namespace

void RewardConfig::Validate() const {
  if (!(beta >= 0.0 && beta <= 1.0)) throw Error("beta must lie in [0, 1]");
  if (!(l2_scale > 0.0) || !std::isfinite(l2_scale)) {
    throw Error("l2_scale must be positive");
  }
  if (tdil_backend == TdilBackend::kOracleMultistep) {
    if (k_max < 1) throw Error("k_max must be >= 1");
    if (static_cast<int>(multistep_weights.size()) != k_max) {
      throw Error("multistep weights must have k_max entries");
    }
    for (double w : multistep_weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw Error("multistep weights must be finite and nonnegative");
      }
    }
  }
}

GailDiscriminator::GailDiscriminator(const Environment& env,
                                     std::vector<int> hidden, AdamConfig adam,
                                     std::uint64_t seed)
    : num_states_(env.num_states()),
      num_actions_(env.num_actions()),
      feature_dim_(env.feature_dim()) {
  for (const State& s : env.EnumerateStates()) {
    for (double f : env.features(s)) features_.push_back(f);
  }
  std::vector<int> dims = {feature_dim_ + num_actions_};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  Rng rng(seed);
  net_ = DenseNet::GlorotUniform(dims, OutputActivation::kSigmoid, rng);
  adam_ = Adam(net_.num_params(), adam);
}

Eigen::MatrixXd GailDiscriminator::Inputs(
    std::span<const std::pair<State, Action>> pairs) const {
  Eigen::MatrixXd x =
      Eigen::MatrixXd::Zero(feature_dim_ + num_actions_, Eigen::Index(pairs.size()));
  for (std::size_t c = 0; c < pairs.size(); ++c) {
    const auto [s, a] = pairs[c];
    if (s.id < 0 || s.id >= num_states_ || a.id < 0 || a.id >= num_actions_) {
      throw Error("state or action id out of range for GAIL discriminator");
    }
    for (int k = 0; k < feature_dim_; ++k) {
      x(k, c) = features_[std::size_t(s.id) * feature_dim_ + k];
    }
    x(feature_dim_ + a.id, c) = 1.0;
  }
  return x;
}

double GailDiscriminator::Predict(State s, Action a) const {
  const std::pair<State, Action> p{s, a};
  return net_.Forward(Inputs(std::span(&p, 1)))(0, 0);
}

double GailDiscriminator::TrainStep(
    std::span<const std::pair<State, Action>> expert,
    std::span<const std::pair<State, Action>> agent) {
  if (expert.empty() || agent.empty()) {
    throw Error("GAIL step needs expert and agent pairs");
  }
  std::vector<std::pair<State, Action>> all(expert.begin(), expert.end());
  all.insert(all.end(), agent.begin(), agent.end());
  ForwardCache cache;
  net_.Forward(Inputs(all), &cache);
  const Eigen::MatrixXd& z = cache.preact.back();
  Eigen::MatrixXd grad(1, Eigen::Index(all.size()));
  double pos = 0.0, neg = 0.0;
  for (std::size_t c = 0; c < all.size(); ++c) {
    const double d = Sigmoid(z(0, c));
    if (c < expert.size()) {
      pos += std::log(Clamp(d));
      grad(0, c) = -(1.0 - d) / double(expert.size());
    } else {
      neg += std::log(1.0 - Clamp(d));
      grad(0, c) = d / double(agent.size());
    }
  }
  const double loss = -pos / double(expert.size()) - neg / double(agent.size());
  if (!std::isfinite(loss)) {
    std::ostringstream msg;
    msg << "non-finite GAIL loss: " << expert.size() << " expert pairs, "
        << agent.size() << " agent pairs";
    throw NumericError(msg.str());
  }
  adam_.Step(net_.params(), net_.BackwardFromPreactivation(cache, grad));
  return loss;
}

double RTdil(const Transition& t, const ExpertDemo& demo,
             const TransitionDiscriminator& d) {
  std::vector<StatePair> pairs;
  pairs.reserve(demo.unique_states.size());
  for (const State& e : demo.unique_states) pairs.push_back({t.next, e});
  double sum = 0.0;
  for (double p : d.PredictBatch(pairs, /*use_target=*/true)) sum += p;
  return sum;
}

double RTdilOracle(const Transition& t, const ExpertDemo& demo,
                   const Environment& env) {
  double sum = 0.0;
  for (const State& e : demo.unique_states) {
    if (OracleReachable(env, t.next, e)) sum += 1.0;
  }
  return sum;
}

double RTdilMultistep(const Transition& t, const ExpertDemo& demo,
                      const Environment& env, std::span<const double> weights) {
  double sum = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] == 0.0) continue;
    double count = 0.0;
    for (const State& e : demo.unique_states) {
      if (OracleReachableK(env, t.next, e, int(k) + 1)) count += 1.0;
    }
    sum += weights[k] * count;
  }
  return sum;
}

double RTdilMultistep(const Transition& t, const ExpertDemo& demo,
                      const ReachabilityOracle& oracle,
                      std::span<const double> weights) {
  double sum = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] == 0.0) continue;
    double count = 0.0;
    for (const State& e : demo.unique_states) {
      if (oracle.Reachable(t.next, e, int(k) + 1)) count += 1.0;
    }
    sum += weights[k] * count;
  }
  return sum;
}

double RIrlIndicator(State s, Action a, const ExpertDemo& demo) {
  return demo.ContainsPair(s, a) ? 1.0 : 0.0;
}

double RIrlLearned(const GailDiscriminator& g, State s, Action a) {
  return -std::log(1.0 - Clamp(g.Predict(s, a)));
}

double RL2(const Environment& env, State s, Action a, const ExpertDemo& demo,
           double scale) {
  if (demo.trajectory.empty()) throw Error("L2 reward needs a nonempty demo");
  const auto fs = env.features(s);
  double best = std::numeric_limits<double>::infinity();
  for (const Transition& e : demo.trajectory.transitions) {
    const auto fe = env.features(e.s);
    double sq = 0.0;
    for (std::size_t k = 0; k < fs.size(); ++k) {
      sq += (fs[k] - fe[k]) * (fs[k] - fe[k]);
    }
    if (e.a != a) sq += 2.0;
    best = std::min(best, sq);
  }
  return std::exp(-scale * std::sqrt(best));
}

double RawReturn(const Trajectory& traj, const TransitionReward& reward) {
  double sum = 0.0;
  for (const Transition& t : traj.transitions) sum += reward(t);
  return sum;
}

double RelativeReturn(const Trajectory& agent, const Trajectory& expert,
                      const TransitionReward& reward) {
  const double denom = RawReturn(expert, reward);
  if (denom == 0.0) {
    throw Error("expert raw return is zero; the discriminator is degenerate");
  }
  return RawReturn(agent, reward) / denom;
}

RewardModel::RewardModel(const Environment& env, const ExpertDemo& demo,
                         RewardConfig config)
    : env_(&env), demo_(&demo), config_(std::move(config)) {
  config_.Validate();
  if (config_.tdil_backend == TdilBackend::kOracleMultistep) {
    oracle_.emplace(env);
  }
}

double RewardModel::TdilWeight() const {
  return config_.kind == RewardKind::kAggregate ? 1.0 - config_.beta : 0.0;
}

double RewardModel::IrlWeight() const {
  return config_.kind == RewardKind::kAggregate ? config_.beta : 0.0;
}

bool RewardModel::needs_discriminator() const {
  return TdilWeight() > 0.0 &&
         config_.tdil_backend == TdilBackend::kLearnedTarget;
}

bool RewardModel::needs_gail() const {
  return IrlWeight() > 0.0 && config_.irl_mode == IrlMode::kLearned;
}

std::vector<double> RewardModel::TdilForNextStates(
    std::span<const State> next) const {
  std::vector<double> out(next.size(), 0.0);
  const double scale =
      config_.normalize_tdil ? 1.0 / double(demo_->unique_states.size()) : 1.0;
  switch (config_.tdil_backend) {
    case TdilBackend::kLearnedTarget: {
      if (!disc_) throw Error("learned R_TDIL requested without a discriminator");
      const auto& experts = demo_->unique_states;
      std::vector<StatePair> pairs;
      pairs.reserve(next.size() * experts.size());
      for (const State& s : next) {
        for (const State& e : experts) pairs.push_back({s, e});
      }
      const std::vector<double> p = disc_->PredictBatch(pairs, true);
      for (std::size_t i = 0; i < next.size(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < experts.size(); ++j) {
          sum += p[i * experts.size() + j];
        }
        out[i] = sum;
      }
      break;
    }
    case TdilBackend::kOracle:
      for (std::size_t i = 0; i < next.size(); ++i) {
        out[i] = RTdilOracle(Transition{State{}, Action{}, next[i], false},
                             *demo_, *env_);
      }
      break;
    case TdilBackend::kOracleMultistep:
      for (std::size_t i = 0; i < next.size(); ++i) {
        out[i] = RTdilMultistep(Transition{State{}, Action{}, next[i], false},
                                *demo_, *oracle_, config_.multistep_weights);
      }
      break;
  }
  if (scale != 1.0) {
    for (double& v : out) v *= scale;
  }
  return out;
}

double RewardModel::Tdil(const Transition& t) const {
  return TdilForNextStates(std::span(&t.next, 1))[0];
}

double RewardModel::Irl(const Transition& t) const {
  if (config_.irl_mode == IrlMode::kIndicator) {
    return RIrlIndicator(t.s, t.a, *demo_);
  }
  if (!gail_) throw Error("learned R_IRL requested without a GAIL discriminator");
  return RIrlLearned(*gail_, t.s, t.a);
}

double RewardModel::L2(const Transition& t) const {
  return RL2(*env_, t.s, t.a, *demo_, config_.l2_scale);
}

double RewardModel::Reward(const Transition& t) const {
  return Rewards(std::span(&t, 1))[0];
}

std::vector<double> RewardModel::Rewards(
    std::span<const Transition> batch) const {
  std::vector<double> out(batch.size(), 0.0);
  if (config_.kind == RewardKind::kL2) {
    for (std::size_t i = 0; i < batch.size(); ++i) out[i] = L2(batch[i]);
    return out;
  }
  std::vector<double> tdil(batch.size(), 0.0);
  if (TdilWeight() > 0.0) {
    std::vector<State> distinct;
    std::unordered_map<int, std::size_t> index;
    for (const Transition& t : batch) {
      if (index.emplace(t.next.id, distinct.size()).second) {
        distinct.push_back(t.next);
      }
    }
    const std::vector<double> values = TdilForNextStates(distinct);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      tdil[i] = values[index.at(batch[i].next.id)];
    }
  }
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double irl = IrlWeight() > 0.0 ? Irl(batch[i]) : 0.0;
    out[i] = RAgg(irl, tdil[i], config_.beta);
  }
  return out;
}

std::string FormatRewardTrace(const RewardModel& model, const Environment& env,
                              const Trajectory& traj) {
  std::ostringstream out;
  out.precision(17);
  out << "step,r_tdil,r_irl,r_agg,gt_reward\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Transition& t = traj.transitions[k];
    const double tdil = model.Tdil(t);
    const double irl = model.Irl(t);
    out << k << ',' << tdil << ',' << irl << ','
        << RAgg(irl, tdil, model.config().beta) << ','
        << env.Step(t.s, t.a).gt_reward << '\n';
  }
  return out.str();
}

}  // namespace tdil
