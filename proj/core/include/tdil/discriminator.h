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

#ifndef TDIL_DISCRIMINATOR_H_
#define TDIL_DISCRIMINATOR_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tdil/common.h"
#include "tdil/env.h"
#include "tdil/nn.h"
#include "tdil/replay.h"

namespace tdil {

enum class DiscriminatorBackend { kNetwork, kTable };

struct DiscriminatorConfig {
  DiscriminatorBackend backend = DiscriminatorBackend::kNetwork;
  std::vector<int> hidden = {64, 64};
  double alpha = 0.99;
  double lambda = 1e-4;
  AdamConfig adam;
  std::size_t positive_batch = 64;
  std::size_t negative_batch = 64;
  // Share of the negative batch drawn as reversed pairs.
  double reversed_fraction = 0.5;
  bool use_reversed = true;
};

// Classifier over state pairs estimating one-step reachability, with an
// online copy trained by weighted BCE and a soft-updated target copy that
// serves rewards.
class TransitionDiscriminator {
 public:
  TransitionDiscriminator(const Environment& env, DiscriminatorConfig config,
                          std::uint64_t seed);

  const DiscriminatorConfig& config() const { return config_; }
  int num_states() const { return num_states_; }
  int feature_dim() const { return feature_dim_; }

  double Predict(State s_i, State s_j, bool use_target) const;
  std::vector<double> PredictBatch(std::span<const StatePair> pairs,
                                   bool use_target) const;
  // Row-major [i * num_states + j] probabilities over every pair.
  std::vector<double> PredictAll(bool use_target) const;

  // One optimizer step on
  //   -( alpha * mean_{B+} log D + (1 - alpha) * mean_{B-} log(1 - D) ),
  // B- being the union of `negatives`. Returns the loss before the step and
  // then soft-updates the target.
  double TrainStep(const PairBatch& positives,
                   std::span<const PairBatch> negatives);
  // Draws batches from `buffer` according to the config.
  double TrainFromBuffer(ReplayBuffer& buffer);

  // TrainStep's loss and its gradient with respect to online_params(). The
  // gradient ignores the probability clamp.
  double LossGradient(const PairBatch& positives,
                      std::span<const PairBatch> negatives,
                      std::vector<double>* grad) const;

  // Loss of the online copy on the given batches, no update.
  double Loss(const PairBatch& positives,
              std::span<const PairBatch> negatives) const;

  std::span<const double> online_params() const;
  std::span<const double> target_params() const;
  std::span<double> mutable_online_params();
  std::span<double> mutable_target_params();
  const DenseNet& online_net() const { return online_; }
  const DenseNet& target_net() const { return target_; }
  std::int64_t step_count() const { return adam_.step_count(); }

  friend std::string SerializeDiscriminator(const TransitionDiscriminator& d);
  friend TransitionDiscriminator DeserializeDiscriminator(
      const Environment& env, std::string_view bytes);

 private:
  std::vector<double> Logits(std::span<const StatePair> pairs,
                             bool use_target, ForwardCache* cache) const;
  Eigen::MatrixXd PairInputs(std::span<const StatePair> pairs) const;
  void CheckPair(const StatePair& p) const;

  DiscriminatorConfig config_;
  int num_states_ = 0;
  int feature_dim_ = 0;
  std::vector<double> features_;  // num_states * feature_dim
  DenseNet online_;
  DenseNet target_;
  std::vector<double> table_online_;  // logits, kTable backend
  std::vector<double> table_target_;
  Adam adam_;
};

// Snapshot: "TDDS", u32 version, u8 backend, f64 alpha, f64 lambda, then the
// online and target parameters (network snapshots, or u64 count plus raw
// logits for the table backend).
std::string SerializeDiscriminator(const TransitionDiscriminator& d);
TransitionDiscriminator DeserializeDiscriminator(const Environment& env,
                                                 std::string_view bytes);

// Exact one-step reachability: some action moves s_i to s_j.
bool OracleReachable(const Environment& env, State s_i, State s_j);

// Reachability within 1..k actions, with all-pairs distances precomputed.
class ReachabilityOracle {
 public:
  explicit ReachabilityOracle(const Environment& env);
  bool Reachable(State s_i, State s_j, int k) const;
  // Minimal number of actions >= 1, or -1.
  int Distance(State s_i, State s_j) const;
  int num_states() const { return n_; }

 private:
  int n_;
  std::vector<int> dist_;
};

// Uncached bounded BFS; k must be >= 1.
bool OracleReachableK(const Environment& env, State s_i, State s_j, int k);

using PairScorer = std::function<double(State, State)>;

PairScorer TargetScorer(const TransitionDiscriminator& d);
PairScorer OnlineScorer(const TransitionDiscriminator& d);
PairScorer OracleScorer(const Environment& env);

// Every 20th pushed transition (push index 19, 39, ...) is held out.
inline constexpr std::size_t kHeldOutStride = 20;
inline bool IsHeldOut(std::size_t push_index) {
  return push_index % kHeldOutStride == kHeldOutStride - 1;
}

struct AccuracyReport {
  double acc_positive = 0.0;
  double acc_contrastive = 0.0;
  // NaN when no reversed pair is oracle-invalid.
  double acc_reversed = 0.0;
  std::size_t n_positive = 0;
  std::size_t n_contrastive = 0;
  std::size_t n_reversed = 0;
  // Negatives the oracle labels reachable; excluded from the accuracies.
  std::size_t n_contrastive_excluded = 0;
  std::size_t n_reversed_excluded = 0;
  double threshold = 0.5;
};

// Positives are the held-out (s, s') pairs; contrastive negatives pair the
// head states of held-out transition i and a seeded uniform partner;
// reversed negatives are (s', s). Negatives the oracle confirms reachable
// are excluded and counted. Throws DataError for an empty held-out set.
AccuracyReport EvaluateAccuracy(const PairScorer& scorer,
                                const Environment& env,
                                std::span<const Transition> heldout,
                                std::uint64_t seed, double threshold = 0.5);
AccuracyReport EvaluateAccuracy(const TransitionDiscriminator& d,
                                const Environment& env,
                                std::span<const Transition> heldout,
                                std::uint64_t seed, double threshold = 0.5);

// Fraction of all ordered state pairs where (score > threshold) equals the
// one-step oracle.
double OracleAgreement(const PairScorer& scorer, const Environment& env,
                       double threshold = 0.5);

// Unweighted BCE on the evaluation pairs of EvaluateAccuracy.
double HeldOutLoss(const PairScorer& scorer, const Environment& env,
                   std::span<const Transition> heldout, std::uint64_t seed);

// Uniform-random-policy episodes from the start distribution, truncated at
// the episode cap, until `n` transitions are collected.
std::vector<Transition> CollectRandomTransitions(const Environment& env,
                                                 std::size_t n, Rng& rng);

struct OfflineTrainingConfig {
  DiscriminatorConfig disc;
  std::size_t transitions = 20000;
  std::size_t train_steps = 20000;
  // Held-out loss is recorded every this many steps (0 disables).
  std::size_t loss_interval = 0;
  std::uint64_t seed = 0;
};

struct OfflineTrainingResult {
  AccuracyReport report;
  double oracle_agreement = 0.0;
  std::vector<double> heldout_loss;
  std::vector<double> train_loss;
};

// Fits a discriminator on random-policy data with the held-out split and
// reports accuracy of the target copy.
OfflineTrainingResult TrainOffline(const Environment& env,
                                   const OfflineTrainingConfig& config);

}  // namespace tdil

#endif  // TDIL_DISCRIMINATOR_H_
