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

#include "tdil/discriminator.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

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

std::vector<StatePair> Concat(const PairBatch& positives,
                              std::span<const PairBatch> negatives,
                              std::size_t* n_neg) {
  std::vector<StatePair> all = positives.pairs;
  *n_neg = 0;
  for (const PairBatch& b : negatives) {
    all.insert(all.end(), b.pairs.begin(), b.pairs.end());
    *n_neg += b.size();
  }
  return all;
}

}  // namespace

TransitionDiscriminator::TransitionDiscriminator(const Environment& env,
                                                 DiscriminatorConfig config,
                                                 std::uint64_t seed)
    : config_(std::move(config)),
      num_states_(env.num_states()),
      feature_dim_(env.feature_dim()) {
  if (!(config_.alpha > 0.0 && config_.alpha < 1.0)) {
    throw Error("alpha must lie in (0, 1)");
  }
  if (!(config_.lambda >= 0.0 && config_.lambda <= 1.0)) {
    throw Error("lambda must lie in [0, 1]");
  }
  if (!(config_.reversed_fraction >= 0.0 && config_.reversed_fraction <= 1.0)) {
    throw Error("reversed_fraction must lie in [0, 1]");
  }
  features_.reserve(std::size_t(num_states_) * feature_dim_);
  for (const State& s : env.EnumerateStates()) {
    for (double f : env.features(s)) features_.push_back(f);
  }
  if (config_.backend == DiscriminatorBackend::kNetwork) {
    std::vector<int> dims = {2 * feature_dim_};
    dims.insert(dims.end(), config_.hidden.begin(), config_.hidden.end());
    dims.push_back(1);
    Rng rng(seed);
    online_ = DenseNet::GlorotUniform(dims, OutputActivation::kSigmoid, rng);
    target_ = online_;
    adam_ = Adam(online_.num_params(), config_.adam);
  } else {
    table_online_.assign(std::size_t(num_states_) * num_states_, 0.0);
    table_target_ = table_online_;
    adam_ = Adam(table_online_.size(), config_.adam);
  }
}

void TransitionDiscriminator::CheckPair(const StatePair& p) const {
  if (p.first.id < 0 || p.first.id >= num_states_ || p.second.id < 0 ||
      p.second.id >= num_states_) {
    throw Error("state id out of range for discriminator: (" +
                std::to_string(p.first.id) + ", " +
                std::to_string(p.second.id) + ")");
  }
}

Eigen::MatrixXd TransitionDiscriminator::PairInputs(
    std::span<const StatePair> pairs) const {
  Eigen::MatrixXd x(2 * feature_dim_, Eigen::Index(pairs.size()));
  for (std::size_t c = 0; c < pairs.size(); ++c) {
    CheckPair(pairs[c]);
    const double* fi = &features_[std::size_t(pairs[c].first.id) * feature_dim_];
    const double* fj = &features_[std::size_t(pairs[c].second.id) * feature_dim_];
    for (int k = 0; k < feature_dim_; ++k) {
      x(k, c) = fi[k];
      x(feature_dim_ + k, c) = fj[k];
    }
  }
  return x;
}

std::vector<double> TransitionDiscriminator::Logits(
    std::span<const StatePair> pairs, bool use_target,
    ForwardCache* cache) const {
  std::vector<double> z(pairs.size());
  if (config_.backend == DiscriminatorBackend::kTable) {
    const auto& table = use_target ? table_target_ : table_online_;
    for (std::size_t c = 0; c < pairs.size(); ++c) {
      CheckPair(pairs[c]);
      z[c] = table[std::size_t(pairs[c].first.id) * num_states_ +
                   pairs[c].second.id];
    }
    return z;
  }
  ForwardCache local;
  if (!cache) cache = &local;
  const DenseNet& net = use_target ? target_ : online_;
  net.Forward(PairInputs(pairs), cache);
  const Eigen::MatrixXd& pre = cache->preact.back();
  for (std::size_t c = 0; c < pairs.size(); ++c) z[c] = pre(0, c);
  return z;
}

double TransitionDiscriminator::Predict(State s_i, State s_j,
                                        bool use_target) const {
  const StatePair p{s_i, s_j};
  return PredictBatch(std::span(&p, 1), use_target)[0];
}

std::vector<double> TransitionDiscriminator::PredictBatch(
    std::span<const StatePair> pairs, bool use_target) const {
  if (pairs.empty()) return {};
  if (config_.backend == DiscriminatorBackend::kNetwork) {
    const DenseNet& net = use_target ? target_ : online_;
    Eigen::MatrixXd y = net.Forward(PairInputs(pairs));
    return std::vector<double>(y.data(), y.data() + y.size());
  }
  std::vector<double> p = Logits(pairs, use_target, nullptr);
  for (double& v : p) v = Sigmoid(v);
  return p;
}

std::vector<double> TransitionDiscriminator::PredictAll(bool use_target) const {
  std::vector<StatePair> pairs;
  pairs.reserve(std::size_t(num_states_) * num_states_);
  for (int i = 0; i < num_states_; ++i) {
    for (int j = 0; j < num_states_; ++j) pairs.push_back({State{i}, State{j}});
  }
  return PredictBatch(pairs, use_target);
}

double TransitionDiscriminator::Loss(const PairBatch& positives,
                                     std::span<const PairBatch> negatives) const {
  std::size_t n_neg = 0;
  std::vector<StatePair> all = Concat(positives, negatives, &n_neg);
  std::vector<double> p = PredictBatch(all, /*use_target=*/false);
  const std::size_t n_pos = positives.size();
  double pos = 0.0, neg = 0.0;
  for (std::size_t c = 0; c < n_pos; ++c) pos += std::log(Clamp(p[c]));
  for (std::size_t c = n_pos; c < all.size(); ++c) {
    neg += std::log(1.0 - Clamp(p[c]));
  }
  double loss = 0.0;
  if (n_pos > 0) loss -= config_.alpha * pos / double(n_pos);
  if (n_neg > 0) loss -= (1.0 - config_.alpha) * neg / double(n_neg);
  return loss;
}

double TransitionDiscriminator::LossGradient(
    const PairBatch& positives, std::span<const PairBatch> negatives,
    std::vector<double>* grad) const {
  if (positives.empty()) throw Error("discriminator step with no positives");
  std::size_t n_neg = 0;
  std::vector<StatePair> all = Concat(positives, negatives, &n_neg);
  const std::size_t n_pos = positives.size();

  ForwardCache cache;
  std::vector<double> z = Logits(
      all, /*use_target=*/false,
      config_.backend == DiscriminatorBackend::kNetwork ? &cache : nullptr);

  double pos = 0.0, neg = 0.0;
  Eigen::MatrixXd dz(1, Eigen::Index(all.size()));
  const double w_pos = config_.alpha / double(n_pos);
  const double w_neg = n_neg > 0 ? (1.0 - config_.alpha) / double(n_neg) : 0.0;
  for (std::size_t c = 0; c < all.size(); ++c) {
    const double d = Sigmoid(z[c]);
    if (c < n_pos) {
      pos += std::log(Clamp(d));
      dz(0, c) = -w_pos * (1.0 - d);
    } else {
      neg += std::log(1.0 - Clamp(d));
      dz(0, c) = w_neg * d;
    }
  }
  double loss = -config_.alpha * pos / double(n_pos);
  if (n_neg > 0) loss -= (1.0 - config_.alpha) * neg / double(n_neg);
  if (!std::isfinite(loss)) {
    auto [lo, hi] = std::minmax_element(z.begin(), z.end());
    std::ostringstream msg;
    msg << "non-finite discriminator loss: " << n_pos << " positives, "
        << n_neg << " negatives, logits in [" << *lo << ", " << *hi << "]";
    throw NumericError(msg.str());
  }

  if (config_.backend == DiscriminatorBackend::kNetwork) {
    *grad = online_.BackwardFromPreactivation(cache, dz);
  } else {
    grad->assign(table_online_.size(), 0.0);
    for (std::size_t c = 0; c < all.size(); ++c) {
      (*grad)[std::size_t(all[c].first.id) * num_states_ + all[c].second.id] +=
          dz(0, c);
    }
  }
  return loss;
}

double TransitionDiscriminator::TrainStep(
    const PairBatch& positives, std::span<const PairBatch> negatives) {
  std::vector<double> grad;
  const double loss = LossGradient(positives, negatives, &grad);
  if (config_.backend == DiscriminatorBackend::kNetwork) {
    adam_.Step(online_.params(), grad);
    SoftUpdate(target_, online_, config_.lambda);
  } else {
    adam_.Step(table_online_, grad);
    SoftUpdate(table_target_, table_online_, config_.lambda);
  }
  return loss;
}

double TransitionDiscriminator::TrainFromBuffer(ReplayBuffer& buffer) {
  PairBatch positives = BuildPositiveBatch(buffer, config_.positive_batch);
  std::size_t n_rev = 0;
  if (config_.use_reversed) {
    n_rev = std::size_t(std::llround(config_.reversed_fraction *
                                     double(config_.negative_batch)));
  }
  std::vector<PairBatch> negatives = BuildNegativeBatch(
      buffer, config_.negative_batch - n_rev, n_rev, config_.use_reversed);
  return TrainStep(positives, negatives);
}

std::span<const double> TransitionDiscriminator::online_params() const {
  if (config_.backend == DiscriminatorBackend::kTable) return table_online_;
  return online_.params();
}

std::span<const double> TransitionDiscriminator::target_params() const {
  if (config_.backend == DiscriminatorBackend::kTable) return table_target_;
  return target_.params();
}

std::span<double> TransitionDiscriminator::mutable_online_params() {
  if (config_.backend == DiscriminatorBackend::kTable) return table_online_;
  return online_.params();
}

std::span<double> TransitionDiscriminator::mutable_target_params() {
  if (config_.backend == DiscriminatorBackend::kTable) return table_target_;
  return target_.params();
}

std::string SerializeDiscriminator(const TransitionDiscriminator& d) {
  std::string out = "TDDS";
  PutU32(&out, 1);
  const bool table = d.config_.backend == DiscriminatorBackend::kTable;
  out.push_back(char(table ? 1 : 0));
  PutF64(&out, d.config_.alpha);
  PutF64(&out, d.config_.lambda);
  if (table) {
    for (const auto* t : {&d.table_online_, &d.table_target_}) {
      PutU64(&out, t->size());
      for (double v : *t) PutF64(&out, v);
    }
  } else {
    out += SerializeNet(d.online_);
    out += SerializeNet(d.target_);
  }
  return out;
}

TransitionDiscriminator DeserializeDiscriminator(const Environment& env,
                                                 std::string_view bytes) {
  if (bytes.substr(0, 4) != "TDDS") {
    throw DataError("not a discriminator snapshot");
  }
  bytes.remove_prefix(4);
  if (GetU32(&bytes) != 1) throw DataError("unsupported snapshot version");
  if (bytes.empty()) throw DataError("truncated snapshot");
  const int backend = bytes[0];
  bytes.remove_prefix(1);
  if (backend != 0 && backend != 1) throw DataError("unknown backend code");
  DiscriminatorConfig cfg;
  cfg.backend =
      backend == 1 ? DiscriminatorBackend::kTable : DiscriminatorBackend::kNetwork;
  cfg.alpha = GetF64(&bytes);
  cfg.lambda = GetF64(&bytes);
  if (backend == 1) {
    TransitionDiscriminator d(env, cfg, 0);
    for (auto* t : {&d.table_online_, &d.table_target_}) {
      if (GetU64(&bytes) != t->size()) {
        throw DataError("table size does not match the environment");
      }
      for (double& v : *t) v = GetF64(&bytes);
    }
    if (!bytes.empty()) throw DataError("trailing bytes in snapshot");
    return d;
  }
  DenseNet online = DeserializeNet(&bytes);
  DenseNet target = DeserializeNet(&bytes);
  if (!bytes.empty()) throw DataError("trailing bytes in snapshot");
  const auto& dims = online.layer_dims();
  if (!online.SameArchitecture(target) ||
      dims.front() != 2 * env.feature_dim() || dims.back() != 1) {
    throw DataError("snapshot architecture does not match the environment");
  }
  cfg.hidden.assign(dims.begin() + 1, dims.end() - 1);
  TransitionDiscriminator d(env, cfg, 0);
  d.online_ = std::move(online);
  d.target_ = std::move(target);
  return d;
}

bool OracleReachable(const Environment& env, State s_i, State s_j) {
  return env.TransitionSupport(s_i, s_j);
}

ReachabilityOracle::ReachabilityOracle(const Environment& env)
    : n_(env.num_states()), dist_(AllPairsActionDistance(env)) {}

int ReachabilityOracle::Distance(State s_i, State s_j) const {
  if (s_i.id < 0 || s_i.id >= n_ || s_j.id < 0 || s_j.id >= n_) {
    throw Error("state id out of range");
  }
  return dist_[std::size_t(s_i.id) * n_ + s_j.id];
}

bool ReachabilityOracle::Reachable(State s_i, State s_j, int k) const {
  if (k < 1) throw Error("reachability horizon must be >= 1");
  const int d = Distance(s_i, s_j);
  return d >= 1 && d <= k;
}

bool OracleReachableK(const Environment& env, State s_i, State s_j, int k) {
  if (k < 1) throw Error("reachability horizon must be >= 1");
  std::vector<char> seen(env.num_states(), 0);
  std::vector<int> frontier = {s_i.id};
  for (int depth = 1; depth <= k && !frontier.empty(); ++depth) {
    std::vector<int> next;
    for (int s : frontier) {
      for (int a = 0; a < env.num_actions(); ++a) {
        const int t = env.Step(State{s}, Action{a}).next.id;
        if (t == s_j.id) return true;
        if (!seen[t]) {
          seen[t] = 1;
          next.push_back(t);
        }
      }
    }
    frontier = std::move(next);
  }
  return false;
}

PairScorer TargetScorer(const TransitionDiscriminator& d) {
  return [&d](State a, State b) { return d.Predict(a, b, true); };
}

PairScorer OnlineScorer(const TransitionDiscriminator& d) {
  return [&d](State a, State b) { return d.Predict(a, b, false); };
}

PairScorer OracleScorer(const Environment& env) {
  return [&env](State a, State b) {
    return OracleReachable(env, a, b) ? 1.0 : 0.0;
  };
}

namespace {

struct EvalPairs {
  std::vector<StatePair> positive;
  std::vector<StatePair> contrastive;
  std::vector<StatePair> reversed;
  std::size_t contrastive_excluded = 0;
  std::size_t reversed_excluded = 0;
};

EvalPairs BuildEvalPairs(const Environment& env,
                         std::span<const Transition> heldout,
                         std::uint64_t seed) {
  if (heldout.empty()) throw DataError("empty held-out set");
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, heldout.size() - 1);
  EvalPairs out;
  for (const Transition& t : heldout) {
    out.positive.push_back({t.s, t.next});
    const StatePair c{t.s, heldout[pick(rng)].s};
    if (OracleReachable(env, c.first, c.second)) {
      ++out.contrastive_excluded;
    } else {
      out.contrastive.push_back(c);
    }
    const StatePair r{t.next, t.s};
    if (OracleReachable(env, r.first, r.second)) {
      ++out.reversed_excluded;
    } else {
      out.reversed.push_back(r);
    }
  }
  return out;
}

double Fraction(const PairScorer& scorer, const std::vector<StatePair>& pairs,
                double threshold, bool positive) {
  if (pairs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t ok = 0;
  for (const StatePair& p : pairs) {
    const bool above = scorer(p.first, p.second) > threshold;
    if (above == positive) ++ok;
  }
  return double(ok) / double(pairs.size());
}

}  // namespace

AccuracyReport EvaluateAccuracy(const PairScorer& scorer,
                                const Environment& env,
                                std::span<const Transition> heldout,
                                std::uint64_t seed, double threshold) {
  EvalPairs pairs = BuildEvalPairs(env, heldout, seed);
  AccuracyReport r;
  r.threshold = threshold;
  r.acc_positive = Fraction(scorer, pairs.positive, threshold, true);
  r.acc_contrastive = Fraction(scorer, pairs.contrastive, threshold, false);
  r.acc_reversed = Fraction(scorer, pairs.reversed, threshold, false);
  r.n_positive = pairs.positive.size();
  r.n_contrastive = pairs.contrastive.size();
  r.n_reversed = pairs.reversed.size();
  r.n_contrastive_excluded = pairs.contrastive_excluded;
  r.n_reversed_excluded = pairs.reversed_excluded;
  return r;
}

AccuracyReport EvaluateAccuracy(const TransitionDiscriminator& d,
                                const Environment& env,
                                std::span<const Transition> heldout,
                                std::uint64_t seed, double threshold) {
  const std::vector<double> table = d.PredictAll(/*use_target=*/true);
  const int n = d.num_states();
  PairScorer scorer = [&table, n](State a, State b) {
    return table[std::size_t(a.id) * n + b.id];
  };
  return EvaluateAccuracy(scorer, env, heldout, seed, threshold);
}

double OracleAgreement(const PairScorer& scorer, const Environment& env,
                       double threshold) {
  const int n = env.num_states();
  std::size_t agree = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const bool predicted = scorer(State{i}, State{j}) > threshold;
      if (predicted == OracleReachable(env, State{i}, State{j})) ++agree;
    }
  }
  return double(agree) / (double(n) * double(n));
}

double HeldOutLoss(const PairScorer& scorer, const Environment& env,
                   std::span<const Transition> heldout, std::uint64_t seed) {
  EvalPairs pairs = BuildEvalPairs(env, heldout, seed);
  double total = 0.0;
  std::size_t count = 0;
  for (const StatePair& p : pairs.positive) {
    total -= std::log(Clamp(scorer(p.first, p.second)));
    ++count;
  }
  for (const auto* set : {&pairs.contrastive, &pairs.reversed}) {
    for (const StatePair& p : *set) {
      total -= std::log(1.0 - Clamp(scorer(p.first, p.second)));
      ++count;
    }
  }
  return total / double(count);
}

std::vector<Transition> CollectRandomTransitions(const Environment& env,
                                                 std::size_t n, Rng& rng) {
  std::vector<Transition> out;
  out.reserve(n);
  std::uniform_int_distribution<int> action(0, env.num_actions() - 1);
  State s = env.SampleStart(rng);
  int steps = 0;
  while (out.size() < n) {
    const Action a{action(rng)};
    const StepResult r = env.Step(s, a);
    out.push_back({s, a, r.next, r.done});
    ++steps;
    if (r.done || steps >= env.episode_cap()) {
      s = env.SampleStart(rng);
      steps = 0;
    } else {
      s = r.next;
    }
  }
  return out;
}

OfflineTrainingResult TrainOffline(const Environment& env,
                                   const OfflineTrainingConfig& config) {
  Rng rng(DeriveSeed(config.seed, 0));
  const std::vector<Transition> data =
      CollectRandomTransitions(env, config.transitions, rng);
  ReplayBuffer buffer(std::max<std::size_t>(1, data.size()),
                      DeriveSeed(config.seed, 1));
  std::vector<Transition> heldout;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (IsHeldOut(i)) {
      heldout.push_back(data[i]);
    } else {
      buffer.Push(data[i]);
    }
  }
  TransitionDiscriminator d(env, config.disc, DeriveSeed(config.seed, 2));
  const std::uint64_t eval_seed = DeriveSeed(config.seed, 3);
  OfflineTrainingResult result;
  for (std::size_t step = 0; step < config.train_steps; ++step) {
    const double loss = d.TrainFromBuffer(buffer);
    if (config.loss_interval > 0 && step % config.loss_interval == 0) {
      result.train_loss.push_back(loss);
      result.heldout_loss.push_back(
          HeldOutLoss(OnlineScorer(d), env, heldout, eval_seed));
    }
  }
  result.report = EvaluateAccuracy(d, env, heldout, eval_seed);
  const std::vector<double> table = d.PredictAll(/*use_target=*/true);
  const int n = d.num_states();
  result.oracle_agreement = OracleAgreement(
      [&table, n](State a, State b) { return table[std::size_t(a.id) * n + b.id]; },
      env);
  return result;
}

}  // namespace tdil
