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


#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "tdil/agent.h"
#include "tdil/discriminator.h"
#include "tdil/nn.h"
#include "tdil/rewards.h"
#include "tdil/trainer.h"

namespace tdil {
namespace {

Task ShippedTask() {
  EnvConfig c;
  c.map_path = std::string(TDIL_DATA_DIR) + "/maze.grid";
  c.route_path = std::string(TDIL_DATA_DIR) + "/maze.route";
  return LoadTask(c);
}

Eigen::MatrixXd RandomInputs(int rows, int cols, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd x(rows, cols);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  return x;
}

void BM_Forward(benchmark::State& state) {
  Rng rng(1);
  const DenseNet net =
      DenseNet::GlorotUniform({4, 64, 64, 1}, OutputActivation::kSigmoid, rng);
  const Eigen::MatrixXd x = RandomInputs(4, int(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(net.Forward(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Arg(1)->Arg(128)->Arg(4096);

void BM_ForwardBackward(benchmark::State& state) {
  Rng rng(1);
  const DenseNet net =
      DenseNet::GlorotUniform({4, 64, 64, 1}, OutputActivation::kSigmoid, rng);
  const Eigen::MatrixXd x = RandomInputs(4, int(state.range(0)), rng);
  const Eigen::MatrixXd g = Eigen::MatrixXd::Ones(1, state.range(0));
  ForwardCache cache;
  for (auto _ : state) {
    net.Forward(x, &cache);
    benchmark::DoNotOptimize(net.Backward(cache, g));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardBackward)->Arg(128)->Arg(1024);

void BM_DiscriminatorStep(benchmark::State& state) {
  const Task task = ShippedTask();
  DiscriminatorConfig c;
  c.backend = state.range(0) ? DiscriminatorBackend::kTable
                             : DiscriminatorBackend::kNetwork;
  TransitionDiscriminator d(task.env, c, 1);
  Rng rng(2);
  ReplayBuffer buffer(20000, 3);
  for (const Transition& t : CollectRandomTransitions(task.env, 20000, rng)) {
    buffer.Push(t);
  }
  for (auto _ : state) benchmark::DoNotOptimize(d.TrainFromBuffer(buffer));
}
BENCHMARK(BM_DiscriminatorStep)->Arg(0)->Arg(1);

void BM_TdilRewardAllStates(benchmark::State& state) {
  const Task task = ShippedTask();
  const TransitionDiscriminator d(task.env, DiscriminatorConfig{}, 1);
  RewardModel model(task.env, task.demo, RewardConfig{});
  model.set_discriminator(&d);
  const std::vector<State> states = task.env.EnumerateStates();
  for (auto _ : state) benchmark::DoNotOptimize(model.TdilForNextStates(states));
}
BENCHMARK(BM_TdilRewardAllStates);

void BM_AgentUpdate(benchmark::State& state) {
  const Task task = ShippedTask();
  SoftQAgent agent(task.env.num_states(), task.env.num_actions(), AgentConfig{});
  Rng rng(4);
  const std::vector<Transition> batch = CollectRandomTransitions(task.env, 40, rng);
  const std::vector<double> rewards(batch.size(), 1.0);
  std::vector<State> states;
  for (const Transition& t : batch) states.push_back(t.s);
  for (auto _ : state) {
    agent.CriticUpdate(batch, rewards);
    agent.ActorUpdate(states);
    benchmark::DoNotOptimize(agent.BcUpdate(task.demo));
  }
}
BENCHMARK(BM_AgentUpdate);

void BM_TrainingRun(benchmark::State& state) {
  const Task task = ShippedTask();
  TrainConfig c;
  c.disc.backend = state.range(0) ? DiscriminatorBackend::kTable
                                  : DiscriminatorBackend::kNetwork;
  c.disc.adam.learning_rate = state.range(0) ? 0.05 : 1e-3;
  c.schedule.total_env_steps = 2000;
  c.schedule.eval_interval = 1000;
  c.schedule.random_steps = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(RunTraining(c, task).env_steps);
  state.SetItemsProcessed(state.iterations() * c.schedule.total_env_steps);
}
BENCHMARK(BM_TrainingRun)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_OracleAgreement(benchmark::State& state) {
  const Task task = ShippedTask();
  const TransitionDiscriminator d(task.env, DiscriminatorConfig{}, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(OracleAgreement(TargetScorer(d), task.env));
  }
}
BENCHMARK(BM_OracleAgreement)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace tdil

BENCHMARK_MAIN();
