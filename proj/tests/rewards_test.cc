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

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "test_util.h"

namespace tdil {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Expert walks 0 -> 1 -> 2 -> 5 -> 8 on a 3x3 grid with the goal at (2, 2).
ExpertDemo SmallDemo(const Environment& env) {
  const std::vector<Action> route = {Action{3}, Action{3}, Action{0}, Action{0}};
  return MakeExpertDemo(env, route, State{0});
}

TEST(RewardsTest, IndicatorMatchesDemoPairs) {
  const Environment env = test::OpenGrid(3, 3, 2, 2);
  const ExpertDemo demo = SmallDemo(env);
  EXPECT_EQ(RIrlIndicator(State{0}, Action{3}, demo), 1.0);
  EXPECT_EQ(RIrlIndicator(State{0}, Action{0}, demo), 0.0);
  EXPECT_EQ(RIrlIndicator(State{5}, Action{0}, demo), 1.0);
  EXPECT_EQ(RIrlIndicator(State{4}, Action{3}, demo), 0.0);
}

TEST(RewardsTest, OracleTdilCountsAdjacentExpertStates) {
  const Environment env = test::OpenGrid(3, 3, 2, 2);
  const ExpertDemo demo = SmallDemo(env);
  ASSERT_EQ(demo.unique_states.size(), 5u);  // 0 1 2 5 8
  // From 4 (centre) one action reaches 1 and 5.
  EXPECT_EQ(RTdilOracle({State{3}, Action{3}, State{4}, false}, demo, env), 2.0);
  // From 0: itself (bump) and 1.
  EXPECT_EQ(RTdilOracle({State{1}, Action{2}, State{0}, false}, demo, env), 2.0);
  // From 6: nothing in the demo is adjacent.
  EXPECT_EQ(RTdilOracle({State{3}, Action{0}, State{6}, false}, demo, env), 0.0);
}

TEST(RewardsTest, MultistepWithOneStepMatchesOracleEverywhere) {
  GridSpec g;
  g.width = 4;
  g.height = 4;
  g.goal = 15;
  g.barriers = {{1, 5}, {6, 7}, {9, 13}};
  const Environment env = Environment::Grid(g);
  const ReachabilityOracle oracle(env);
  const std::vector<double> w = {1.0};
  const std::vector<std::vector<Action>> routes = {
      {Action{3}, Action{3}, Action{3}, Action{0}, Action{0}, Action{0}},
      {Action{0}, Action{0}, Action{0}, Action{3}, Action{3}, Action{3}}};
  for (const auto& route : routes) {
    const ExpertDemo demo = MakeExpertDemo(env, route, State{0});
    for (int s = 0; s < 16; ++s) {
      for (int a = 0; a < 4; ++a) {
        const Transition t{State{s}, Action{a}, env.Step(State{s}, Action{a}).next, false};
        const double one = RTdilOracle(t, demo, env);
        EXPECT_EQ(RTdilMultistep(t, demo, env, w), one);
        EXPECT_EQ(RTdilMultistep(t, demo, oracle, w), one);
      }
    }
  }
}

TEST(RewardsTest, MultistepWeightsCountNestedHorizons) {
  GridSpec g;
  g.width = 5;
  g.height = 1;
  g.goal = 4;
  const Environment env = Environment::Grid(g);
  const std::vector<Action> route = {Action{3}, Action{3}, Action{3}, Action{3}};
  const ExpertDemo demo = MakeExpertDemo(env, route, State{0});
  const Transition t{State{0}, Action{0}, State{0}, false};
  // Within 1: {0, 1}; within 2: {0, 1, 2}; within 3: {0, 1, 2, 3}.
  const std::vector<double> w = {1.0, 0.5, 0.25};
  EXPECT_DOUBLE_EQ(RTdilMultistep(t, demo, env, w), 2.0 + 1.5 + 1.0);
}

TEST(RewardsTest, L2RewardUsesNearestDemoPair) {
  const Environment env = test::OpenGrid(3, 3, 2, 2);
  const ExpertDemo demo = SmallDemo(env);
  EXPECT_DOUBLE_EQ(RL2(env, State{0}, Action{3}, demo, 1.0), 1.0);
  // (1, 1) with "right": nearest matching action at (0,0) or (1,0): d = 0.5.
  EXPECT_DOUBLE_EQ(RL2(env, State{4}, Action{3}, demo, 2.0), std::exp(-1.0));
  // No demo pair uses "down", so every candidate pays the sqrt(2) mismatch.
  EXPECT_DOUBLE_EQ(RL2(env, State{0}, Action{1}, demo, 1.0),
                   std::exp(-std::sqrt(2.0)));
  EXPECT_THROW(RL2(env, State{0}, Action{0}, ExpertDemo{}, 1.0), Error);
}

TEST(RewardsTest, ConfigValidation) {
  RewardConfig c;
  c.beta = 1.5;
  EXPECT_THROW(c.Validate(), Error);
  c = RewardConfig{};
  c.l2_scale = 0.0;
  EXPECT_THROW(c.Validate(), Error);
  c = RewardConfig{};
  c.tdil_backend = TdilBackend::kOracleMultistep;
  c.k_max = 2;
  EXPECT_THROW(c.Validate(), Error);
  c.multistep_weights = {1.0, -1.0};
  EXPECT_THROW(c.Validate(), Error);
  c.multistep_weights = {1.0, 0.5};
  EXPECT_NO_THROW(c.Validate());
}

TEST(RewardsTest, AggregateIsExactMixture) {
  const Task task = test::ShippedTask();
  DiscriminatorConfig dc;
  dc.hidden = {8};
  const TransitionDiscriminator d(task.env, dc, 5);
  std::vector<Transition> all;
  for (const State& s : task.env.EnumerateStates()) {
    for (int a = 0; a < 4; ++a) {
      all.push_back({s, Action{a}, task.env.Step(s, Action{a}).next, false});
    }
  }
  for (double beta : {0.0, 0.1, 0.37, 0.5, 0.9, 1.0}) {
    RewardConfig c;
    c.beta = beta;
    RewardModel model(task.env, task.demo, c);
    model.set_discriminator(&d);
    const std::vector<double> batch = model.Rewards(all);
    for (std::size_t i = 0; i < all.size(); ++i) {
      const double irl = RIrlIndicator(all[i].s, all[i].a, task.demo);
      const double tdil = RTdil(all[i], task.demo, d);
      const double tol = 8 * kEps * std::max(1.0, std::abs(batch[i]));
      EXPECT_NEAR(batch[i], beta * irl + (1.0 - beta) * tdil, tol);
      EXPECT_NEAR(model.Reward(all[i]), batch[i], tol);
    }
  }
}

TEST(RewardsTest, ModelResolvesBackendsAndNeeds) {
  const Task task = test::ShippedTask();
  RewardConfig c;
  RewardModel learned(task.env, task.demo, c);
  EXPECT_TRUE(learned.needs_discriminator());
  EXPECT_FALSE(learned.needs_gail());
  const Transition t = task.demo.trajectory.transitions.front();
  EXPECT_THROW(learned.Tdil(t), Error);

  c.tdil_backend = TdilBackend::kOracle;
  c.normalize_tdil = true;
  const RewardModel oracle(task.env, task.demo, c);
  EXPECT_FALSE(oracle.needs_discriminator());
  EXPECT_DOUBLE_EQ(oracle.Tdil(t), RTdilOracle(t, task.demo, task.env) /
                                       double(task.demo.unique_states.size()));

  c = RewardConfig{};
  c.beta = 1.0;
  c.irl_mode = IrlMode::kLearned;
  const RewardModel gail(task.env, task.demo, c);
  EXPECT_TRUE(gail.needs_gail());
  EXPECT_FALSE(gail.needs_discriminator());
  EXPECT_THROW(gail.Reward(t), Error);

  c = RewardConfig{};
  c.kind = RewardKind::kL2;
  const RewardModel l2(task.env, task.demo, c);
  EXPECT_FALSE(l2.needs_discriminator());
  EXPECT_EQ(l2.Reward(t), RL2(task.env, t.s, t.a, task.demo, 1.0));
}

TEST(RewardsTest, RelativeReturnCancelsScale) {
  const Task task = test::ShippedTask();
  RewardConfig c;
  c.tdil_backend = TdilBackend::kOracle;
  const RewardModel model(task.env, task.demo, c);
  const Trajectory& expert = task.demo.trajectory;
  Trajectory agent;
  agent.transitions.assign(expert.transitions.begin(), expert.transitions.begin() + 3);
  const TransitionReward base = [&](const Transition& t) { return model.Reward(t); };
  const double rel = RelativeReturn(agent, expert, base);
  EXPECT_GT(rel, 0.0);
  for (double scale : {1e-3, 0.7, 3.0, 1e6}) {
    const TransitionReward scaled = [&](const Transition& t) {
      return scale * model.Reward(t);
    };
    EXPECT_NEAR(RelativeReturn(agent, expert, scaled), rel, 1e-12 * rel);
  }
  EXPECT_DOUBLE_EQ(RelativeReturn(expert, expert, base), 1.0);
  EXPECT_THROW(RelativeReturn(agent, expert, [](const Transition&) { return 0.0; }), Error);
  EXPECT_EQ(RawReturn(Trajectory{}, base), 0.0);
}

TEST(GailTest, LearnsToSeparateExpertPairs) {
  const Task task = test::ShippedTask();
  AdamConfig adam;
  adam.learning_rate = 1e-2;
  GailDiscriminator g(task.env, {16}, adam, 3);
  std::vector<std::pair<State, Action>> expert, agent;
  for (const Transition& t : task.demo.trajectory.transitions) {
    expert.push_back({t.s, t.a});
  }
  agent = {{State{0}, Action{0}}, {State{9}, Action{2}}, {State{63}, Action{1}}};
  const double first = g.TrainStep(expert, agent);
  double last = first;
  for (int i = 0; i < 500; ++i) last = g.TrainStep(expert, agent);
  EXPECT_LT(last, first);
  EXPECT_GT(g.Predict(expert[0].first, expert[0].second), 0.5);
  EXPECT_LT(g.Predict(State{0}, Action{0}), 0.5);
  const double p = g.Predict(State{0}, Action{0});
  EXPECT_DOUBLE_EQ(RIrlLearned(g, State{0}, Action{0}), -std::log(1.0 - p));
  EXPECT_THROW(g.TrainStep({}, agent), Error);
}

TEST(RewardsTest, TraceCsv) {
  const Task task = test::ShippedTask();
  RewardConfig c;
  c.tdil_backend = TdilBackend::kOracle;
  c.beta = 0.5;
  const RewardModel model(task.env, task.demo, c);
  const std::string csv = FormatRewardTrace(model, task.env, task.demo.trajectory);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "step,r_tdil,r_irl,r_agg,gt_reward");
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  EXPECT_EQ(lines, task.demo.trajectory.size() + 1);
  EXPECT_NE(csv.find(",1\n", csv.size() - 4), std::string::npos);
}

}  // namespace
}  // namespace tdil
