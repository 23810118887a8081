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


#include "tdil/config.h"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

namespace tdil {
namespace {

TEST(ConfigSectionsTest, ParsesSectionsCommentsAndLines) {
  const ConfigSections s = ParseConfigSections(
      "seed = 4  # trailing\n"
      "\n"
      "[env]\n"
      "  kind=chain\n"
      "# full-line comment\n"
      "[agent]\n"
      "gamma = 0.9\n");
  EXPECT_EQ(s.at("").at("seed").value, "4");
  EXPECT_EQ(s.at("env").at("kind").value, "chain");
  EXPECT_EQ(s.at("env").at("kind").line, 4);
  EXPECT_EQ(s.at("agent").at("gamma").value, "0.9");
}

TEST(ConfigSectionsTest, ReportsLineOfMalformedInput) {
  try {
    ParseConfigSections("[env]\nkind = grid\nnonsense\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(ParseConfigSections("[env\n"), ParseError);
  EXPECT_THROW(ParseConfigSections("a = 1\na = 2\n"), ParseError);
  EXPECT_THROW(ParseConfigSections(" = 1\n"), ParseError);
}

TEST(TrainConfigTest, MissingKeysKeepDefaults) {
  const TrainConfig c = ParseTrainConfig("");
  const TrainConfig d;
  EXPECT_EQ(c.seed, d.seed);
  EXPECT_EQ(c.agent.gamma, 0.97);
  EXPECT_EQ(c.agent.temperature, 0.05);
  EXPECT_EQ(c.disc.alpha, 0.99);
  EXPECT_EQ(c.disc.lambda, 1e-4);
  EXPECT_EQ(c.schedule.random_steps, 5000);
  EXPECT_EQ(c.schedule.replay_capacity, 200000u);
  EXPECT_EQ(c.reward.irl_mode, IrlMode::kIndicator);
  EXPECT_EQ(c.env.kind, "grid");
}

TEST(TrainConfigTest, ParsesEveryValueKind) {
  const TrainConfig c = ParseTrainConfig(
      "seed = 17\n"
      "[env]\nkind = chain\nchain_length = 9\ngoal_reward = 2.5\n"
      "[reward]\nkind = l2\nbeta = 0.25\nirl_mode = learned\n"
      "tdil_backend = oracle_multistep\nk_max = 2\nmultistep_weights = 1, 0.5\n"
      "normalize_tdil = true\n"
      "[discriminator]\nbackend = table\nhidden = 32,16\nalpha = 0.9\n"
      "[schedule]\ntotal_env_steps = 1234\nreplay_capacity = 99\n"
      "always_train_discriminator = 1\n");
  EXPECT_EQ(c.seed, 17u);
  EXPECT_EQ(c.env.kind, "chain");
  EXPECT_EQ(c.env.chain_length, 9);
  EXPECT_EQ(c.env.goal_reward, 2.5);
  EXPECT_EQ(c.reward.kind, RewardKind::kL2);
  EXPECT_EQ(c.reward.beta, 0.25);
  EXPECT_EQ(c.reward.irl_mode, IrlMode::kLearned);
  EXPECT_EQ(c.reward.tdil_backend, TdilBackend::kOracleMultistep);
  EXPECT_EQ(c.reward.multistep_weights, (std::vector<double>{1.0, 0.5}));
  EXPECT_TRUE(c.reward.normalize_tdil);
  EXPECT_EQ(c.disc.backend, DiscriminatorBackend::kTable);
  EXPECT_EQ(c.disc.hidden, (std::vector<int>{32, 16}));
  EXPECT_EQ(c.disc.alpha, 0.9);
  EXPECT_EQ(c.schedule.total_env_steps, 1234);
  EXPECT_EQ(c.schedule.replay_capacity, 99u);
  EXPECT_TRUE(c.schedule.always_train_discriminator);
}

TEST(TrainConfigTest, RejectsUnknownKeysAndBadValues) {
  const auto line_of = [](const std::string& text) {
    try {
      ParseTrainConfig(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("[agent]\ngamma = 0.9\ngama = 0.9\n"), 3);
  EXPECT_EQ(line_of("[nope]\nx = 1\n"), 2);
  EXPECT_EQ(line_of("[agent]\n\ngamma = fast\n"), 3);
  EXPECT_EQ(line_of("[schedule]\nreplay_capacity = -3\n"), 2);
  EXPECT_EQ(line_of("[schedule]\nstop_at_convergence = maybe\n"), 2);
  EXPECT_EQ(line_of("[reward]\nkind = gail\n"), 2);
  EXPECT_EQ(line_of("seed = 1.5\n"), 1);
}

TEST(TrainConfigTest, FormatRoundTrips) {
  TrainConfig c;
  c.seed = 123456789012345ULL;
  c.env.kind = "chain";
  c.env.map_path = "maps/x.grid";
  c.reward.beta = 0.1;
  c.reward.multistep_weights = {0.3, 1.0 / 3.0};
  c.reward.k_max = 2;
  c.disc.lambda = 1e-4;
  c.disc.hidden = {7};
  c.disc.use_reversed = false;
  c.agent.temperature = 0.123456789;
  c.schedule.stop_at_convergence = true;
  const std::string text = FormatTrainConfig(c);
  const TrainConfig back = ParseTrainConfig(text);
  EXPECT_EQ(FormatTrainConfig(back), text);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.reward.multistep_weights, c.reward.multistep_weights);
  EXPECT_EQ(back.agent.temperature, c.agent.temperature);
  EXPECT_FALSE(back.disc.use_reversed);
  EXPECT_EQ(back.env.map_path, "maps/x.grid");
}

TEST(TrainConfigTest, ValidateNamesTheKey) {
  const auto message = [](TrainConfig c) {
    try {
      c.Validate();
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  TrainConfig c;
  EXPECT_EQ(message(c), "");
  c.disc.alpha = 1.0;
  EXPECT_NE(message(c).find("discriminator.alpha"), std::string::npos);
  c = TrainConfig{};
  c.schedule.checkpoint_interval = 1500;
  EXPECT_NE(message(c).find("checkpoint_interval"), std::string::npos);
  c = TrainConfig{};
  c.env.kind = "torus";
  EXPECT_NE(message(c).find("env.kind"), std::string::npos);
  c = TrainConfig{};
  c.schedule.episode_cap = 10;
  EXPECT_NE(message(c).find("episode_cap"), std::string::npos);
}

TEST(FormatDoubleTest, ShortestRoundTrip) {
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_EQ(FormatDouble(1e-4), "1e-04");
  EXPECT_EQ(FormatDouble(3.0), "3");
  for (double v : {1.0 / 3.0, 2.0 / 7.0, 1e-300, -5e10, 0.97}) {
    EXPECT_EQ(std::stod(FormatDouble(v)), v);
  }
}

}  // namespace
}  // namespace tdil
