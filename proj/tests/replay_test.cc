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


#include "tdil/replay.h"

#include <gtest/gtest.h>

#include "test_util.h"

namespace tdil {
namespace {

Transition T(int s, int a, int next, bool terminal = false) {
  return Transition{State{s}, Action{a}, State{next}, terminal};
}

TEST(ReplayBufferTest, PushGrowsUntilCapacity) {
  ReplayBuffer buffer(3, 1);
  EXPECT_TRUE(buffer.empty());
  buffer.Push(T(0, 0, 1));
  EXPECT_EQ(buffer.size(), 1u);
  buffer.Push(T(1, 0, 2));
  buffer.Push(T(2, 0, 3));
  buffer.Push(T(3, 0, 4));
  EXPECT_EQ(buffer.size(), 3u);
  EXPECT_EQ(buffer.capacity(), 3u);
}

TEST(ReplayBufferTest, EvictsOldestFirst) {
  ReplayBuffer buffer(2, 1);
  buffer.Push(T(0, 0, 1));
  buffer.Push(T(1, 0, 2));
  buffer.Push(T(2, 0, 3));
  EXPECT_EQ(buffer.at(0), T(1, 0, 2));
  EXPECT_EQ(buffer.at(1), T(2, 0, 3));
  for (int i = 0; i < 50; ++i) EXPECT_NE(buffer.Sample(), T(0, 0, 1));
  EXPECT_THROW(buffer.at(2), Error);
}

TEST(ReplayBufferTest, SeededSamplingIsReproducible) {
  ReplayBuffer a(100, 42), b(100, 42), c(100, 43);
  for (int i = 0; i < 100; ++i) {
    a.Push(T(i, 0, i + 1));
    b.Push(T(i, 0, i + 1));
    c.Push(T(i, 0, i + 1));
  }
  bool differs = false;
  for (int i = 0; i < 50; ++i) {
    const Transition x = a.Sample();
    EXPECT_EQ(x, b.Sample());
    differs |= x != c.Sample();
  }
  EXPECT_TRUE(differs);
}

TEST(ReplayBufferTest, RejectsEmptyUse) {
  EXPECT_THROW(ReplayBuffer(0, 1), Error);
  ReplayBuffer buffer(4, 1);
  EXPECT_THROW(buffer.Sample(), Error);
  EXPECT_THROW(BuildPositiveBatch(buffer, 1), Error);
  EXPECT_THROW(BuildNegativeBatch(buffer, 1, 1, true), Error);
}

TEST(PositiveBatchTest, SingleTransitionRepeats) {
  ReplayBuffer buffer(4, 1);
  buffer.Push(T(3, 1, 5));
  const PairBatch batch = BuildPositiveBatch(buffer, 3);
  ASSERT_EQ(batch.size(), 3u);
  EXPECT_EQ(batch.label, PairLabel::kPositive);
  for (const StatePair& p : batch.pairs) {
    EXPECT_EQ(p, (StatePair{State{3}, State{5}}));
  }
  EXPECT_TRUE(BuildPositiveBatch(buffer, 0).empty());
}

TEST(PositiveBatchTest, PairsAreSupportedTransitions) {
  const Task task = test::ShippedTask();
  Rng rng(5);
  ReplayBuffer buffer(1000, 5);
  for (const Transition& t : CollectRandomTransitions(task.env, 1000, rng)) {
    buffer.Push(t);
  }
  for (const StatePair& p : BuildPositiveBatch(buffer, 500).pairs) {
    EXPECT_TRUE(task.env.TransitionSupport(p.first, p.second));
  }
}

TEST(NegativeBatchTest, ContrastivePairsUseHeadStates) {
  ReplayBuffer buffer(4, 1);
  buffer.Push(T(2, 0, 7));
  const std::vector<PairBatch> neg = BuildNegativeBatch(buffer, 4, 2, true);
  ASSERT_EQ(neg.size(), 2u);
  EXPECT_EQ(neg[0].label, PairLabel::kContrastive);
  EXPECT_EQ(neg[1].label, PairLabel::kReversed);
  ASSERT_EQ(neg[0].size(), 4u);
  for (const StatePair& p : neg[0].pairs) {
    EXPECT_EQ(p, (StatePair{State{2}, State{2}}));
  }
  ASSERT_EQ(neg[1].size(), 2u);
  EXPECT_EQ(neg[1].pairs[0], (StatePair{State{7}, State{2}}));
}

TEST(NegativeBatchTest, ReversedChainPairsAreInvalid) {
  const Environment chain = Environment::Chain(10);
  Rng rng(9);
  ReplayBuffer buffer(2000, 9);
  for (const Transition& t : CollectRandomTransitions(chain, 2000, rng)) {
    buffer.Push(t);
  }
  const std::vector<PairBatch> neg = BuildNegativeBatch(buffer, 0, 500, true);
  for (const StatePair& p : neg[1].pairs) {
    if (p.first == p.second) continue;  // Brake self-loops reverse to themselves.
    EXPECT_FALSE(chain.TransitionSupport(p.first, p.second));
  }
}

TEST(NegativeBatchTest, ReversedSetCanBeDisabled) {
  ReplayBuffer buffer(4, 1);
  buffer.Push(T(0, 0, 1));
  const std::vector<PairBatch> neg = BuildNegativeBatch(buffer, 3, 3, false);
  EXPECT_EQ(neg[0].size(), 3u);
  EXPECT_TRUE(neg[1].empty());
}

}  // namespace
}  // namespace tdil
