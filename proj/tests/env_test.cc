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


#include "tdil/env.h"

#include <filesystem>
#include <set>

#include <gtest/gtest.h>

#include "test_util.h"

namespace tdil {
namespace {

TEST(LoadMapTest, OpenTwoByTwoHasNoBarriers) {
  const GridSpec g = LoadMap(
      "+-+-+\n"
      "|G  |\n"
      "+ + +\n"
      "|   |\n"
      "+-+-+\n");
  EXPECT_EQ(g.width, 2);
  EXPECT_EQ(g.height, 2);
  EXPECT_TRUE(g.barriers.empty());
  EXPECT_EQ(g.goal, g.CellId(0, 1));
  EXPECT_FALSE(g.fixed_start.has_value());
}

TEST(LoadMapTest, ParsesBarriersStartAndTraps) {
  const GridSpec g = LoadMap(
      "+-+-+-+\n"
      "|G|T  |\n"
      "+ + +-+\n"
      "|  S  |\n"
      "+-+-+-+\n");
  EXPECT_EQ(g.width, 3);
  EXPECT_EQ(g.height, 2);
  const std::set<std::pair<int, int>> expected = {
      {g.CellId(0, 1), g.CellId(1, 1)}, {g.CellId(2, 0), g.CellId(2, 1)}};
  EXPECT_EQ(g.barriers, expected);
  ASSERT_TRUE(g.fixed_start.has_value());
  EXPECT_EQ(*g.fixed_start, g.CellId(1, 0));
  EXPECT_EQ(g.trap_cells, std::vector<int>{g.CellId(1, 1)});
}

TEST(LoadMapTest, EnclosedCellIsAConnectivityError) {
  const std::string text =
      "+-+-+-+\n"
      "|G    |\n"
      "+ + +-+\n"
      "|   | |\n"
      "+-+-+-+\n";
  try {
    LoadMap(text);
    FAIL() << "expected ConnectivityError";
  } catch (const ConnectivityError& e) {
    EXPECT_EQ(e.cell(), 2);
  }
}

TEST(LoadMapTest, ReportsLineAndColumn) {
  try {
    LoadMap("+-+-+\n|G  |\n+ + +\n| X |\n+-+-+\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4);
    EXPECT_EQ(e.column(), 3);
  }
  EXPECT_THROW(LoadMap("+-+-+\n|G  |\n+ + +\n|    |\n+-+-+\n"), ParseError);
  EXPECT_THROW(LoadMap("+-+-+\n|G   \n+ + +\n|   |\n+-+-+\n"), ParseError);
  EXPECT_THROW(LoadMap("+-+-+\n|    |\n"), ParseError);
  EXPECT_THROW(LoadMap("+-+-+\n|  |\n+ + +\n|   |\n+-+-+\n"), ParseError);
  EXPECT_THROW(LoadMap("+-+-+\n|G G|\n+ + +\n|   |\n+-+-+\n"), ParseError);
}

TEST(LoadMapTest, FormatRoundTrip) {
  const std::string text = ReadFile(test::DataPath("maze.grid"));
  const GridSpec g = LoadMap(text);
  EXPECT_EQ(FormatMap(g), text);
  const GridSpec again = LoadMap(FormatMap(g));
  EXPECT_EQ(again.barriers, g.barriers);
  EXPECT_EQ(again.goal, g.goal);
  EXPECT_EQ(again.trap_cells, g.trap_cells);
}

// The shipped map places cells next to the expert path that a barrier
// separates from it.
TEST(ShippedMapTest, HasBarrierSeparatedNeighbours) {
  const Task task = test::ShippedTask();
  const GridSpec& g = task.env.grid();
  int separated = 0;
  for (State e : task.demo.unique_states) {
    for (int c = 0; c < g.num_cells(); ++c) {
      const int d = std::abs(g.X(c) - g.X(e.id)) + std::abs(g.Y(c) - g.Y(e.id));
      if (d == 1 && g.Blocked(c, e.id)) ++separated;
    }
  }
  EXPECT_GE(separated, 1);
  ASSERT_FALSE(g.trap_cells.empty());
  for (int t : g.trap_cells) {
    bool next_to_path = false;
    for (State e : task.demo.unique_states) {
      const int d = std::abs(g.X(t) - g.X(e.id)) + std::abs(g.Y(t) - g.Y(e.id));
      next_to_path |= d == 1 && g.Blocked(t, e.id);
    }
    EXPECT_TRUE(next_to_path) << "trap cell " << t;
  }
}

TEST(StepTest, BumpStayAtBoundary) {
  const Environment env = test::OpenGrid(3, 3, 2, 2);
  const StepResult r = env.Step(State{0}, Action{0 + 2});  // Left at (0,0)
  EXPECT_EQ(r.next, State{0});
  EXPECT_FALSE(r.done);
  const StepResult down = env.Step(State{0}, Action{1});
  EXPECT_EQ(down.next, State{0});
}

TEST(StepTest, ReachingGoalTerminates) {
  const Environment env = test::OpenGrid(3, 3, 2, 2);
  const GridSpec& g = env.grid();
  const StepResult r = env.Step(State{g.CellId(1, 2)}, Action{3});
  EXPECT_EQ(r.next, State{g.goal});
  EXPECT_TRUE(r.done);
  EXPECT_EQ(r.gt_reward, 1.0);
  const StepResult up = env.Step(State{g.CellId(2, 1)}, Action{0});
  EXPECT_TRUE(up.done);
}

TEST(StepTest, BarrierBlocksMove) {
  GridSpec g;
  g.width = 2;
  g.height = 1;
  g.goal = 1;
  g.fixed_start = 0;
  const Environment open = Environment::Grid(g);
  EXPECT_EQ(open.Step(State{0}, Action{3}).next, State{1});
  g.barriers.insert({0, 1});
  g.fixed_start.reset();
  // No start support check happens here; only the dynamics matter.
  const Environment walled = Environment::Grid(g);
  EXPECT_EQ(walled.Step(State{0}, Action{3}).next, State{0});
}

TEST(StepTest, ChainBrakeStaysAndAdvanceMoves) {
  const Environment chain = Environment::Chain(5);
  EXPECT_EQ(chain.Step(State{2}, Action{1}).next, State{2});
  EXPECT_EQ(chain.Step(State{2}, Action{0}).next, State{3});
  const StepResult last = chain.Step(State{3}, Action{0});
  EXPECT_TRUE(last.done);
  EXPECT_EQ(last.gt_reward, 1.0);
  EXPECT_EQ(chain.Step(State{4}, Action{0}).next, State{4});
  for (int p = 0; p < 5; ++p) {
    for (int a = 0; a < 2; ++a) {
      EXPECT_GE(chain.Step(State{p}, Action{a}).next.id, p);
    }
  }
}

TEST(StepTest, GoalRewardIsConfigurable) {
  const Environment chain = Environment::Chain(3, 5.0);
  EXPECT_EQ(chain.Step(State{1}, Action{0}).gt_reward, 5.0);
}

TEST(StepTest, RejectsOutOfRangeIds) {
  const Environment env = test::OpenGrid(2, 2, 1, 1);
  EXPECT_THROW(env.Step(State{4}, Action{0}), Error);
  EXPECT_THROW(env.Step(State{0}, Action{4}), Error);
  EXPECT_THROW(env.features(State{-1}), Error);
}

TEST(TransitionSupportTest, MatchesActionEnumeration) {
  const Task task = test::ShippedTask();
  const Environment& env = task.env;
  const GridSpec& g = env.grid();
  for (int s = 0; s < env.num_states(); ++s) {
    for (int t = 0; t < env.num_states(); ++t) {
      bool some = false;
      for (int a = 0; a < 4; ++a) some |= env.Step(State{s}, Action{a}).next.id == t;
      ASSERT_EQ(env.TransitionSupport(State{s}, State{t}), some) << s << "->" << t;
    }
  }
  // Open 4-neighbours are supported; self-pairs exactly when a move bumps.
  const int a = g.CellId(3, 3), b = g.CellId(3, 4);
  ASSERT_FALSE(g.Blocked(a, b));
  EXPECT_TRUE(env.TransitionSupport(State{a}, State{b}));
  EXPECT_TRUE(env.TransitionSupport(State{0}, State{0}));
  EXPECT_FALSE(env.TransitionSupport(State{a}, State{a}));
}

TEST(TransitionSupportTest, ChainHasNoBackwardMoves) {
  const Environment chain = Environment::Chain(6);
  EXPECT_FALSE(chain.TransitionSupport(State{3}, State{2}));
  EXPECT_TRUE(chain.TransitionSupport(State{2}, State{3}));
  EXPECT_TRUE(chain.TransitionSupport(State{2}, State{2}));
}

TEST(EnvironmentTest, EnumeratesStatesAndStarts) {
  const Environment env = test::OpenGrid(3, 3, 1, 1);
  EXPECT_EQ(env.num_states(), 9);
  EXPECT_EQ(env.EnumerateStates().size(), 9u);
  EXPECT_EQ(env.start_support().size(), 8u);
  for (State s : env.start_support()) EXPECT_NE(s, env.goal());
  Rng rng(3);
  for (int i = 0; i < 100; ++i) EXPECT_NE(env.SampleStart(rng), env.goal());
}

TEST(EnvironmentTest, FeaturesAreNormalizedCoordinates) {
  const Environment env = test::OpenGrid(3, 5, 0, 0);
  const auto f = env.features(State{env.grid().CellId(2, 4)});
  ASSERT_EQ(f.size(), 2u);
  EXPECT_DOUBLE_EQ(f[0], 1.0);
  EXPECT_DOUBLE_EQ(f[1], 1.0);
  const auto g = env.features(State{env.grid().CellId(1, 2)});
  EXPECT_DOUBLE_EQ(g[0], 0.5);
  EXPECT_DOUBLE_EQ(g[1], 0.5);
}

TEST(DistanceTest, AllPairsMatchesBoundedSearch) {
  const Task task = test::ShippedTask();
  const Environment& env = task.env;
  const std::vector<int> dist = AllPairsActionDistance(env);
  const int n = env.num_states();
  // Brute-force frontier expansion as an independent oracle.
  for (int s = 0; s < n; s += 5) {
    std::set<int> frontier = {s};
    std::vector<int> first(n, -1);
    for (int k = 1; k <= 2 * n; ++k) {
      std::set<int> next;
      for (int c : frontier) {
        for (int a = 0; a < env.num_actions(); ++a) {
          next.insert(env.Step(State{c}, Action{a}).next.id);
        }
      }
      for (int c : next) {
        if (first[c] < 0) first[c] = k;
      }
      frontier = next;
    }
    for (int t = 0; t < n; ++t) ASSERT_EQ(dist[s * n + t], first[t]) << s << "->" << t;
  }
}

TEST(DistanceTest, DistanceToGoalOnOpenGrid) {
  const Environment env = test::OpenGrid(4, 4, 0, 0);
  const State goal = env.goal();
  const std::vector<int> d = DistanceToSet(env, std::span(&goal, 1));
  const GridSpec& g = env.grid();
  for (int c = 0; c < g.num_cells(); ++c) EXPECT_EQ(d[c], g.X(c) + g.Y(c));
}

TEST(ExpertDemoTest, OneStepRoute) {
  const Environment env = test::OpenGrid(2, 1, 1, 0);
  const std::vector<Action> route = {Action{3}};
  const ExpertDemo demo = MakeExpertDemo(env, route, State{0});
  EXPECT_EQ(demo.trajectory.size(), 1u);
  EXPECT_EQ(demo.states.size(), 2u);
  EXPECT_EQ(demo.unique_states.size(), 2u);
  EXPECT_TRUE(demo.ContainsPair(State{0}, Action{3}));
  EXPECT_FALSE(demo.ContainsPair(State{0}, Action{2}));
  EXPECT_EQ(demo.trajectory.total_gt_return, 1.0);
}

TEST(ExpertDemoTest, ShippedRouteFollowsThePath) {
  const Task task = test::ShippedTask();
  const GridSpec& g = task.env.grid();
  std::vector<int> cells;
  for (State s : task.demo.states) cells.push_back(s.id);
  const std::vector<int> expected = {
      g.CellId(7, 6), g.CellId(7, 5), g.CellId(7, 4), g.CellId(7, 3),
      g.CellId(7, 2), g.CellId(6, 2), g.CellId(5, 2), g.CellId(4, 2)};
  EXPECT_EQ(cells, expected);
  EXPECT_EQ(task.demo.states.back(), task.env.goal());
}

TEST(ExpertDemoTest, RejectsBadRoutes) {
  const Environment env = test::OpenGrid(3, 1, 2, 0);
  EXPECT_THROW(MakeExpertDemo(env, std::vector<Action>{Action{2}}, State{0}),
               DataError);  // bump
  EXPECT_THROW(MakeExpertDemo(env, std::vector<Action>{Action{3}}, State{0}),
               DataError);  // stops short
  EXPECT_THROW(MakeExpertDemo(env, std::vector<Action>{Action{3}, Action{3}, Action{2}},
                              State{0}),
               DataError);  // continues past the goal
  EXPECT_THROW(MakeExpertDemo(env, std::vector<Action>{}, State{0}), DataError);
}

TEST(RouteTest, ParsesGlyphsAndComments) {
  const Environment env = test::OpenGrid(3, 3, 2, 2);
  const Route r = ParseRoute(env, "# comment\nstart = 0,0\nactions=RRUU # tail\n");
  EXPECT_EQ(r.start, State{0});
  ASSERT_EQ(r.actions.size(), 4u);
  EXPECT_EQ(r.actions[0], Action{3});
  EXPECT_EQ(r.actions[3], Action{0});
  EXPECT_THROW(ParseRoute(env, "start=0,0\n"), ParseError);
  EXPECT_THROW(ParseRoute(env, "start=5,0\nactions=R\n"), ParseError);
  EXPECT_THROW(ParseRoute(env, "start=0,0\nactions=X\n"), DataError);
  EXPECT_THROW(ParseRoute(env, "begin=0,0\nactions=R\n"), ParseError);
  const Environment chain = Environment::Chain(4);
  const Route c = ParseRoute(chain, "start=1\nactions=AA\n");
  EXPECT_EQ(c.start, State{1});
  EXPECT_EQ(c.actions, (std::vector<Action>{Action{0}, Action{0}}));
}

TEST(TrajectoryFileTest, SaveLoadRoundTrip) {
  const Task task = test::ShippedTask();
  const std::string path = test::TempPath("demo.csv");
  SaveDemo(path, task.env, task.demo);
  const ExpertDemo loaded = LoadDemo(path, task.env);
  EXPECT_EQ(loaded.trajectory.transitions, task.demo.trajectory.transitions);
  EXPECT_EQ(loaded.states, task.demo.states);
  EXPECT_EQ(loaded.pairs, task.demo.pairs);
  EXPECT_EQ(loaded.trajectory.total_gt_return, task.demo.trajectory.total_gt_return);
}

TEST(TrajectoryFileTest, RejectsBrokenChainingAndForeignHeaders) {
  const Environment env = test::OpenGrid(3, 1, 2, 0);
  const std::string header = "# tdil-trajectory v1 env=grid hash=" + env.content_hash() + "\n";
  EXPECT_NO_THROW(ParseTrajectory(env, header + "0,0,3,1,0\n1,1,3,2,1\n"));
  try {
    ParseTrajectory(env, header + "0,0,3,1,0\n1,0,3,1,0\n");
    FAIL() << "expected a chain violation";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("chain violation"), std::string::npos);
  }
  EXPECT_THROW(ParseTrajectory(env, header + "0,0,3,2,0\n"), DataError);
  EXPECT_THROW(ParseTrajectory(env, header + "1,0,3,1,0\n"), DataError);
  EXPECT_THROW(ParseTrajectory(env, header + "0,0,3\n"), ParseError);
  const Environment other = test::OpenGrid(4, 1, 3, 0);
  EXPECT_THROW(ParseTrajectory(other, header + "0,0,3,1,0\n"), DataError);
}

}  // namespace
}  // namespace tdil
